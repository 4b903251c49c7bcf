#include "amod/cityio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "amod/errors.hpp"

namespace amod {

namespace {

constexpr double kEarthRadius = 6371000.0;

// Days since 1970-01-01 for a proleptic Gregorian date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, long long& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool leap(long long y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(long long y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

[[noreturn]] void bad_time(const std::string& s) {
  throw ValidationError("not an RFC 3339 date-time: '" + s + "'");
}

int digits(const std::string& s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) bad_time(s);
  int v = 0;
  for (std::size_t k = pos; k < pos + count; ++k) {
    if (s[k] < '0' || s[k] > '9') bad_time(s);
    v = v * 10 + (s[k] - '0');
  }
  return v;
}

void expect(const std::string& s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) bad_time(s);
}

double parse_double(const std::string& field, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    std::ostringstream os;
    os << "line " << line << ": bad " << what << " '" << field << "'";
    throw ValidationError(os.str());
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double quantize(double v, double step) { return std::round(v / step) * step; }

}  // namespace

double parse_rfc3339(const std::string& s) {
  const int year = digits(s, 0, 4);
  expect(s, 4, '-');
  const int month = digits(s, 5, 2);
  expect(s, 7, '-');
  const int day = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) bad_time(s);
  const int hour = digits(s, 11, 2);
  expect(s, 13, ':');
  const int minute = digits(s, 14, 2);
  expect(s, 16, ':');
  const int second = digits(s, 17, 2);
  if (month < 1 || month > 12 || day < 1 ||
      day > static_cast<int>(days_in_month(year, static_cast<unsigned>(month))) ||
      hour > 23 || minute > 59 || second > 60)
    bad_time(s);

  std::size_t pos = 19;
  double frac = 0.0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    double scale = 0.1;
    const std::size_t begin = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac += (s[pos] - '0') * scale;
      scale /= 10.0;
      ++pos;
    }
    if (pos == begin) bad_time(s);
  }
  if (pos >= s.size()) bad_time(s);
  int offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    if (oh > 23 || om > 59) bad_time(s);
    offset = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    bad_time(s);
  }
  if (pos != s.size()) bad_time(s);

  const long long days = days_from_civil(year, static_cast<unsigned>(month),
                                         static_cast<unsigned>(day));
  const long long secs = days * 86400 + hour * 3600 + minute * 60 + second - offset;
  return static_cast<double>(secs) + frac;
}

std::string format_rfc3339(double t) {
  const long long ms = std::llround(t * 1000.0);
  long long secs = ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000);
  const long long milli = ms - secs * 1000;
  long long days = secs >= 0 ? secs / 86400 : -((-secs + 86399) / 86400);
  long long rem = secs - days * 86400;
  long long y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", y, m, d,
                rem / 3600, rem / 60 % 60, rem % 60, milli);
  return buf;
}

std::vector<TripRecord> parse_trips(std::istream& in, const BoundingBox& box) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ValidationError("line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTripHeader)
    throw ValidationError(std::string("line 1: header must be '") + kTripHeader + "'");

  std::vector<TripRecord> trips;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 6) {
      std::ostringstream os;
      os << "line " << lineno << ": expected 6 fields, got " << f.size();
      throw ValidationError(os.str());
    }
    TripRecord r;
    try {
      r.pickup_time = parse_rfc3339(f[0]);
      r.dropoff_time = parse_rfc3339(f[1]);
    } catch (const ValidationError& e) {
      std::ostringstream os;
      os << "line " << lineno << ": " << e.what();
      throw ValidationError(os.str());
    }
    r.pickup = {parse_double(f[2], lineno, "pickup_lon"), parse_double(f[3], lineno, "pickup_lat")};
    r.dropoff = {parse_double(f[4], lineno, "dropoff_lon"),
                 parse_double(f[5], lineno, "dropoff_lat")};
    if (r.dropoff_time < r.pickup_time) {
      std::ostringstream os;
      os << "line " << lineno << ": dropoff before pickup";
      throw ValidationError(os.str());
    }
    if (!box.contains(r.pickup) || !box.contains(r.dropoff)) {
      std::ostringstream os;
      os << "line " << lineno << ": coordinates outside the bounding box";
      throw ValidationError(os.str());
    }
    trips.push_back(r);
  }
  return trips;
}

std::vector<TripRecord> read_trips(const std::string& path, const BoundingBox& box) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trip file '" + path + "'");
  return parse_trips(in, box);
}

void write_trips(std::ostream& out, const std::vector<TripRecord>& trips) {
  out << kTripHeader << '\n';
  char buf[128];
  for (const TripRecord& r : trips) {
    std::snprintf(buf, sizeof buf, ",%.7f,%.7f,%.7f,%.7f\n", r.pickup.lon, r.pickup.lat,
                  r.dropoff.lon, r.dropoff.lat);
    out << format_rfc3339(r.pickup_time) << ',' << format_rfc3339(r.dropoff_time) << buf;
  }
}

Projection::Projection(GeoPoint origin)
    : origin_(origin),
      kx_(kEarthRadius * std::cos(origin.lat * std::numbers::pi / 180.0) *
          std::numbers::pi / 180.0),
      ky_(kEarthRadius * std::numbers::pi / 180.0) {}

Projection Projection::around(const std::vector<GeoPoint>& points) {
  if (points.empty()) throw ValidationError("projection needs at least one point");
  GeoPoint c;
  for (const GeoPoint& p : points) {
    c.lon += p.lon;
    c.lat += p.lat;
  }
  c.lon /= static_cast<double>(points.size());
  c.lat /= static_cast<double>(points.size());
  return Projection(c);
}

void Projection::forward(const GeoPoint& p, double& x, double& y) const {
  x = (p.lon - origin_.lon) * kx_;
  y = (p.lat - origin_.lat) * ky_;
}

GeoPoint Projection::inverse(double x, double y) const {
  return {origin_.lon + x / kx_, origin_.lat + y / ky_};
}

double Projection::manhattan(const GeoPoint& a, const GeoPoint& b) const {
  return std::abs(a.lon - b.lon) * kx_ + std::abs(a.lat - b.lat) * ky_;
}

double Projection::euclidean(const GeoPoint& a, const GeoPoint& b) const {
  return std::hypot((a.lon - b.lon) * kx_, (a.lat - b.lat) * ky_);
}

StationClustering cluster_stations(const std::vector<TripRecord>& trips, std::size_t n,
                                   std::uint64_t seed) {
  if (n < 2) throw ValidationError("need at least two stations");
  std::vector<GeoPoint> geo;
  geo.reserve(trips.size() * 2);
  for (const TripRecord& t : trips) {
    geo.push_back(t.pickup);
    geo.push_back(t.dropoff);
  }
  std::set<std::pair<double, double>> distinct;
  for (const GeoPoint& p : geo) {
    distinct.emplace(p.lon, p.lat);
    if (distinct.size() >= n) break;
  }
  if (distinct.size() < n) {
    std::ostringstream os;
    os << "only " << distinct.size() << " distinct trip endpoints for " << n << " stations";
    throw ValidationError(os.str());
  }

  const Projection proj = Projection::around(geo);
  const std::size_t np = geo.size();
  std::vector<double> px(np), py(np);
  for (std::size_t k = 0; k < np; ++k) proj.forward(geo[k], px[k], py[k]);
  auto d2 = [&](std::size_t k, double cx, double cy) {
    return (px[k] - cx) * (px[k] - cx) + (py[k] - cy) * (py[k] - cy);
  };

  // Lloyd from several k-means++ seedings; keep the lowest inertia.
  std::mt19937_64 rng(seed);
  std::vector<double> cx, cy, keep_x, keep_y;
  std::vector<std::uint32_t> assign, keep_assign;
  std::size_t iter = 0, keep_iter = 0;
  double keep_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < kKmeansRestarts; ++restart) {
    cx.clear();
    cy.clear();
    const std::size_t first = std::uniform_int_distribution<std::size_t>(0, np - 1)(rng);
    cx.push_back(px[first]);
    cy.push_back(py[first]);
    std::vector<double> near(np);
    for (std::size_t k = 0; k < np; ++k) near[k] = d2(k, cx[0], cy[0]);
    std::vector<double> cum(np);
    while (cx.size() < n) {
      double total = 0.0;
      for (std::size_t k = 0; k < np; ++k) cum[k] = total += near[k];
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      std::size_t pick = static_cast<std::size_t>(
          std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      pick = std::min(pick, np - 1);
      while (near[pick] == 0.0) pick = (pick + 1) % np;  // u landed on a zero-width edge
      cx.push_back(px[pick]);
      cy.push_back(py[pick]);
      for (std::size_t k = 0; k < np; ++k)
        near[k] = std::min(near[k], d2(k, cx.back(), cy.back()));
    }

    assign.assign(np, std::numeric_limits<std::uint32_t>::max());
    iter = 0;
    for (; iter < kMaxKmeansIterations; ++iter) {
      bool changed = false;
      for (std::size_t k = 0; k < np; ++k) {
        std::uint32_t arg = 0;
        double bd = d2(k, cx[0], cy[0]);
        for (std::size_t c = 1; c < n; ++c) {
          const double v = d2(k, cx[c], cy[c]);
          if (v < bd) {
            bd = v;
            arg = static_cast<std::uint32_t>(c);
          }
        }
        if (assign[k] != arg) {
          assign[k] = arg;
          changed = true;
        }
      }
      std::vector<double> sx(n, 0.0), sy(n, 0.0);
      std::vector<std::size_t> cnt(n, 0);
      for (std::size_t k = 0; k < np; ++k) {
        sx[assign[k]] += px[k];
        sy[assign[k]] += py[k];
        ++cnt[assign[k]];
      }
      for (std::size_t c = 0; c < n; ++c) {
        if (cnt[c] > 0) {
          cx[c] = sx[c] / static_cast<double>(cnt[c]);
          cy[c] = sy[c] / static_cast<double>(cnt[c]);
          continue;
        }
        // Empty cluster: move it onto the point farthest from its centroid.
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t k = 0; k < np; ++k) {
          if (cnt[assign[k]] < 2) continue;
          const double v = d2(k, cx[assign[k]], cy[assign[k]]);
          if (v > fd) {
            fd = v;
            far = k;
          }
        }
        --cnt[assign[far]];
        assign[far] = static_cast<std::uint32_t>(c);
        cnt[c] = 1;
        cx[c] = px[far];
        cy[c] = py[far];
        changed = true;
      }
      if (!changed) break;
    }
    double inertia = 0.0;
    for (std::size_t k = 0; k < np; ++k) inertia += d2(k, cx[assign[k]], cy[assign[k]]);
    if (inertia < keep_inertia) {
      keep_inertia = inertia;
      keep_x = cx;
      keep_y = cy;
      keep_assign = assign;
      keep_iter = iter;
    }
  }
  cx = keep_x;
  cy = keep_y;
  assign = keep_assign;
  iter = keep_iter;

  StationClustering out;
  out.iterations = iter;
  for (std::size_t c = 0; c < n; ++c) out.centroids.push_back(proj.inverse(cx[c], cy[c]));
  out.pickup_station.resize(trips.size());
  out.dropoff_station.resize(trips.size());
  std::vector<double> walk(np);
  double sum = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    walk[k] = std::sqrt(d2(k, cx[assign[k]], cy[assign[k]]));
    sum += walk[k];
    (k % 2 == 0 ? out.pickup_station : out.dropoff_station)[k / 2] = assign[k];
  }
  if (np > 0) {
    out.mean_walk_m = sum / static_cast<double>(np);
    std::sort(walk.begin(), walk.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(np)));
    out.p95_walk_m = walk[std::max<std::size_t>(rank, 1) - 1];
  }
  return out;
}

DemandProfile estimate_profile(const std::vector<TripRecord>& trips,
                               const StationClustering& clustering,
                               const EstimateOptions& opts) {
  const std::size_t n = clustering.centroids.size();
  if (n < 2) throw ValidationError("clustering needs at least two stations");
  if (clustering.pickup_station.size() != trips.size() ||
      clustering.dropoff_station.size() != trips.size())
    throw ValidationError("clustering does not cover the trips");
  if (!(opts.kappa >= 0.0)) throw ValidationError("smoothing kappa must be nonnegative");
  if (!(opts.lambda_floor_per_hour > 0.0))
    throw ValidationError("lambda floor must be positive");
  if (trips.empty()) throw ValidationError("no trips to estimate from");

  const Projection proj = Projection::around(clustering.centroids);
  constexpr std::size_t H = 24;

  std::size_t days = opts.days;
  if (days == 0) {
    std::set<long long> dates;
    for (const TripRecord& t : trips)
      dates.insert(static_cast<long long>(std::floor(t.pickup_time / 86400.0)));
    days = dates.size();
  }
  const double dd = static_cast<double>(days);

  std::vector<Matrix> counts(H, Matrix(n, n, 0.0));
  std::vector<std::size_t> hour_trips(H, 0), speed_n(H, 0);
  std::vector<double> speed_sum(H, 0.0);
  for (std::size_t k = 0; k < trips.size(); ++k) {
    const TripRecord& t = trips[k];
    const std::size_t i = clustering.pickup_station[k], j = clustering.dropoff_station[k];
    if (i >= n || j >= n) throw ValidationError("station assignment out of range");
    const double tod = t.pickup_time - 86400.0 * std::floor(t.pickup_time / 86400.0);
    const std::size_t h = std::min<std::size_t>(static_cast<std::size_t>(tod / 3600.0), H - 1);
    ++hour_trips[h];
    const double dist = proj.manhattan(t.pickup, t.dropoff);
    const double dur = t.dropoff_time - t.pickup_time;
    if (dur > 0.0 && dist > 0.0) {
      speed_sum[h] += dist / dur;
      ++speed_n[h];
    }
    if (i != j) counts[h](i, j) += 1.0;
  }

  Matrix all(n, n, 0.0);
  double all_speed = 0.0;
  std::size_t all_speed_n = 0;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) all(i, j) += counts[h](i, j);
    all_speed += speed_sum[h];
    all_speed_n += speed_n[h];
  }
  if (all_speed_n == 0) throw ValidationError("no trip has positive duration and distance");
  all_speed /= static_cast<double>(all_speed_n);

  Matrix D(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      D(i, j) = i == j ? 0.0 : proj.manhattan(clustering.centroids[i], clustering.centroids[j]);

  DemandProfile prof;
  const double floor_rate = opts.lambda_floor_per_hour / 3600.0;
  auto fill = [&](const Matrix& c, double seconds, double speed, ProfileSlice& s,
                  const Matrix* fallback, std::size_t h) {
    s.lambda.assign(n, 0.0);
    s.P = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += c(i, j);
      s.lambda[i] = row > 0.0 ? row / seconds : floor_rate;
      const double denom = row + opts.kappa * static_cast<double>(n - 1);
      if (denom > 0.0) {
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) s.P(i, j) = (c(i, j) + opts.kappa) / denom;
      } else if (fallback) {
        for (std::size_t j = 0; j < n; ++j) s.P(i, j) = (*fallback)(i, j);
        std::ostringstream os;
        os << "hour " << h << ": station " << i << " has no departures; using all-day routing";
        prof.warnings.push_back(os.str());
      } else {
        std::ostringstream os;
        os << "station " << i << " has no departures and smoothing is off";
        throw ValidationError(os.str());
      }
    }
    s.speed = speed;
    s.T = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s.T(i, j) = D(i, j) / speed;
  };

  ProfileSlice day;
  fill(all, 86400.0 * dd, all_speed, day, nullptr, 0);
  for (std::size_t h = 0; h < H; ++h) {
    if (hour_trips[h] == 0) {
      std::ostringstream os;
      os << "hour " << h << " has no trips; using all-day estimates";
      prof.warnings.push_back(os.str());
      prof.slices.push_back(day);
      continue;
    }
    double speed = all_speed;
    if (speed_n[h] > 0) {
      speed = speed_sum[h] / static_cast<double>(speed_n[h]);
    } else {
      std::ostringstream os;
      os << "hour " << h << " has no usable durations; using the all-day speed";
      prof.warnings.push_back(os.str());
    }
    ProfileSlice s;
    fill(counts[h], 3600.0 * dd, speed, s, &day.P, h);
    prof.slices.push_back(std::move(s));
  }
  prof.slice_length = 3600.0;
  prof.stations = clustering.centroids;
  prof.distance = D;
  validate_profile(prof);
  return prof;
}

void validate_synth_spec(const SynthSpec& spec) {
  const std::size_t n = spec.centers.size();
  if (n < 2) throw ValidationError("synthetic city needs at least two centers");
  if (spec.rate_per_hour.size() != n)
    throw ValidationError("rate_per_hour must have one entry per center");
  for (double r : spec.rate_per_hour)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("rates must be nonnegative");
  if (spec.hourly_weight.size() != 24)
    throw ValidationError("hourly_weight must have 24 entries");
  for (double w : spec.hourly_weight)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("hourly weights must be nonnegative");
  if (!(spec.sigma_m >= 0.0)) throw ValidationError("sigma_m must be nonnegative");
  if (!(spec.speed > 0.0)) throw ValidationError("speed must be positive");
  if (spec.days < 1) throw ValidationError("days must be at least 1");
  if (spec.P) {
    const Matrix& P = *spec.P;
    if (P.rows() != n || P.cols() != n) throw ValidationError("P must be N x N");
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(P(i, j) >= 0.0)) throw ValidationError("P entries must be nonnegative");
        row += P(i, j);
      }
      if (P(i, i) != 0.0 || std::abs(row - 1.0) > kStochasticTolerance) {
        std::ostringstream os;
        os << "non-stochastic routing row: " << i;
        throw ValidationError(os.str());
      }
    }
  }
}

SynthCity generate_synthetic_city(const SynthSpec& spec, std::uint64_t seed) {
  validate_synth_spec(spec);
  const std::size_t n = spec.centers.size();
  std::mt19937_64 rng(seed);

  SynthCity city;
  if (spec.P) {
    city.truth.P = *spec.P;
  } else {
    city.truth.P = Matrix(n, n, 0.0);
    std::exponential_distribution<double> e(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) sum += city.truth.P(i, j) = e(rng);
      for (std::size_t j = 0; j < n; ++j) city.truth.P(i, j) /= sum;
    }
  }
  city.truth.speed = spec.speed;
  city.truth.lambda.assign(24, std::vector<double>(n, 0.0));
  for (std::size_t h = 0; h < 24; ++h)
    for (std::size_t i = 0; i < n; ++i)
      city.truth.lambda[h][i] = spec.rate_per_hour[i] * spec.hourly_weight[h] / 3600.0;

  const Projection proj = Projection::around(spec.centers);
  std::vector<double> ccx(n), ccy(n);
  for (std::size_t i = 0; i < n; ++i) proj.forward(spec.centers[i], ccx[i], ccy[i]);
  std::vector<std::discrete_distribution<std::size_t>> dest;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = city.truth.P.row(i);
    dest.emplace_back(row.begin(), row.end());
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> within(0.0, 3600.0);

  auto point = [&](std::size_t i) {
    const double x = ccx[i] + spec.sigma_m * noise(rng);
    const double y = ccy[i] + spec.sigma_m * noise(rng);
    GeoPoint g = proj.inverse(x, y);
    g.lon = quantize(g.lon, 1e-7);
    g.lat = quantize(g.lat, 1e-7);
    return g;
  };

  for (std::size_t d = 0; d < spec.days; ++d)
    for (std::size_t h = 0; h < 24; ++h)
      for (std::size_t i = 0; i < n; ++i) {
        const double rate = spec.rate_per_hour[i] * spec.hourly_weight[h];
        if (rate <= 0.0) continue;
        const long long k = std::poisson_distribution<long long>(rate)(rng);
        for (long long c = 0; c < k; ++c) {
          TripRecord t;
          t.pickup_time = quantize(spec.start + 86400.0 * static_cast<double>(d) +
                                       3600.0 * static_cast<double>(h) + within(rng),
                                   1e-3);
          const std::size_t j = dest[i](rng);
          t.pickup = point(i);
          t.dropoff = point(j);
          t.dropoff_time =
              quantize(t.pickup_time + proj.manhattan(t.pickup, t.dropoff) / spec.speed, 1e-3);
          city.trips.push_back(t);
        }
      }
  std::stable_sort(city.trips.begin(), city.trips.end(),
                   [](const TripRecord& a, const TripRecord& b) {
                     return a.pickup_time < b.pickup_time;
                   });
  return city;
}

}  // namespace amod
