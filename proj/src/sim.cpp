#include "amod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <sstream>

#include "amod/dispatch.hpp"
#include "amod/errors.hpp"

namespace amod {

std::size_t DemandProfile::station_count() const {
  return slices.empty() ? 0 : slices.front().lambda.size();
}

std::size_t DemandProfile::slice_index(double t) const {
  if (slices.size() <= 1) return 0;
  const double k = std::floor(t / slice_length);
  const auto s = static_cast<long long>(slices.size());
  return static_cast<std::size_t>(((static_cast<long long>(k) % s) + s) % s);
}

Network DemandProfile::network(std::size_t slice) const {
  const ProfileSlice& s = slices.at(slice);
  Network net{s.lambda, s.P, s.T, {}};
  if (!stations.empty()) {
    net.stations.resize(stations.size());
    for (std::size_t i = 0; i < stations.size(); ++i) {
      net.stations[i].lon = stations[i].lon;
      net.stations[i].lat = stations[i].lat;
    }
  }
  return net;
}

DemandProfile DemandProfile::stationary(const Network& net) {
  validate_network(net);
  DemandProfile p;
  p.slices.push_back(ProfileSlice{net.lambda, net.P, net.T, 0.0});
  for (const StationInfo& s : net.stations)
    if (s.lon && s.lat) p.stations.push_back(GeoPoint{*s.lon, *s.lat});
  if (p.stations.size() != net.size()) p.stations.clear();
  return p;
}

void validate_profile(const DemandProfile& profile) {
  if (profile.slices.empty()) throw ValidationError("profile has no slices");
  if (!(profile.slice_length > 0.0))
    throw ValidationError("profile slice length must be positive");
  const std::size_t n = profile.station_count();
  for (std::size_t h = 0; h < profile.slices.size(); ++h) {
    if (profile.slices[h].lambda.size() != n)
      throw ValidationError("profile slices disagree on the station count");
    try {
      validate_network(profile.network(h));
    } catch (const ValidationError& e) {
      std::ostringstream os;
      os << "profile slice " << h << ": " << e.what();
      throw ValidationError(os.str());
    }
  }
  if (!profile.stations.empty() && profile.stations.size() != n)
    throw ValidationError("profile station coordinates do not match slices");
}

namespace {

bool whole_multiple(double value, double step) {
  const double k = value / step;
  return std::abs(k - std::round(k)) < 1e-9 * std::max(1.0, std::abs(k));
}

long long steps_of(double value, double step) {
  return static_cast<long long>(std::llround(value / step));
}

struct Trip {
  double arrive;
  std::uint64_t seq;
  std::uint32_t from;
  std::uint32_t to;
};

struct LaterTrip {
  bool operator()(const Trip& a, const Trip& b) const {
    return a.arrive != b.arrive ? a.arrive > b.arrive : a.seq > b.seq;
  }
};

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

std::optional<double> percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nullopt;
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

SimSummary summarize(const SimConfig& cfg, const SimTrace& trace, long long fleet,
                     Policy policy, std::size_t n) {
  SimSummary s;
  s.fleet = fleet;
  s.mode = cfg.mode;
  s.policy = policy;
  s.seed = cfg.seed;
  s.duration = cfg.duration;
  s.stations.resize(n);
  const auto hours =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.duration / 3600.0)));
  std::vector<double> hour_sum(hours, 0.0);
  std::vector<long long> hour_count(hours, 0);
  std::vector<double> station_sum(n, 0.0);
  std::vector<double> waits;
  waits.reserve(trace.customers.size());

  for (const CustomerRecord& c : trace.customers) {
    StationStats& st = s.stations[c.origin];
    ++st.arrivals;
    if (c.board) {
      ++st.served;
      const double w = *c.board - c.arrival;
      waits.push_back(w);
      station_sum[c.origin] += w;
      const auto h = std::min(hours - 1, static_cast<std::size_t>(c.arrival / 3600.0));
      hour_sum[h] += w;
      ++hour_count[h];
    } else if (c.lost) {
      ++st.lost;
    } else {
      ++st.unserved;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    StationStats& st = s.stations[i];
    s.arrivals += st.arrivals;
    s.served += st.served;
    s.lost += st.lost;
    s.unserved += st.unserved;
    if (st.arrivals > 0)
      st.loss_fraction = static_cast<double>(st.lost) / static_cast<double>(st.arrivals);
    if (st.served > 0) st.mean_wait = station_sum[i] / static_cast<double>(st.served);
  }
  if (!waits.empty()) {
    double total = 0.0;
    for (double w : waits) total += w;
    s.mean_wait = total / static_cast<double>(waits.size());
    std::sort(waits.begin(), waits.end());
    s.p50_wait = percentile(waits, 0.5);
    s.p95_wait = percentile(waits, 0.95);
    s.max_wait = waits.back();
  }
  s.hourly_mean_wait.resize(hours);
  for (std::size_t h = 0; h < hours; ++h)
    if (hour_count[h] > 0)
      s.hourly_mean_wait[h] = hour_sum[h] / static_cast<double>(hour_count[h]);
  for (const DispatchRecord& d : trace.dispatches)
    for (const Move& mv : d.sent) s.rebalancing_trips += mv.count;
  return s;
}

}  // namespace

void validate_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(cfg.horizon > 0.0) || !whole_multiple(cfg.horizon, cfg.dt))
    throw ValidationError("rebalancing horizon must be a positive multiple of dt");
  if (!(cfg.duration >= 0.0) || !whole_multiple(cfg.duration, cfg.dt))
    throw ValidationError("duration must be a multiple of dt");
  if (cfg.sample_interval < 0.0 ||
      (cfg.sample_interval > 0.0 && !whole_multiple(cfg.sample_interval, cfg.dt)))
    throw ValidationError("sample interval must be a multiple of dt");
  validate_profile(cfg.profile);
}

SimResult run(const SimConfig& cfg, long long fleet, Policy policy) {
  validate_config(cfg);
  if (fleet < 0) throw ValidationError("fleet size must be nonnegative");
  const std::size_t n = cfg.profile.station_count();
  const long long steps = steps_of(cfg.duration, cfg.dt);
  const long long horizon_steps = steps_of(cfg.horizon, cfg.dt);
  const long long sample_steps =
      cfg.sample_interval > 0.0 ? steps_of(cfg.sample_interval, cfg.dt) : 0;

  // One arrival/destination stream per station, plus one for travel times,
  // so the customer sequence does not depend on how the fleet is operated.
  std::vector<std::mt19937_64> station_rng;
  station_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) station_rng.push_back(stream(cfg.seed, i, 0));
  std::mt19937_64 travel_rng = stream(cfg.seed, n, 1);
  std::exponential_distribution<double> unit_exp(1.0);

  std::vector<long long> idle(n, fleet / static_cast<long long>(n));
  for (long long i = 0; i < fleet % static_cast<long long>(n); ++i) ++idle[i];
  std::vector<std::deque<std::size_t>> queue(n);
  std::priority_queue<Trip, std::vector<Trip>, LaterTrip> enroute;
  IntMatrix enroute_count(n, n, 0);
  std::uint64_t trip_seq = 0;

  SimResult result;
  SimTrace& trace = result.trace;

  std::size_t slice = static_cast<std::size_t>(-1);
  std::vector<std::poisson_distribution<long long>> arrivals;
  std::vector<std::discrete_distribution<std::uint32_t>> destination;

  auto depart = [&](std::uint32_t from, std::uint32_t to, double t) {
    const double mean = cfg.profile.slices[slice].T(from, to);
    const double tau =
        cfg.travel == TravelModel::exponential ? mean * unit_exp(travel_rng) : mean;
    enroute.push(Trip{t + tau, trip_seq++, from, to});
    ++enroute_count(from, to);
    --idle[from];
  };

  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (const std::size_t h = cfg.profile.slice_index(t); h != slice) {
      slice = h;
      const ProfileSlice& ps = cfg.profile.slices[slice];
      arrivals.clear();
      destination.clear();
      for (std::size_t i = 0; i < n; ++i) {
        arrivals.emplace_back(ps.lambda[i] * cfg.dt);
        const auto row = ps.P.row(i);
        destination.emplace_back(row.begin(), row.end());
      }
    }

    while (!enroute.empty() && enroute.top().arrive <= t) {
      const Trip trip = enroute.top();
      enroute.pop();
      ++idle[trip.to];
      --enroute_count(trip.from, trip.to);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const long long count = arrivals[i](station_rng[i]);
      for (long long c = 0; c < count; ++c) {
        const std::uint32_t dest = destination[i](station_rng[i]);
        CustomerRecord rec;
        rec.arrival = t;
        rec.origin = static_cast<std::uint32_t>(i);
        rec.destination = dest;
        if (cfg.mode == CustomerMode::loss) {
          if (idle[i] > 0) {
            rec.board = t;
            depart(rec.origin, dest, t);
          } else {
            rec.lost = true;
          }
        } else {
          queue[i].push_back(trace.customers.size());
        }
        trace.customers.push_back(rec);
      }
    }

    if (cfg.mode == CustomerMode::queue) {
      for (std::size_t i = 0; i < n; ++i) {
        while (idle[i] > 0 && !queue[i].empty()) {
          CustomerRecord& rec = trace.customers[queue[i].front()];
          queue[i].pop_front();
          rec.board = t;
          depart(rec.origin, rec.destination, t);
        }
      }
    }

    if (policy == Policy::realtime && k % horizon_steps == 0) {
      FleetState state = FleetState::empty(n);
      state.time = t;
      state.idle = idle;
      state.enroute = enroute_count;
      for (std::size_t i = 0; i < n; ++i)
        state.waiting[i] = static_cast<long long>(queue[i].size());
      const DispatchOrder order =
          plan_dispatch(state, fleet, cfg.profile.slices[slice].T);
      DispatchRecord rec;
      rec.time = t;
      rec.cost = order.cost;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const long long want = order.num(i, j);
          if (want <= 0) continue;
          const auto from = static_cast<std::uint32_t>(i);
          const auto to = static_cast<std::uint32_t>(j);
          rec.ordered.push_back(Move{from, to, want});
          const long long go = std::min(want, idle[i]);
          for (long long v = 0; v < go; ++v) depart(from, to, t);
          if (go > 0) rec.sent.push_back(Move{from, to, go});
          rec.shortfall += want - go;
        }
      trace.dispatches.push_back(std::move(rec));
    }

    long long parked = 0;
    for (long long v : idle) parked += v;
    if (parked + static_cast<long long>(enroute.size()) != fleet) {
      std::ostringstream os;
      os << "vehicle conservation violated at t = " << t;
      throw NumericalError(os.str());
    }

    if (sample_steps > 0 && k % sample_steps == 0) {
      StationSample s;
      s.time = t;
      s.idle = idle;
      s.waiting.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        s.waiting[i] = static_cast<long long>(queue[i].size());
      s.enroute = static_cast<long long>(enroute.size());
      trace.samples.push_back(std::move(s));
    }
  }

  result.summary = summarize(cfg, trace, fleet, policy, n);
  return result;
}

std::vector<std::optional<double>> availability_from_trace(const SimTrace& trace,
                                                           std::size_t stations) {
  std::vector<long long> arrived(stations, 0), served(stations, 0);
  for (const CustomerRecord& c : trace.customers) {
    if (c.origin >= stations) throw ValidationError("customer origin out of range");
    ++arrived[c.origin];
    if (c.board) ++served[c.origin];
  }
  std::vector<std::optional<double>> out(stations);
  for (std::size_t i = 0; i < stations; ++i)
    if (arrived[i] > 0)
      out[i] = static_cast<double>(served[i]) / static_cast<double>(arrived[i]);
  return out;
}

}  // namespace amod
