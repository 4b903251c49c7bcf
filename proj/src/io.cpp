#include "amod/io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "amod/errors.hpp"

namespace amod {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<double> v;
  for (const Json& x : j) {
    if (!x.is_number()) throw ValidationError(std::string(what) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

void check_schema(const Json& j) {
  if (j.contains("schema") && j.at("schema") != kSchemaVersion)
    throw ValidationError("unsupported schema version " + j.at("schema").dump());
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

const char* mode_name(CustomerMode m) { return m == CustomerMode::loss ? "loss" : "queue"; }
const char* policy_name(Policy p) { return p == Policy::none ? "none" : "realtime"; }

Json moves(const std::vector<Move>& ms) {
  Json a = Json::array();
  for (const Move& m : ms) a.push_back({m.from, m.to, m.count});
  return a;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

Json matrix_to_json(const Matrix& m) {
  Json a = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    a.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return a;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const Json& r : j) rows.push_back(vector_from_json(r, what));
  for (const auto& r : rows)
    if (r.size() != rows.size())
      throw ValidationError(std::string(what) + " must be square");
  return Matrix::from_rows(rows);
}

Json network_to_json(const Network& net) {
  Json j;
  j["schema"] = kSchemaVersion;
  Json st = Json::array();
  for (std::size_t i = 0; i < net.stations.size(); ++i) {
    const StationInfo& s = net.stations[i];
    Json e;
    e["name"] = s.name;
    e["lon"] = opt(s.lon);
    e["lat"] = opt(s.lat);
    st.push_back(e);
  }
  j["stations"] = st;
  j["lambda"] = net.lambda;
  j["P"] = matrix_to_json(net.P);
  j["T"] = matrix_to_json(net.T);
  return j;
}

Network network_from_json(const Json& j) {
  check_schema(j);
  Network net;
  net.lambda = vector_from_json(field(j, "lambda"), "lambda");
  net.P = matrix_from_json(field(j, "P"), "P");
  net.T = matrix_from_json(field(j, "T"), "T");
  if (j.contains("stations")) {
    for (const Json& s : j.at("stations")) {
      StationInfo info;
      if (s.contains("name")) info.name = s.at("name").get<std::string>();
      if (s.contains("lon") && s.at("lon").is_number()) info.lon = s.at("lon").get<double>();
      if (s.contains("lat") && s.at("lat").is_number()) info.lat = s.at("lat").get<double>();
      net.stations.push_back(info);
    }
    if (!net.stations.empty() && net.stations.size() != net.lambda.size())
      throw ValidationError("stations and lambda differ in length");
  }
  validate_network(net);
  return net;
}

Json profile_to_json(const DemandProfile& p) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["slice_length"] = p.slice_length;
  Json st = Json::array();
  for (const GeoPoint& g : p.stations) st.push_back({{"lon", g.lon}, {"lat", g.lat}});
  j["stations"] = st;
  if (!p.distance.empty()) j["distance"] = matrix_to_json(p.distance);
  Json sl = Json::array();
  for (const ProfileSlice& s : p.slices)
    sl.push_back({{"lambda", s.lambda},
                  {"P", matrix_to_json(s.P)},
                  {"T", matrix_to_json(s.T)},
                  {"speed", s.speed}});
  j["slices"] = sl;
  j["warnings"] = p.warnings;
  return j;
}

DemandProfile profile_from_json(const Json& j) {
  check_schema(j);
  if (!j.contains("slices")) return DemandProfile::stationary(network_from_json(j));
  DemandProfile p;
  if (j.contains("slice_length")) p.slice_length = j.at("slice_length").get<double>();
  if (j.contains("stations"))
    for (const Json& s : j.at("stations"))
      p.stations.push_back({field(s, "lon").get<double>(), field(s, "lat").get<double>()});
  if (j.contains("distance")) p.distance = matrix_from_json(j.at("distance"), "distance");
  for (const Json& s : field(j, "slices")) {
    ProfileSlice ps;
    ps.lambda = vector_from_json(field(s, "lambda"), "lambda");
    ps.P = matrix_from_json(field(s, "P"), "P");
    ps.T = matrix_from_json(field(s, "T"), "T");
    if (s.contains("speed")) ps.speed = s.at("speed").get<double>();
    p.slices.push_back(std::move(ps));
  }
  if (j.contains("warnings"))
    for (const Json& w : j.at("warnings")) p.warnings.push_back(w.get<std::string>());
  validate_profile(p);
  return p;
}

Json plan_to_json(const RebalancePlan& plan) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["beta"] = matrix_to_json(plan.beta);
  j["psi"] = plan.promotion.psi;
  j["alpha"] = matrix_to_json(plan.promotion.alpha);
  j["cost"] = plan.cost;
  return j;
}

Json perf_to_json(const PerfReport& r, std::size_t stations) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["fleet"] = r.fleet;
  j["availability"] = r.availability;
  j["throughput"] = r.throughput;
  j["gamma"] = r.gamma;
  const auto head = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin(), v.begin() + static_cast<long>(std::min(stations, v.size())));
  };
  j["station_queue_length"] = head(r.queue_length);
  j["station_wait"] = head(r.wait);
  double on_road = 0.0;
  for (std::size_t k = stations; k < r.queue_length.size(); ++k) on_road += r.queue_length[k];
  j["vehicles_on_road"] = on_road;
  return j;
}

std::string perf_to_csv(const PerfReport& r, std::size_t stations) {
  std::ostringstream os;
  os << "station,fleet,availability,throughput,gamma,queue_length\n";
  for (std::size_t i = 0; i < stations; ++i)
    os << i << ',' << r.fleet << ',' << num(r.availability[i]) << ',' << num(r.throughput[i])
       << ',' << num(r.gamma[i]) << ',' << num(r.queue_length[i]) << '\n';
  return os.str();
}

Json summary_to_json(const SimSummary& s) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["fleet"] = s.fleet;
  j["mode"] = mode_name(s.mode);
  j["policy"] = policy_name(s.policy);
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["arrivals"] = s.arrivals;
  j["served"] = s.served;
  j["lost"] = s.lost;
  j["unserved"] = s.unserved;
  j["rebalancing_trips"] = s.rebalancing_trips;
  j["mean_wait"] = opt(s.mean_wait);
  j["p50_wait"] = opt(s.p50_wait);
  j["p95_wait"] = opt(s.p95_wait);
  j["max_wait"] = opt(s.max_wait);
  Json st = Json::array();
  for (const StationStats& x : s.stations)
    st.push_back({{"arrivals", x.arrivals},
                  {"served", x.served},
                  {"lost", x.lost},
                  {"unserved", x.unserved},
                  {"loss_fraction", opt(x.loss_fraction)},
                  {"mean_wait", opt(x.mean_wait)}});
  j["stations"] = st;
  Json hw = Json::array();
  for (const auto& w : s.hourly_mean_wait) hw.push_back(opt(w));
  j["hourly_mean_wait"] = hw;
  return j;
}

std::string summary_to_csv(const SimSummary& s) {
  std::ostringstream os;
  os << "station,arrivals,served,lost,unserved,loss_fraction,mean_wait\n";
  for (std::size_t i = 0; i < s.stations.size(); ++i) {
    const StationStats& x = s.stations[i];
    os << i << ',' << x.arrivals << ',' << x.served << ',' << x.lost << ',' << x.unserved << ','
       << num(x.loss_fraction) << ',' << num(x.mean_wait) << '\n';
  }
  return os.str();
}

void write_trace_ndjson(std::ostream& out, const SimTrace& trace) {
  for (const CustomerRecord& c : trace.customers) {
    Json j{{"type", "customer"},
           {"arrival", c.arrival},
           {"origin", c.origin},
           {"destination", c.destination},
           {"board", opt(c.board)},
           {"lost", c.lost}};
    out << j.dump() << '\n';
  }
  for (const DispatchRecord& d : trace.dispatches) {
    Json j{{"type", "dispatch"},
           {"time", d.time},
           {"ordered", moves(d.ordered)},
           {"sent", moves(d.sent)},
           {"shortfall", d.shortfall},
           {"cost", d.cost}};
    out << j.dump() << '\n';
  }
  for (const StationSample& s : trace.samples) {
    Json j{{"type", "sample"},
           {"time", s.time},
           {"waiting", s.waiting},
           {"idle", s.idle},
           {"enroute", s.enroute}};
    out << j.dump() << '\n';
  }
}

std::string congestion_to_csv(const StudyResult& r) {
  std::ostringstream os;
  os << "seed,reb_ratio,avg_util_increase,max_util_increase\n";
  for (const StudySystem& s : r.systems)
    os << s.seed << ',' << num(s.report.reb_ratio) << ',' << num(s.report.avg_util_increase)
       << ',' << num(s.report.max_util_increase) << '\n';
  return os.str();
}

SynthSpec synth_spec_from_json(const Json& j) {
  check_schema(j);
  SynthSpec s;
  for (const Json& c : field(j, "centers"))
    s.centers.push_back({field(c, "lon").get<double>(), field(c, "lat").get<double>()});
  s.rate_per_hour = vector_from_json(field(j, "rate_per_hour"), "rate_per_hour");
  if (j.contains("hourly_weight"))
    s.hourly_weight = vector_from_json(j.at("hourly_weight"), "hourly_weight");
  if (j.contains("P") && !j.at("P").is_null()) s.P = matrix_from_json(j.at("P"), "P");
  if (j.contains("sigma_m")) s.sigma_m = j.at("sigma_m").get<double>();
  if (j.contains("speed")) s.speed = j.at("speed").get<double>();
  if (j.contains("start")) s.start = parse_rfc3339(j.at("start").get<std::string>());
  if (j.contains("days")) s.days = j.at("days").get<std::size_t>();
  validate_synth_spec(s);
  return s;
}

Json truth_to_json(const SynthTruth& t) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["lambda"] = t.lambda;
  j["P"] = matrix_to_json(t.P);
  j["speed"] = t.speed;
  return j;
}

}  // namespace amod
