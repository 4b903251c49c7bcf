#include "amod/congestion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "amod/errors.hpp"
#include "amod/rebalance.hpp"

namespace amod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxPathsPerPair = 100000;

// All minimum-travel-time paths between every ordered pair of stations.
std::vector<std::vector<RoadPath>> shortest_paths(
    std::size_t n, const std::vector<RoadSegment>& segs) {
  Matrix d(n, n, kInf);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const RoadSegment& s : segs) d(s.from, s.to) = std::min(d(s.from, s.to), s.travel_time);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));

  std::vector<std::vector<std::size_t>> out_arcs(n);
  for (std::size_t c = 0; c < segs.size(); ++c) out_arcs[segs[c].from].push_back(c);

  std::vector<std::vector<RoadPath>> paths(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(d(i, j) < kInf)) {
        std::ostringstream os;
        os << "disconnected road graph: no path from " << i << " to " << j;
        throw ValidationError(os.str());
      }
      const double tol = 1e-9 * std::max(1.0, d(i, j));
      std::vector<RoadPath>& found = paths[i * n + j];
      RoadPath cur;
      std::function<void(std::size_t)> walk = [&](std::size_t u) {
        if (u == j) {
          found.push_back(cur);
          if (found.size() > kMaxPathsPerPair)
            throw ValidationError("too many shortest paths between a station pair");
          return;
        }
        for (std::size_t c : out_arcs[u]) {
          const RoadSegment& s = segs[c];
          if (std::abs(d(i, u) + s.travel_time + d(s.to, j) - d(i, j)) > tol) continue;
          cur.push_back(c);
          walk(s.to);
          cur.pop_back();
        }
      };
      walk(i);
    }
  return paths;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ss_res += e * e;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace

RoadGraph::RoadGraph(std::size_t stations, std::vector<RoadSegment> segments)
    : stations_(stations), segments_(std::move(segments)) {
  for (const RoadSegment& s : segments_)
    if (s.from >= stations_ || s.to >= stations_ || s.from == s.to || !(s.travel_time > 0.0))
      throw ValidationError("road segment has bad endpoints or travel time");
  paths_ = shortest_paths(stations_, segments_);
  validate();
}

RoadGraph::RoadGraph(std::size_t stations, std::vector<RoadSegment> segments,
                     std::vector<std::vector<RoadPath>> paths)
    : stations_(stations), segments_(std::move(segments)), paths_(std::move(paths)) {
  validate();
}

void RoadGraph::validate() {
  const std::size_t n = stations_;
  if (n < 2) throw ValidationError("road graph needs at least two stations");
  if (paths_.size() != n * n) throw ValidationError("path table must be N*N");
  for (const RoadSegment& s : segments_)
    if (!(s.capacity > 0.0)) throw ValidationError("segment capacity must be positive");
  uses_.assign(n, std::vector<std::vector<std::size_t>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& bs = paths(i, j);
      if (bs.empty()) {
        std::ostringstream os;
        os << "disconnected road graph: no path from " << i << " to " << j;
        throw ValidationError(os.str());
      }
      auto& count = uses_[i][j];
      count.assign(segments_.size(), 0);
      for (const RoadPath& b : bs) {
        std::size_t at = i;
        for (std::size_t c : b) {
          if (c >= segments_.size() || segments_[c].from != at)
            throw ValidationError("path is not a chain of segments");
          at = segments_[c].to;
          ++count[c];
        }
        if (at != j) throw ValidationError("path does not end at its destination");
      }
    }
}

double RoadGraph::share(std::size_t i, std::size_t j, std::size_t c) const {
  if (i == j) return 0.0;
  return static_cast<double>(uses_[i][j][c]) / static_cast<double>(paths(i, j).size());
}

Matrix RoadGraph::travel_times() const {
  Matrix T(stations_, stations_, 0.0);
  for (std::size_t i = 0; i < stations_; ++i)
    for (std::size_t j = 0; j < stations_; ++j) {
      if (i == j) continue;
      double t = 0.0;
      for (std::size_t c : paths(i, j).front()) t += segments_[c].travel_time;
      T(i, j) = t;
    }
  return T;
}

Matrix RoadGraph::path_lengths() const {
  Matrix L(stations_, stations_, 0.0);
  for (std::size_t i = 0; i < stations_; ++i)
    for (std::size_t j = 0; j < stations_; ++j)
      if (i != j) L(i, j) = static_cast<double>(paths(i, j).front().size());
  return L;
}

RoadGraph make_grid(const GridSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0 || spec.rows * spec.cols < 2)
    throw ValidationError("grid needs at least two stations");
  const double q = spec.critical_density_per_km * spec.segment_km;
  const double t = spec.segment_km / spec.speed_kmh * 3600.0;
  std::vector<RoadSegment> segs;
  auto id = [&](std::size_t r, std::size_t c) { return r * spec.cols + c; };
  for (std::size_t r = 0; r < spec.rows; ++r)
    for (std::size_t c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) {
        segs.push_back({id(r, c), id(r, c + 1), q, t});
        segs.push_back({id(r, c + 1), id(r, c), q, t});
      }
      if (r + 1 < spec.rows) {
        segs.push_back({id(r, c), id(r + 1, c), q, t});
        segs.push_back({id(r + 1, c), id(r, c), q, t});
      }
    }
  return RoadGraph(spec.rows * spec.cols, std::move(segs));
}

Matrix road_throughputs(const AbstractQueueNet& qnet, const Throughputs& pi) {
  const std::size_t n = qnet.station_count();
  Matrix out(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out(i, j) = pi.pi[qnet.road_index(i, j)];
  return out;
}

VirtualCapacities virtual_capacities(const RoadGraph& graph, const Matrix& road_pi) {
  const std::size_t n = graph.station_count();
  const auto& segs = graph.segments();
  if (road_pi.rows() != n || road_pi.cols() != n)
    throw ValidationError("road throughput matrix must be N x N");

  std::vector<double> demand(segs.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (road_pi(i, j) < 0.0) throw ValidationError("road throughputs must be nonnegative");
      for (std::size_t c = 0; c < segs.size(); ++c)
        demand[c] += graph.share(i, j, c) * road_pi(i, j);
    }

  VirtualCapacities caps;
  caps.servers = IntMatrix(n, n, 0);
  caps.raw = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !(road_pi(i, j) > 0.0)) continue;
      double m = 0.0;
      for (const RoadPath& b : graph.paths(i, j)) {
        double bottleneck = kInf;
        for (std::size_t c : b)
          bottleneck = std::min(bottleneck, segs[c].capacity * graph.share(i, j, c) *
                                                road_pi(i, j) / demand[c]);
        m += bottleneck;
      }
      caps.raw(i, j) = m;
      // Floor with a little slack so 19.999999999 counts as 20.
      auto floored = static_cast<long long>(std::floor(m + 1e-9));
      if (floored < 1) {
        floored = 1;
        caps.raised.emplace_back(i, j);
      }
      caps.servers(i, j) = floored;
    }

  for (std::size_t c = 0; c < segs.size(); ++c) {
    double load = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) load += static_cast<double>(caps.servers(i, j)) * graph.share(i, j, c);
    caps.worst_segment_load = std::max(caps.worst_segment_load, load / segs[c].capacity);
  }
  for (const auto& [i, j] : caps.raised)
    std::cerr << "warning: road " << i << "->" << j
              << " has throughput but fewer than one virtual server; using 1\n";
  return caps;
}

IntMatrix server_matrix(const VirtualCapacities& caps) {
  IntMatrix s = caps.servers;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      if (i != j) s(i, j) = std::max(1LL, s(i, j));
  return s;
}

PerfReport finite_mva(const AbstractQueueNet& qnet, const Throughputs& pi, long long m) {
  if (m < 0) throw ValidationError("fleet size must be nonnegative");
  const std::size_t nodes = qnet.node_count();
  const std::size_t n = qnet.station_count();
  if (pi.pi.size() != nodes)
    throw ValidationError("throughput vector does not match the network");

  // Marginals P(j | n) for j < s on multi-server nodes.
  std::vector<std::vector<double>> marg(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const QueueNode& q = qnet.node(k);
    if (q.kind == NodeKind::road && q.servers && *q.servers > 1) {
      marg[k].assign(static_cast<std::size_t>(*q.servers), 0.0);
      marg[k][0] = 1.0;
    }
  }

  std::vector<double> L(nodes, 0.0), W(nodes, 0.0), X(nodes, 0.0);
  for (long long v = 1; v <= m; ++v) {
    double denom = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      const QueueNode& q = qnet.node(k);
      if (q.kind == NodeKind::station) {
        W[k] = (1.0 + L[k]) / q.rate;
      } else if (q.is_delay()) {
        W[k] = 1.0 / q.rate;
      } else {
        const long long s = *q.servers;
        double corr = 0.0;
        for (long long j = 0; j + 2 <= s; ++j) corr += static_cast<double>(s - 1 - j) * marg[k][j];
        W[k] = (1.0 + L[k] + corr) / (static_cast<double>(s) * q.rate);
      }
      denom += pi.pi[k] * W[k];
    }
    double total = 0.0;
    const double flow = static_cast<double>(v) / denom;
    for (std::size_t k = 0; k < nodes; ++k) {
      L[k] = static_cast<double>(v) * pi.pi[k] * W[k] / denom;
      X[k] = pi.pi[k] * flow;
      total += L[k];
    }
    if (std::abs(total - static_cast<double>(v)) > 1e-9 * static_cast<double>(v)) {
      std::ostringstream os;
      os << "finite MVA lost vehicles: sum L = " << total << " at n = " << v;
      throw NumericalError(os.str());
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      if (marg[k].empty()) continue;
      const QueueNode& q = qnet.node(k);
      const long long s = *q.servers;
      std::vector<double>& p = marg[k];
      // P(j | v) = X / mu(j) * P(j - 1 | v - 1), updated high to low in place.
      for (long long j = s - 1; j >= 1; --j)
        p[j] = X[k] / q.service_rate(j) * p[j - 1];
      double busy = X[k] / q.rate;
      for (long long j = 1; j < s; ++j) busy += static_cast<double>(s - j) * p[j];
      p[0] = 1.0 - busy / static_cast<double>(s);
      double sum = 0.0;
      for (double x : p) {
        if (x < -1e-9 || x > 1.0 + 1e-9)
          throw NumericalError("finite MVA marginal probability left [0, 1]");
        sum += x;
      }
      if (sum > 1.0 + 1e-9)
        throw NumericalError("finite MVA marginal probabilities exceed 1");
    }
  }

  PerfReport r;
  r.fleet = m;
  r.queue_length = L;
  r.wait = W;
  r.node_throughput.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k)
    r.node_throughput[k] = W[k] > 0.0 && m > 0 ? L[k] / W[k] : 0.0;
  if (m == 0) std::fill(r.wait.begin(), r.wait.end(), 0.0);
  r.gamma = relative_utilization(qnet, pi);
  r.availability.resize(n);
  r.throughput.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.throughput[i] = r.node_throughput[i];
    r.availability[i] = checked_availability(r.throughput[i] / qnet.eff_lambda()[i], i);
  }
  return r;
}

CongestionReport evaluate_congestion(const RoadGraph& graph, const Network& net,
                                     const Matrix& beta) {
  const std::size_t n = graph.station_count();
  if (net.size() != n) throw ValidationError("network and road graph sizes differ");
  const auto& segs = graph.segments();
  CongestionReport rep;
  rep.passenger_load.assign(segs.size(), 0.0);
  rep.rebalancing_load.assign(segs.size(), 0.0);
  double expected_total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double L = net.lambda[i] * net.P(i, j) * net.T(i, j);
      const double Lreb = beta(i, j) * net.T(i, j);
      rep.passenger_vehicles += L;
      rep.rebalancing_vehicles += Lreb;
      double mean_len = 0.0;
      for (const RoadPath& b : graph.paths(i, j)) mean_len += static_cast<double>(b.size());
      mean_len /= static_cast<double>(graph.paths(i, j).size());
      expected_total += L * mean_len;
      for (std::size_t c = 0; c < segs.size(); ++c) {
        const double a = graph.share(i, j, c);
        if (a == 0.0) continue;
        rep.passenger_load[c] += L * a;
        rep.rebalancing_load[c] += Lreb * a;
      }
    }

  double total = 0.0;
  for (double x : rep.passenger_load) total += x;
  if (std::abs(total - expected_total) > 1e-9 * std::max(1.0, expected_total))
    throw NumericalError("segment loads do not account for all passenger vehicles");

  rep.utilization_before.resize(segs.size());
  rep.utilization_after.resize(segs.size());
  double mean_before = 0.0, mean_after = 0.0;
  for (std::size_t c = 0; c < segs.size(); ++c) {
    rep.utilization_before[c] = rep.passenger_load[c] / segs[c].capacity;
    rep.utilization_after[c] =
        (rep.passenger_load[c] + rep.rebalancing_load[c]) / segs[c].capacity;
    mean_before += rep.utilization_before[c];
    mean_after += rep.utilization_after[c];
    if (rep.utilization_before[c] > rep.utilization_before[rep.most_congested])
      rep.most_congested = c;
  }
  const double max_before = rep.utilization_before[rep.most_congested];
  const double max_after = rep.utilization_after[rep.most_congested];
  rep.reb_ratio = rep.passenger_vehicles > 0.0
                      ? rep.rebalancing_vehicles / rep.passenger_vehicles
                      : 0.0;
  rep.avg_util_increase = mean_before > 0.0 ? (mean_after - mean_before) / mean_before : 0.0;
  rep.max_util_increase = max_before > 0.0 ? (max_after - max_before) / max_before : 0.0;
  return rep;
}

Matrix hop_rebalancing(const RoadGraph& graph, const Network& net, const Matrix& beta) {
  const std::size_t n = graph.station_count();
  const auto& segs = graph.segments();
  for (const RoadSegment& s : segs)
    if (std::abs(net.T(s.from, s.to) - s.travel_time) > 1e-9 * s.travel_time)
      throw ValidationError("hop form needs T to match segment travel times");
  Matrix hop(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || beta(i, j) == 0.0) continue;
      for (std::size_t c = 0; c < segs.size(); ++c) {
        const double a = graph.share(i, j, c);
        if (a > 0.0) hop(segs[c].from, segs[c].to) += a * beta(i, j);
      }
    }
  return hop;
}

Network random_grid_system(const RoadGraph& graph, const StudyConfig& cfg,
                           std::uint64_t seed) {
  if (!(cfg.lambda_min > 0.0) || cfg.lambda_max < cfg.lambda_min)
    throw ValidationError("need 0 < lambda_min <= lambda_max");
  const std::size_t n = graph.station_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rate(cfg.lambda_min, cfg.lambda_max);
  std::exponential_distribution<double> gamma1(1.0);
  Network net;
  net.lambda.resize(n);
  for (double& l : net.lambda) l = rate(rng);
  net.P = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += net.P(i, j) = gamma1(rng);
    for (std::size_t j = 0; j < n; ++j) net.P(i, j) /= sum;
  }
  net.T = graph.travel_times();
  return net;
}

StudyResult congestion_study(const StudyConfig& cfg) {
  const RoadGraph graph = make_grid(cfg.grid);
  std::mt19937_64 master(cfg.seed);
  StudyResult out;
  std::vector<CongestionReport> direct;
  std::size_t attempts = 0;
  while (out.systems.size() < cfg.systems) {
    if (attempts++ >= cfg.max_attempts)
      throw NumericalError("congestion study: too many unstable systems drawn");
    const std::uint64_t seed = master();
    const Network net = random_grid_system(graph, cfg, seed);
    const CongestionReport before = evaluate_congestion(graph, net, Matrix(net.size(), net.size(), 0.0));
    if (*std::max_element(before.utilization_before.begin(),
                          before.utilization_before.end()) >= 1.0) {
      ++out.resampled;
      continue;
    }
    const RebalancePlan plan = optimal_rebalance(net);
    out.systems.push_back(
        {seed, evaluate_congestion(graph, net, hop_rebalancing(graph, net, plan.beta))});
    direct.push_back(evaluate_congestion(graph, net, plan.beta));
  }

  std::vector<double> x, y, yd;
  double zeros = 0;
  for (std::size_t s = 0; s < out.systems.size(); ++s) {
    const CongestionReport& r = out.systems[s].report;
    x.push_back(r.reb_ratio);
    y.push_back(r.avg_util_increase);
    yd.push_back(direct[s].avg_util_increase);
    if (r.max_util_increase == 0.0) ++zeros;
    out.max_of_max_increase = std::max(out.max_of_max_increase, r.max_util_increase);
  }
  if (x.empty()) return out;
  const LinearFit fit = linear_fit(x, y);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.direct_r_squared = linear_fit(x, yd).r_squared;
  out.zero_max_fraction = zeros / static_cast<double>(x.size());
  return out;
}

}  // namespace amod
