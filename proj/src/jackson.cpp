#include "amod/jackson.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "amod/errors.hpp"

namespace amod {

std::vector<double> stationary_vector(const Matrix& P,
                                      const PowerIterationOptions& opts,
                                      std::size_t* iterations) {
  const std::size_t n = P.rows();
  std::vector<double> x(n, 1.0), y(n);
  double change = 0.0;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    // y = x (I + P) / 2
    for (std::size_t j = 0; j < n; ++j) y[j] = 0.5 * x[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = 0.5 * x[i];
      if (xi == 0.0) continue;
      const auto row = P.row(i);
      for (std::size_t j = 0; j < n; ++j) y[j] += xi * row[j];
    }
    const double top = *std::max_element(y.begin(), y.end());
    if (!(top > 0.0) || !std::isfinite(top))
      throw NumericalError("stationary vector iteration degenerated");
    change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] /= top;
      change = std::max(change, std::abs(y[j] - x[j]));
    }
    x.swap(y);
    if (change < opts.tolerance) {
      if (iterations) *iterations = it;
      return x;
    }
  }
  std::ostringstream os;
  os << "stationary vector did not converge after " << opts.max_iterations
     << " iterations (last max-norm change " << change << ", tolerance "
     << opts.tolerance << ")";
  throw NumericalError(os.str());
}

Throughputs solve_throughputs(const AbstractQueueNet& qnet,
                              const PowerIterationOptions& opts) {
  const std::size_t n = qnet.station_count();
  Throughputs out;
  std::vector<double> station = stationary_vector(qnet.eff_P(), opts, &out.iterations);
  out.pi.assign(qnet.node_count(), 0.0);
  std::copy(station.begin(), station.end(), out.pi.begin());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.pi[qnet.road_index(i, j)] = station[i] * qnet.eff_P()(i, j);
  return out;
}

std::vector<double> relative_utilization(const AbstractQueueNet& qnet,
                                         const Throughputs& pi) {
  const std::size_t n = qnet.station_count();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = pi.pi[i] / qnet.node(i).service_rate(1);
  return g;
}

double checked_availability(double raw, std::size_t station) {
  constexpr double kSlack = 1e-9;
  if (!(raw >= -kSlack && raw <= 1.0 + kSlack)) {
    std::ostringstream os;
    os << "availability " << raw << " at station " << station
       << " is outside [0, 1]";
    throw NumericalError(os.str());
  }
  return std::clamp(raw, 0.0, 1.0);
}

namespace {

// x -> pi^x / prod_{k=1..x} mu(k), for x = 0..m.
std::vector<double> node_factors(const QueueNode& node, double pi, long long m) {
  std::vector<double> f(static_cast<std::size_t>(m) + 1, 0.0);
  f[0] = 1.0;
  for (long long x = 1; x <= m; ++x)
    f[x] = f[x - 1] * pi / node.service_rate(x);
  return f;
}

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> c(a.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double s = 0.0;
    for (std::size_t x = 0; x <= k; ++x) s += a[k - x] * b[x];
    c[k] = s;
  }
  return c;
}

void check_inputs(const AbstractQueueNet& qnet, const Throughputs& pi,
                  long long m) {
  if (m < 0) throw ValidationError("fleet size must be nonnegative");
  if (pi.pi.size() != qnet.node_count())
    throw ValidationError("throughput vector does not match the network");
}

}  // namespace

double state_space_size(std::size_t nodes, long long m) {
  // C(m + nodes - 1, m) evaluated in floating point.
  double c = 1.0;
  for (long long k = 1; k <= m; ++k)
    c *= static_cast<double>(nodes - 1 + k) / static_cast<double>(k);
  return c;
}

std::vector<double> normalization_constants(const AbstractQueueNet& qnet,
                                            const Throughputs& pi, long long m) {
  check_inputs(qnet, pi, m);
  std::vector<double> G(static_cast<std::size_t>(m) + 1, 0.0);
  G[0] = 1.0;
  for (std::size_t j = 0; j < qnet.node_count(); ++j)
    G = convolve(G, node_factors(qnet.node(j), pi.pi[j], m));
  return G;
}

std::vector<double> enumerate_normalization_constants(const AbstractQueueNet& qnet,
                                                      const Throughputs& pi,
                                                      long long m) {
  check_inputs(qnet, pi, m);
  const std::size_t nodes = qnet.node_count();
  if (state_space_size(nodes + 1, m) > kOracleStateLimit)
    throw ValidationError("state space too large for literal enumeration");
  std::vector<std::vector<double>> factors(nodes);
  for (std::size_t j = 0; j < nodes; ++j)
    factors[j] = node_factors(qnet.node(j), pi.pi[j], m);

  std::vector<double> G(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<long long> x(nodes, 0);
  // Every state with total population <= m, visited once.
  std::function<void(std::size_t, long long, double)> visit =
      [&](std::size_t j, long long used, double weight) {
        if (j == nodes) {
          G[used] += weight;
          return;
        }
        for (long long k = 0; used + k <= m; ++k) {
          x[j] = k;
          visit(j + 1, used + k, weight * factors[j][k]);
        }
        x[j] = 0;
      };
  visit(0, 0, 1.0);
  return G;
}

PerfReport oracle_metrics(const AbstractQueueNet& qnet, const Throughputs& pi,
                          long long m) {
  check_inputs(qnet, pi, m);
  const std::size_t nodes = qnet.node_count();
  const std::size_t n = qnet.station_count();
  if (state_space_size(nodes, m) > kOracleStateLimit) {
    std::ostringstream os;
    os << "product-form state space C(" << m + static_cast<long long>(nodes) - 1
       << ", " << m << ") exceeds " << kOracleStateLimit << "; use MVA";
    throw ValidationError(os.str());
  }

  const std::size_t len = static_cast<std::size_t>(m) + 1;
  std::vector<std::vector<double>> f(nodes);
  for (std::size_t j = 0; j < nodes; ++j)
    f[j] = node_factors(qnet.node(j), pi.pi[j], m);

  // prefix[j] convolves nodes [0, j), suffix[j] convolves nodes [j, end).
  std::vector<double> unit(len, 0.0);
  unit[0] = 1.0;
  std::vector<std::vector<double>> prefix(nodes + 1, unit), suffix(nodes + 1, unit);
  for (std::size_t j = 0; j < nodes; ++j) prefix[j + 1] = convolve(prefix[j], f[j]);
  for (std::size_t j = nodes; j-- > 0;) suffix[j] = convolve(suffix[j + 1], f[j]);
  const std::vector<double>& G = prefix[nodes];
  if (!(G[m] > 0.0) || !std::isfinite(G[m]))
    throw NumericalError("normalization constant is not a positive finite number");

  const double ratio = m > 0 ? G[m - 1] / G[m] : 0.0;

  PerfReport r;
  r.fleet = m;
  r.queue_length.assign(nodes, 0.0);
  r.wait.assign(nodes, 0.0);
  r.node_throughput.assign(nodes, 0.0);
  for (std::size_t j = 0; j < nodes; ++j) {
    const std::vector<double> others = convolve(prefix[j], suffix[j + 1]);
    double L = 0.0;
    for (long long x = 1; x <= m; ++x) L += x * f[j][x] * others[m - x];
    L /= G[m];
    const double X = pi.pi[j] * ratio;
    r.queue_length[j] = L;
    r.node_throughput[j] = X;
    r.wait[j] = X > 0.0 ? L / X : 0.0;
  }

  r.gamma = relative_utilization(qnet, pi);
  r.availability.resize(n);
  r.throughput.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.throughput[i] = r.node_throughput[i];
    r.availability[i] = checked_availability(r.gamma[i] * ratio, i);
  }
  return r;
}

namespace {

PerfReport snapshot(const AbstractQueueNet& qnet, const Throughputs& pi,
                    long long n_vehicles, const std::vector<double>& L,
                    const std::vector<double>& W) {
  const std::size_t n = qnet.station_count();
  PerfReport r;
  r.fleet = n_vehicles;
  r.queue_length = L;
  r.wait = W;
  r.node_throughput.resize(L.size());
  for (std::size_t j = 0; j < L.size(); ++j)
    r.node_throughput[j] = W[j] > 0.0 ? L[j] / W[j] : 0.0;
  r.gamma = relative_utilization(qnet, pi);
  r.availability.resize(n);
  r.throughput.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.throughput[i] = r.node_throughput[i];
    r.availability[i] = checked_availability(r.throughput[i] / qnet.eff_lambda()[i], i);
  }
  return r;
}

}  // namespace

std::vector<PerfReport> mva_curve(const AbstractQueueNet& qnet,
                                  const Throughputs& pi,
                                  std::span<const long long> fleets) {
  if (!qnet.all_roads_delay())
    throw ValidationError(
        "mva_metrics handles infinite-server roads only; use finite_mva");
  if (!std::is_sorted(fleets.begin(), fleets.end()))
    throw ValidationError("fleet sizes must be sorted");
  const std::size_t nodes = qnet.node_count();
  if (pi.pi.size() != nodes)
    throw ValidationError("throughput vector does not match the network");

  std::vector<PerfReport> out;
  out.reserve(fleets.size());
  std::vector<double> L(nodes, 0.0), W(nodes, 0.0);
  auto fleet = fleets.begin();
  for (; fleet != fleets.end() && *fleet <= 0; ++fleet) {
    if (*fleet < 0) throw ValidationError("fleet size must be nonnegative");
    out.push_back(snapshot(qnet, pi, 0, L, W));
  }
  const long long m = fleets.empty() ? 0 : fleets.back();
  for (long long n = 1; n <= m; ++n) {
    double denom = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const QueueNode& q = qnet.node(j);
      W[j] = q.kind == NodeKind::station ? (1.0 + L[j]) / q.rate : 1.0 / q.rate;
      denom += pi.pi[j] * W[j];
    }
    double total = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      L[j] = static_cast<double>(n) * pi.pi[j] * W[j] / denom;
      total += L[j];
    }
    if (std::abs(total - static_cast<double>(n)) > 1e-9 * static_cast<double>(n)) {
      std::ostringstream os;
      os << "MVA lost vehicles: sum L = " << total << " at n = " << n;
      throw NumericalError(os.str());
    }
    for (; fleet != fleets.end() && *fleet == n; ++fleet)
      out.push_back(snapshot(qnet, pi, n, L, W));
  }
  return out;
}

PerfReport mva_metrics(const AbstractQueueNet& qnet, const Throughputs& pi,
                       long long m) {
  const long long fleets[] = {m};
  return mva_curve(qnet, pi, fleets).front();
}

double utilization_identity_residual(const AbstractQueueNet& qnet,
                                     const Throughputs& pi) {
  const std::size_t n = qnet.station_count();
  const Network& net = qnet.base();
  const RebalancePromotion& promo = qnet.promotion();
  const std::vector<double> g = relative_utilization(qnet, pi);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      rhs += g[j] * (promo.alpha(j, i) * promo.psi[j] + net.P(j, i) * net.lambda[j]);
    }
    const double lhs = (net.lambda[i] + promo.psi[i]) * g[i];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace amod
