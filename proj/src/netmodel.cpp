#include "amod/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amod/errors.hpp"

namespace amod {

namespace {

void check_stochastic_rows(const Matrix& M, std::size_t n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << M.rows() << "x"
       << M.cols();
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = M(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << name << "(" << i << "," << j << ") = " << v
           << " is not a probability";
        throw ValidationError(os.str());
      }
      sum += v;
    }
    if (M(i, i) != 0.0) {
      std::ostringstream os;
      os << name << " has nonzero diagonal at station " << i;
      throw ValidationError(os.str());
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream os;
      os << "non-stochastic routing row: " << name << " row " << i
         << " sums to " << sum;
      throw ValidationError(os.str());
    }
  }
}

// Breadth-first reachability from node 0 along positive entries of M
// (or of its transpose).
bool reaches_all(const Matrix& M, bool transpose) {
  const std::size_t n = M.rows();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = transpose ? M(v, u) : M(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace

bool is_irreducible(const Matrix& P) {
  if (P.rows() == 0 || P.rows() != P.cols()) return false;
  return reaches_all(P, false) && reaches_all(P, true);
}

Matrix uniform_routing(std::size_t n) {
  Matrix U(n, n, 0.0);
  if (n < 2) return U;
  const double p = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) U(i, j) = p;
  return U;
}

void validate_network(const Network& net) {
  const std::size_t n = net.size();
  if (n < 2) throw ValidationError("network needs at least two stations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(net.lambda[i] > 0.0) || !std::isfinite(net.lambda[i])) {
      std::ostringstream os;
      os << "lambda[" << i << "] = " << net.lambda[i] << " must be positive";
      throw ValidationError(os.str());
    }
  }
  check_stochastic_rows(net.P, n, "P");
  if (net.T.rows() != n || net.T.cols() != n)
    throw ValidationError("T must be N x N");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !(net.T(i, j) > 0.0 && std::isfinite(net.T(i, j)))) {
        std::ostringstream os;
        os << "T(" << i << "," << j << ") = " << net.T(i, j)
           << " must be positive";
        throw ValidationError(os.str());
      }
  if (!is_irreducible(net.P))
    throw ValidationError("routing matrix P is not irreducible");
  if (!net.stations.empty() && net.stations.size() != n)
    throw ValidationError("station metadata count does not match lambda");
}

void validate_promotion(const RebalancePromotion& promo, std::size_t n) {
  if (promo.psi.size() != n)
    throw ValidationError("psi length does not match station count");
  for (std::size_t i = 0; i < n; ++i)
    if (!(promo.psi[i] >= 0.0) || !std::isfinite(promo.psi[i]))
      throw ValidationError("psi must be nonnegative");
  check_stochastic_rows(promo.alpha, n, "alpha");
}

double QueueNode::service_rate(long long n) const {
  if (n <= 0) return 0.0;
  if (!servers) return static_cast<double>(n) * rate;
  return static_cast<double>(std::min(n, *servers)) * rate;
}

std::size_t road_node_index(std::size_t n, std::size_t i, std::size_t j) {
  return n + i * (n - 1) + (j > i ? j - 1 : j);
}

double AbstractQueueNet::routing(std::size_t from, std::size_t to) const {
  const QueueNode& a = nodes_[from];
  const QueueNode& b = nodes_[to];
  if (a.kind == NodeKind::station && b.kind == NodeKind::road)
    return b.parent == from ? eff_P_(from, b.child) : 0.0;
  if (a.kind == NodeKind::road && b.kind == NodeKind::station)
    return a.child == to ? 1.0 : 0.0;
  return 0.0;
}

bool AbstractQueueNet::all_roads_delay() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const QueueNode& q) {
    return q.kind == NodeKind::station || q.is_delay();
  });
}

AbstractQueueNet AbstractQueueNet::with_road_servers(
    const IntMatrix& servers) const {
  const std::size_t n = station_count();
  if (servers.rows() != n || servers.cols() != n)
    throw ValidationError("server matrix must be N x N");
  AbstractQueueNet out = *this;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (servers(i, j) < 1)
        throw ValidationError("road server counts must be at least 1");
      out.nodes_[road_node_index(n, i, j)].servers = servers(i, j);
    }
  return out;
}

AbstractQueueNet build_abstract_net(
    const Network& net, const std::optional<RebalancePromotion>& promo) {
  validate_network(net);
  const std::size_t n = net.size();
  if (promo) validate_promotion(*promo, n);

  AbstractQueueNet q;
  q.base_ = net;
  q.has_promo_ = promo.has_value();
  q.promo_ = promo ? *promo
                   : RebalancePromotion{std::vector<double>(n, 0.0),
                                        uniform_routing(n)};

  q.eff_lambda_.resize(n);
  q.virtual_fraction_.resize(n);
  q.eff_P_ = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = q.promo_.psi[i];
    const double lt = net.lambda[i] + psi;
    const double pv = psi / lt;
    q.eff_lambda_[i] = lt;
    q.virtual_fraction_[i] = pv;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      q.eff_P_(i, j) = promo ? q.promo_.alpha(i, j) * pv + net.P(i, j) * (1.0 - pv)
                             : net.P(i, j);
    }
  }

  q.nodes_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    QueueNode& s = q.nodes_[i];
    s.kind = NodeKind::station;
    s.parent = s.child = i;
    s.rate = q.eff_lambda_[i];
    s.servers = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      QueueNode& r = q.nodes_[road_node_index(n, i, j)];
      r.kind = NodeKind::road;
      r.parent = i;
      r.child = j;
      r.rate = 1.0 / net.T(i, j);
      r.servers = std::nullopt;
    }
  }
  return q;
}

}  // namespace amod
