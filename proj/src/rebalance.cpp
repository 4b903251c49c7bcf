#include "amod/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "amod/errors.hpp"
#include "amod/jackson.hpp"

namespace amod {

namespace {

constexpr double kSupplySnap = 1e-12;
constexpr double kBalanceTolerance = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ArcKind : unsigned char { none, source, forward, cancel, sink };

}  // namespace

FlowSolution solve_min_cost_flow(const FlowProblem& prob) {
  const std::size_t n = prob.supply.size();
  if (prob.costs.rows() != n || prob.costs.cols() != n)
    throw ValidationError("cost matrix does not match supply vector");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !(prob.costs(i, j) >= 0.0))
        throw ValidationError("arc costs must be nonnegative");

  double scale = 1.0, total = 0.0;
  for (double b : prob.supply) {
    if (!std::isfinite(b)) throw ValidationError("supply must be finite");
    scale = std::max(scale, std::abs(b));
    total += b;
  }
  if (std::abs(total) > kBalanceTolerance) {
    std::ostringstream os;
    os << "unbalanced supplies: sum = " << total;
    throw ValidationError(os.str());
  }
  const double eps = kSupplySnap * scale;

  std::vector<double> excess(n, 0.0), deficit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = std::abs(prob.supply[i]) < kSupplySnap ? 0.0 : prob.supply[i];
    if (b > 0.0) excess[i] = b;
    if (b < 0.0) deficit[i] = -b;
  }

  FlowSolution sol;
  sol.flow = Matrix(n, n, 0.0);
  // Nodes 0..n-1 are real; n is the super source, n+1 the super sink.
  const std::size_t src = n, snk = n + 1, V = n + 2;
  std::vector<double> u(V, 0.0), dist(V);
  std::vector<std::size_t> pred(V);
  std::vector<ArcKind> via(V);
  std::vector<char> done(V);

  const std::size_t max_augmentations = 100 * V * V + 100;
  auto remaining = [&](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
  };

  while (remaining(excess) > eps && remaining(deficit) > eps) {
    if (sol.augmentations >= max_augmentations)
      throw NumericalError("min-cost flow exceeded its augmentation budget");

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(via.begin(), via.end(), ArcKind::none);
    dist[src] = 0.0;

    auto relax = [&](std::size_t from, std::size_t to, double cost, ArcKind kind) {
      const double reduced = std::max(0.0, cost + u[from] - u[to]);
      const double cand = dist[from] + reduced;
      if (cand < dist[to]) {
        dist[to] = cand;
        pred[to] = from;
        via[to] = kind;
      }
    };

    for (;;) {
      std::size_t best = V;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (best == V || dist[v] < dist[best]))
          best = v;
      if (best == V) break;
      done[best] = 1;
      if (best == snk) continue;
      if (best == src) {
        for (std::size_t i = 0; i < n; ++i)
          if (excess[i] > eps && !done[i]) relax(src, i, 0.0, ArcKind::source);
        continue;
      }
      const std::size_t i = best;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || done[j]) continue;
        if (sol.flow(j, i) > eps)
          relax(i, j, -prob.costs(j, i), ArcKind::cancel);
        else if (prob.costs(i, j) < kInf)
          relax(i, j, prob.costs(i, j), ArcKind::forward);
      }
      if (deficit[i] > eps && !done[snk]) relax(i, snk, 0.0, ArcKind::sink);
    }

    if (!(dist[snk] < kInf))
      throw NumericalError("min-cost flow: remaining demand is unreachable");
    for (std::size_t v = 0; v < V; ++v) u[v] += std::min(dist[v], dist[snk]);

    // Bottleneck along the path, then push.
    const std::size_t last = pred[snk];
    double delta = deficit[last];
    std::size_t first = last;
    for (std::size_t v = last; via[v] != ArcKind::source; v = pred[v]) {
      if (via[v] == ArcKind::cancel) delta = std::min(delta, sol.flow(v, pred[v]));
      first = pred[v];
    }
    delta = std::min(delta, excess[first]);

    for (std::size_t v = last; via[v] != ArcKind::source; v = pred[v]) {
      const std::size_t p = pred[v];
      if (via[v] == ArcKind::cancel) {
        double& f = sol.flow(v, p);
        f -= delta;
        if (f < eps) f = 0.0;
      } else {
        sol.flow(p, v) += delta;
      }
    }
    excess[first] -= delta;
    if (excess[first] < eps) excess[first] = 0.0;
    deficit[last] -= delta;
    if (deficit[last] < eps) deficit[last] = 0.0;
    ++sol.augmentations;
  }

  sol.cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && sol.flow(i, j) > 0.0) sol.cost += prob.costs(i, j) * sol.flow(i, j);
  sol.potentials.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n));
  return sol;
}

double optimality_gap(const FlowProblem& prob, const FlowSolution& sol) {
  const std::size_t n = prob.supply.size();
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !(prob.costs(i, j) < kInf)) continue;
      const double reduced =
          prob.costs(i, j) + sol.potentials[i] - sol.potentials[j];
      gap = std::max(gap, -reduced);
      if (sol.flow(i, j) > 0.0) gap = std::max(gap, std::abs(reduced));
    }
  return gap;
}

double conservation_residual(const FlowProblem& prob, const Matrix& flow) {
  const std::size_t n = prob.supply.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double net = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) net += flow(i, j) - flow(j, i);
    worst = std::max(worst, std::abs(net - prob.supply[i]));
  }
  return worst;
}

FlowProblem rebalancing_flow_problem(const Network& net) {
  validate_network(net);
  const std::size_t n = net.size();
  FlowProblem prob;
  prob.costs = net.T;
  prob.supply.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prob.costs(i, i) = 0.0;
    double in = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) in += net.P(j, i) * net.lambda[j];
    prob.supply[i] = -net.lambda[i] + in;
  }
  return prob;
}

RebalancePlan plan_from_flow(const Network& net, const Matrix& beta) {
  const std::size_t n = net.size();
  if (beta.rows() != n || beta.cols() != n)
    throw ValidationError("beta must be N x N");
  RebalancePlan plan;
  plan.beta = beta;
  plan.promotion.psi.assign(n, 0.0);
  plan.promotion.alpha = Matrix(n, n, 0.0);
  plan.cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    plan.beta(i, i) = 0.0;
    double psi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (beta(i, j) < 0.0) throw ValidationError("beta must be nonnegative");
      psi += beta(i, j);
      plan.cost += net.T(i, j) * beta(i, j);
    }
    plan.promotion.psi[i] = psi;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      plan.promotion.alpha(i, j) =
          psi > 0.0 ? beta(i, j) / psi : 1.0 / static_cast<double>(n - 1);
    }
  }
  return plan;
}

RebalancePlan optimal_rebalance(const Network& net) {
  const FlowProblem prob = rebalancing_flow_problem(net);
  const FlowSolution sol = solve_min_cost_flow(prob);
  return plan_from_flow(net, sol.flow);
}

BalanceCheck verify_balance(const Network& net, const RebalancePlan& plan) {
  const AbstractQueueNet qnet = build_abstract_net(net, plan.promotion);
  const Throughputs pi = solve_throughputs(qnet);
  BalanceCheck out;
  out.gamma = relative_utilization(qnet, pi);
  const auto [lo, hi] = std::minmax_element(out.gamma.begin(), out.gamma.end());
  out.spread = (*hi - *lo) / *hi;
  return out;
}

}  // namespace amod
