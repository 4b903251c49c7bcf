#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "amod/matrix.hpp"
#include "amod/netmodel.hpp"

namespace amod {

inline constexpr double kNoArc = std::numeric_limits<double>::infinity();

/// Uncapacitated minimum-cost flow on a dense digraph. costs(i, j) >= 0 is the
/// unit cost of arc i -> j, kNoArc when the arc is absent; the diagonal is
/// ignored. supply[i] is the required net outflow of node i (negative for a
/// sink) and must sum to zero.
struct FlowProblem {
  Matrix costs;
  std::vector<double> supply;
};

struct FlowSolution {
  Matrix flow;
  double cost = 0.0;
  /// Node potentials u with costs(i, j) + u_i - u_j >= 0 on every arc and
  /// equality wherever flow(i, j) > 0.
  std::vector<double> potentials;
  std::size_t augmentations = 0;
};

/// Successive shortest augmenting paths with node potentials (Dijkstra on
/// reduced costs, ties to the lowest node index). Supplies with magnitude
/// below 1e-12 are treated as zero. Throws ValidationError when
/// |sum(supply)| > 1e-9 or a cost is negative.
FlowSolution solve_min_cost_flow(const FlowProblem& prob);

/// Largest complementary-slackness violation of `sol` (reduced cost below
/// zero on an arc, or nonzero reduced cost on an arc that carries flow).
double optimality_gap(const FlowProblem& prob, const FlowSolution& sol);

/// Largest |sum_j flow(i, j) - flow(j, i) - supply[i]|.
double conservation_residual(const FlowProblem& prob, const Matrix& flow);

/// costs = T, supply b_i = -lambda_i + sum_j p_ji lambda_j.
FlowProblem rebalancing_flow_problem(const Network& net);

/// Optimal open-loop rebalancing policy. beta(i, j) is the rate of empty
/// vehicles sent from i to j; `cost` is sum T_ij beta_ij, the expected number
/// of rebalancing vehicles on the road.
struct RebalancePlan {
  Matrix beta;
  double cost = 0.0;
  RebalancePromotion promotion;
};

/// psi_i = sum_j beta_ij, alpha_ij = beta_ij / psi_i, or the uniform row when
/// station i sends nothing.
RebalancePlan plan_from_flow(const Network& net, const Matrix& beta);

/// Solves the rebalancing flow problem for `net` and converts it to a plan.
RebalancePlan optimal_rebalance(const Network& net);

struct BalanceCheck {
  /// pi_i / (lambda_i + psi_i) with station throughputs scaled to max 1.
  std::vector<double> gamma;
  /// (max gamma - min gamma) / max gamma.
  double spread = 0.0;
};

/// Builds the promoted network and measures how far apart the station
/// utilizations are. Zero for a plan that balances the fleet.
BalanceCheck verify_balance(const Network& net, const RebalancePlan& plan);

}  // namespace amod
