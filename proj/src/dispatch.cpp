#include "amod/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amod/errors.hpp"
#include "amod/rebalance.hpp"

namespace amod {

FleetState FleetState::empty(std::size_t n) {
  FleetState s;
  s.idle.assign(n, 0);
  s.enroute = IntMatrix(n, n, 0);
  s.waiting.assign(n, 0);
  s.boarding = IntMatrix(n, n, 0);
  return s;
}

void validate_fleet_state(const FleetState& s) {
  const std::size_t n = s.size();
  if (n < 2) throw ValidationError("fleet state needs at least two stations");
  if (s.waiting.size() != n || s.enroute.rows() != n || s.enroute.cols() != n ||
      s.boarding.rows() != n || s.boarding.cols() != n)
    throw ValidationError("fleet state arrays disagree on the station count");
  for (std::size_t i = 0; i < n; ++i) {
    if (s.idle[i] < 0 || s.waiting[i] < 0)
      throw ValidationError("fleet state counts must be nonnegative");
    long long boarding = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (s.enroute(i, j) < 0 || s.boarding(i, j) < 0)
        throw ValidationError("fleet state counts must be nonnegative");
      boarding += s.boarding(i, j);
    }
    if (boarding > s.idle[i]) {
      std::ostringstream os;
      os << "station " << i << " has " << boarding << " boarding customers but "
         << s.idle[i] << " idle vehicles";
      throw ValidationError(os.str());
    }
  }
}

ExcessTarget excess_and_target(const FleetState& state, long long fleet) {
  validate_fleet_state(state);
  const std::size_t n = state.size();
  ExcessTarget et;
  et.excess.assign(n, 0);
  long long unmet = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long long owned = state.idle[i];
    for (std::size_t j = 0; j < n; ++j) owned += state.enroute(j, i) + state.boarding(j, i);
    et.excess[i] = owned - state.waiting[i];
    unmet += std::max(state.waiting[i] - state.idle[i], 0LL);
  }
  const long long available = fleet - unmet;
  const long long nn = static_cast<long long>(n);
  // Floor division that also works for a negative numerator.
  et.target = available >= 0 ? available / nn : -((-available + nn - 1) / nn);
  return et;
}

DispatchOrder plan_dispatch(const ExcessTarget& et, const Matrix& travel_time) {
  const std::size_t n = et.excess.size();
  if (travel_time.rows() != n || travel_time.cols() != n)
    throw ValidationError("travel time matrix does not match the fleet state");

  // Node n is the virtual sink taking surplus that need not move.
  FlowProblem prob;
  prob.costs = Matrix(n + 1, n + 1, kNoArc);
  prob.supply.assign(n + 1, 0.0);
  long long surplus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) prob.costs(i, j) = travel_time(i, j);
    prob.costs(i, n) = 0.0;
    const long long s = et.excess[i] - et.target;
    prob.supply[i] = static_cast<double>(s);
    surplus += s;
  }
  if (surplus < 0) {
    std::ostringstream os;
    os << "dispatch infeasible: stations lack " << -surplus << " vehicles";
    throw NumericalError(os.str());
  }
  prob.supply[n] = -static_cast<double>(surplus);

  const FlowSolution sol = solve_min_cost_flow(prob);

  DispatchOrder order;
  order.num = IntMatrix(n, n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double x = sol.flow(i, j);
      const double r = std::round(x);
      order.integrality_gap = std::max(order.integrality_gap, std::abs(x - r));
      order.num(i, j) = static_cast<long long>(r);
      order.cost += travel_time(i, j) * r;
    }
  if (order.integrality_gap > 1e-6) {
    std::ostringstream os;
    os << "relaxed dispatch solution is fractional (gap " << order.integrality_gap
       << ")";
    throw NumericalError(os.str());
  }
  return order;
}

DispatchOrder plan_dispatch(const FleetState& state, long long fleet,
                            const Matrix& travel_time) {
  return plan_dispatch(excess_and_target(state, fleet), travel_time);
}

std::vector<long long> owned_after(const ExcessTarget& et, const DispatchOrder& order) {
  const std::size_t n = et.excess.size();
  std::vector<long long> out = et.excess;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out[j] += order.num(i, j);
      out[i] -= order.num(i, j);
    }
  return out;
}

}  // namespace amod
