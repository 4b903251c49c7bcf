#pragma once

#include <cstddef>
#include <vector>

#include "amod/matrix.hpp"

namespace amod {

/// Snapshot of the fleet at a rebalancing instant.
///   idle(i)            vehicles parked at station i
///   enroute(j, i)      vehicles travelling j -> i (passenger or empty)
///   waiting(i)         customers queued at station i
///   boarding(j, i)     customers at j about to board a vehicle towards i
struct FleetState {
  std::vector<long long> idle;
  IntMatrix enroute;
  std::vector<long long> waiting;
  IntMatrix boarding;
  double time = 0.0;

  std::size_t size() const { return idle.size(); }
  static FleetState empty(std::size_t n);
};

/// Throws ValidationError on negative counts, shape mismatches, or more
/// boarding customers at a station than idle vehicles there.
void validate_fleet_state(const FleetState& s);

struct ExcessTarget {
  /// Owned vehicles minus waiting customers. May be negative.
  std::vector<long long> excess;
  /// Number of vehicles every station should own after rebalancing.
  long long target = 0;
};

/// excess_i = idle_i + sum_j enroute(j, i) + sum_j boarding(j, i) - waiting_i,
/// target = floor((m - sum_i max(waiting_i - idle_i, 0)) / N).
ExcessTarget excess_and_target(const FleetState& state, long long fleet);

/// num(i, j) vehicles to send from i to j this horizon.
struct DispatchOrder {
  IntMatrix num;
  double cost = 0.0;
  /// Largest distance of a relaxed flow value from an integer.
  double integrality_gap = 0.0;
};

/// Minimum-travel-time integer rebalancing that leaves each station owning at
/// least `target` vehicles. Solved as a continuous min-cost flow (a virtual
/// sink absorbs surplus at zero cost); the solution is checked to be integral
/// within 1e-6 and rounded. Throws NumericalError if it is not.
DispatchOrder plan_dispatch(const FleetState& state, long long fleet,
                            const Matrix& travel_time);

/// Same program, starting from precomputed excess/target.
DispatchOrder plan_dispatch(const ExcessTarget& et, const Matrix& travel_time);

/// excess_i + inflow_i - outflow_i for every station.
std::vector<long long> owned_after(const ExcessTarget& et, const DispatchOrder& order);

}  // namespace amod
