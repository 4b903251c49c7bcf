#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "amod/jackson.hpp"
#include "amod/matrix.hpp"
#include "amod/netmodel.hpp"

namespace amod {

/// Directed physical road segment between two stations.
struct RoadSegment {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;     // vehicles that fit before queueing starts
  double travel_time = 0.0;  // free-flow seconds
};

using RoadPath = std::vector<std::size_t>;  // segment indices, in order

/// Physical road network plus, for every ordered station pair, the set of
/// paths its vehicles are spread over uniformly.
class RoadGraph {
 public:
  /// Enumerates every minimum-travel-time path for each ordered pair. Throws
  /// ValidationError("disconnected road graph") if some pair has no path.
  RoadGraph(std::size_t stations, std::vector<RoadSegment> segments);
  /// Uses caller-supplied paths, indexed [i * stations + j].
  RoadGraph(std::size_t stations, std::vector<RoadSegment> segments,
            std::vector<std::vector<RoadPath>> paths);

  std::size_t station_count() const { return stations_; }
  const std::vector<RoadSegment>& segments() const { return segments_; }
  const std::vector<RoadPath>& paths(std::size_t i, std::size_t j) const {
    return paths_[i * stations_ + j];
  }

  /// Fraction of i -> j trips that use segment c: paths through c / paths.
  double share(std::size_t i, std::size_t j, std::size_t c) const;

  /// Free-flow travel time of the (first) i -> j path.
  Matrix travel_times() const;
  /// Segment count of the (first) i -> j path.
  Matrix path_lengths() const;

 private:
  void validate();

  std::size_t stations_;
  std::vector<RoadSegment> segments_;
  std::vector<std::vector<RoadPath>> paths_;
  std::vector<std::vector<std::vector<std::size_t>>> uses_;  // [pair][c] -> count
};

/// Square-lattice city with two-way segments between grid neighbours.
struct GridSpec {
  std::size_t rows = 3;
  std::size_t cols = 3;
  double segment_km = 0.5;
  double critical_density_per_km = 80.0;
  double speed_kmh = 30.0;
};

/// Stations at the lattice points, numbered row-major; paths are all
/// monotone (shortest) lattice paths.
RoadGraph make_grid(const GridSpec& spec);

struct VirtualCapacities {
  IntMatrix servers;  // m_ij, floored
  Matrix raw;         // before flooring
  /// Pairs that carry traffic but floored to zero servers; raised to 1.
  std::vector<std::pair<std::size_t, std::size_t>> raised;
  /// max_c (sum_ij m_ij a^c_ij) / q_c with integer m_ij; <= 1 means no
  /// segment is oversubscribed.
  double worst_segment_load = 0.0;
};

/// Road throughput matrix pi(i, j) from a full throughput vector.
Matrix road_throughputs(const AbstractQueueNet& qnet, const Throughputs& pi);

/// m_ij = sum_{b in B_ij} min_{c in b} q_c a^c_ij pi_ij / sum_kl a^c_kl pi_kl,
/// floored. Pairs with zero throughput get zero servers.
VirtualCapacities virtual_capacities(const RoadGraph& graph, const Matrix& road_pi);

/// Server matrix for `AbstractQueueNet::with_road_servers`: m_ij, at least 1.
IntMatrix server_matrix(const VirtualCapacities& caps);

/// Exact mean value analysis with multi-server roads (marginal-probability
/// correction). Infinite-server roads behave exactly as in mva_metrics.
PerfReport finite_mva(const AbstractQueueNet& qnet, const Throughputs& pi,
                      long long m);

/// Per-segment loads for one system with and without rebalancing,
/// assuming full availability.
struct CongestionReport {
  std::vector<double> passenger_load;
  std::vector<double> rebalancing_load;
  std::vector<double> utilization_before;
  std::vector<double> utilization_after;
  double passenger_vehicles = 0.0;    // sum_ij L_ij
  double rebalancing_vehicles = 0.0;  // sum_ij L^reb_ij
  double reb_ratio = 0.0;
  double avg_util_increase = 0.0;  // relative increase of mean utilization
  /// Relative increase on the segment most utilized before rebalancing
  /// (lowest index on ties).
  double max_util_increase = 0.0;
  std::size_t most_congested = 0;
};

/// L_ij = lambda_i p_ij T_ij and L^reb_ij = beta_ij T_ij spread uniformly over
/// the pair's paths. Throws NumericalError when load accounting fails.
CongestionReport evaluate_congestion(const RoadGraph& graph, const Network& net,
                                     const Matrix& beta);

/// Same optimal rebalancing flow rewritten as trips between neighbouring
/// stations: beta_ij is spread over the pair's paths and every segment c of
/// a path becomes a trip from c.from to c.to. Requires each segment's travel
/// time to equal T between its endpoints, so the cost is unchanged.
Matrix hop_rebalancing(const RoadGraph& graph, const Network& net, const Matrix& beta);

struct StudyConfig {
  GridSpec grid;
  std::size_t systems = 500;
  std::uint64_t seed = 1;
  double lambda_min = 1.0 / 60.0;  // customers per second
  double lambda_max = 10.0 / 60.0;
  std::size_t max_attempts = 100000;
};

struct StudySystem {
  std::uint64_t seed = 0;
  CongestionReport report;
};

struct StudyResult {
  std::vector<StudySystem> systems;
  std::size_t resampled = 0;  // unstable draws that were rejected
  double slope = 0.0;         // linear fit of avg increase on reb ratio
  double intercept = 0.0;
  double r_squared = 0.0;
  double zero_max_fraction = 0.0;
  double max_of_max_increase = 0.0;
  /// R^2 of the same fit using the solver's flow as returned, without the
  /// hop rewrite. Diagnostic only.
  double direct_r_squared = 0.0;
};

/// Random system: lambda_i ~ U[lambda_min, lambda_max], rows of P from a flat
/// Dirichlet over the other stations. Fully determined by `seed`.
Network random_grid_system(const RoadGraph& graph, const StudyConfig& cfg,
                           std::uint64_t seed);

/// Ensemble of random systems with optimal rebalancing in hop form. Systems
/// with any segment at or above capacity before rebalancing are redrawn.
StudyResult congestion_study(const StudyConfig& cfg);

}  // namespace amod
