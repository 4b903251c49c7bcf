#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "amod/matrix.hpp"

namespace amod {

/// Optional station metadata. Carried through I/O untouched.
struct StationInfo {
  std::string name;
  std::optional<double> lon;
  std::optional<double> lat;
};

/// Physical mobility-on-demand model: N stations, Poisson customer arrivals
/// at rate lambda[i], destination choice P(i, j) and mean travel time T(i, j).
/// All rates and times share one time unit chosen by the caller.
struct Network {
  std::vector<double> lambda;
  Matrix P;
  Matrix T;
  std::vector<StationInfo> stations;

  std::size_t size() const { return lambda.size(); }
};

/// Rebalancing-promoting policy: each station emits virtual passengers at
/// rate psi[i] who pick destination j with probability alpha(i, j).
struct RebalancePromotion {
  std::vector<double> psi;
  Matrix alpha;
};

inline constexpr double kStochasticTolerance = 1e-9;

/// Throws ValidationError unless lambda > 0, T > 0 off the diagonal and P is
/// an irreducible stochastic matrix with zero diagonal.
void validate_network(const Network& net);

/// Throws ValidationError unless psi >= 0 and alpha is stochastic with a zero
/// diagonal. `n` is the station count the promotion must match.
void validate_promotion(const RebalancePromotion& promo, std::size_t n);

/// True iff the directed graph of strictly positive entries of `P` is
/// strongly connected.
bool is_irreducible(const Matrix& P);

/// Uniform off-diagonal routing, used wherever a row carries no mass.
Matrix uniform_routing(std::size_t n);

enum class NodeKind { station, road };

struct QueueNode {
  NodeKind kind = NodeKind::station;
  std::size_t parent = 0;  // origin station (the station itself for stations)
  std::size_t child = 0;   // destination station
  double rate = 0.0;       // per-server service rate
  /// Server count; nullopt means an infinite-server (delay) node.
  std::optional<long long> servers = 1;

  bool is_delay() const { return !servers.has_value(); }

  /// Service rate with `n` vehicles present.
  double service_rate(long long n) const;
};

/// Index of the road node carrying vehicles from station `i` to station `j`
/// in a network with `n` stations: n + i*(n-1) + j, minus one when j > i.
std::size_t road_node_index(std::size_t n, std::size_t i, std::size_t j);

/// Closed Jackson network seen by the vehicles. Station i is node i; road
/// (i -> j) is node road_node_index(N, i, j). The routing matrix has N^4
/// entries, so it is exposed through `routing()` instead of being stored.
class AbstractQueueNet {
 public:
  std::size_t station_count() const { return base_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<QueueNode>& nodes() const { return nodes_; }
  const QueueNode& node(std::size_t k) const { return nodes_[k]; }

  std::size_t road_index(std::size_t i, std::size_t j) const {
    return road_node_index(station_count(), i, j);
  }

  /// Routing probability between two nodes.
  double routing(std::size_t from, std::size_t to) const;

  /// Combined real + virtual arrival rate at each station.
  const std::vector<double>& eff_lambda() const { return eff_lambda_; }
  /// Destination probabilities of a generalized (real or virtual) passenger.
  const Matrix& eff_P() const { return eff_P_; }
  /// Fraction of generalized passengers at each station that are virtual.
  const std::vector<double>& virtual_fraction() const { return virtual_fraction_; }

  const Network& base() const { return base_; }
  const RebalancePromotion& promotion() const { return promo_; }
  bool has_promotion() const { return has_promo_; }

  /// True when every road node is an infinite-server node.
  bool all_roads_delay() const;

  /// Copy with road (i -> j) given `servers(i, j)` servers. Entries < 1 are
  /// rejected.
  AbstractQueueNet with_road_servers(const IntMatrix& servers) const;

  friend AbstractQueueNet build_abstract_net(
      const Network& net, const std::optional<RebalancePromotion>& promo);

 private:
  AbstractQueueNet() = default;

  Network base_;
  RebalancePromotion promo_;
  bool has_promo_ = false;
  std::vector<double> eff_lambda_;
  Matrix eff_P_;
  std::vector<double> virtual_fraction_;
  std::vector<QueueNode> nodes_;
};

/// Builds the abstract network, folding the promotion into generalized
/// arrival rates and routing. Validates both inputs.
AbstractQueueNet build_abstract_net(
    const Network& net,
    const std::optional<RebalancePromotion>& promo = std::nullopt);

}  // namespace amod
