#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amod/matrix.hpp"
#include "amod/netmodel.hpp"

namespace amod {

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

/// Parameters that hold for one slice of the day. Rates are per second and
/// travel times in seconds.
struct ProfileSlice {
  std::vector<double> lambda;
  Matrix P;
  Matrix T;
  double speed = 0.0;  // m/s; informational when T is given directly
};

/// Piecewise-constant demand, one slice per `slice_length` seconds, wrapping
/// around after the last slice.
struct DemandProfile {
  std::vector<ProfileSlice> slices;
  double slice_length = 3600.0;
  std::vector<GeoPoint> stations;  // optional
  Matrix distance;                 // optional, metres
  std::vector<std::string> warnings;

  std::size_t station_count() const;
  std::size_t slice_index(double t) const;
  const ProfileSlice& at(double t) const { return slices[slice_index(t)]; }
  Network network(std::size_t slice) const;

  /// Single-slice profile from a time-invariant network.
  static DemandProfile stationary(const Network& net);
};

/// Throws ValidationError unless every slice is a valid Network of the same
/// size.
void validate_profile(const DemandProfile& profile);

enum class CustomerMode { loss, queue };
enum class TravelModel { exponential, deterministic };
enum class Policy { none, realtime };

struct SimConfig {
  double dt = 2.0;
  double horizon = 900.0;
  double duration = 86400.0;
  CustomerMode mode = CustomerMode::queue;
  TravelModel travel = TravelModel::deterministic;
  std::uint64_t seed = 1;
  /// Spacing of the per-station queue/idle time series; 0 disables it.
  double sample_interval = 60.0;
  DemandProfile profile;
};

/// Throws ValidationError unless dt > 0 and horizon, duration and
/// sample_interval are whole multiples of dt.
void validate_config(const SimConfig& cfg);

struct CustomerRecord {
  double arrival = 0.0;
  std::uint32_t origin = 0;
  std::uint32_t destination = 0;
  std::optional<double> board;  // unset when lost or still waiting at the end
  bool lost = false;
};

struct Move {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  long long count = 0;
};

struct DispatchRecord {
  double time = 0.0;
  std::vector<Move> ordered;
  std::vector<Move> sent;
  long long shortfall = 0;  // ordered vehicles that were not idle
  double cost = 0.0;
};

struct StationSample {
  double time = 0.0;
  std::vector<long long> waiting;
  std::vector<long long> idle;
  long long enroute = 0;
};

struct SimTrace {
  std::vector<CustomerRecord> customers;
  std::vector<DispatchRecord> dispatches;
  std::vector<StationSample> samples;
};

struct StationStats {
  long long arrivals = 0;
  long long served = 0;
  long long lost = 0;
  long long unserved = 0;  // still waiting when the run ended
  std::optional<double> loss_fraction;
  std::optional<double> mean_wait;
};

struct SimSummary {
  long long fleet = 0;
  CustomerMode mode = CustomerMode::queue;
  Policy policy = Policy::none;
  std::uint64_t seed = 0;
  double duration = 0.0;
  long long arrivals = 0;
  long long served = 0;
  long long lost = 0;
  long long unserved = 0;
  long long rebalancing_trips = 0;
  std::optional<double> mean_wait;
  std::optional<double> p50_wait;
  std::optional<double> p95_wait;
  std::optional<double> max_wait;
  std::vector<StationStats> stations;
  /// Mean wait of customers boarded, by the hour of their arrival.
  std::vector<std::optional<double>> hourly_mean_wait;
};

struct SimResult {
  SimTrace trace;
  SimSummary summary;
};

/// Runs the fleet for cfg.duration seconds with `fleet` vehicles spread evenly
/// over the stations (remainder to the lowest indices). Single-threaded and
/// fully determined by cfg.seed.
SimResult run(const SimConfig& cfg, long long fleet, Policy policy);

/// served / arrivals per station; nullopt for a station that saw no arrivals.
std::vector<std::optional<double>> availability_from_trace(const SimTrace& trace,
                                                           std::size_t stations);

}  // namespace amod
