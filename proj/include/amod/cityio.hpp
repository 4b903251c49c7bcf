#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amod/matrix.hpp"
#include "amod/sim.hpp"

namespace amod {

/// Times are seconds since the Unix epoch, UTC.
struct TripRecord {
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  GeoPoint pickup;
  GeoPoint dropoff;
};

struct BoundingBox {
  double lon_min = -180.0;
  double lon_max = 180.0;
  double lat_min = -90.0;
  double lat_max = 90.0;
  bool contains(const GeoPoint& p) const {
    return p.lon >= lon_min && p.lon <= lon_max && p.lat >= lat_min && p.lat <= lat_max;
  }
};

inline constexpr const char* kTripHeader =
    "pickup_datetime,dropoff_datetime,pickup_lon,pickup_lat,dropoff_lon,dropoff_lat";

/// RFC 3339 date-time ("2012-03-01T08:15:00Z", "...T08:15:00.25-05:00").
/// Throws ValidationError on anything else.
double parse_rfc3339(const std::string& s);
/// UTC with millisecond precision, trailing zeros kept.
std::string format_rfc3339(double epoch_seconds);

/// Reads a trip CSV. Every malformed row is an error naming its line.
std::vector<TripRecord> parse_trips(std::istream& in, const BoundingBox& box = {});
std::vector<TripRecord> read_trips(const std::string& path, const BoundingBox& box = {});
void write_trips(std::ostream& out, const std::vector<TripRecord>& trips);

/// Locally flat metric projection (metres) around an origin.
class Projection {
 public:
  explicit Projection(GeoPoint origin);
  static Projection around(const std::vector<GeoPoint>& points);
  void forward(const GeoPoint& p, double& x, double& y) const;
  GeoPoint inverse(double x, double y) const;
  double manhattan(const GeoPoint& a, const GeoPoint& b) const;
  double euclidean(const GeoPoint& a, const GeoPoint& b) const;
  GeoPoint origin() const { return origin_; }

 private:
  GeoPoint origin_;
  double kx_;
  double ky_;
};

struct StationClustering {
  std::vector<GeoPoint> centroids;
  std::vector<std::uint32_t> pickup_station;   // per trip
  std::vector<std::uint32_t> dropoff_station;  // per trip
  double mean_walk_m = 0.0;
  double p95_walk_m = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kMaxKmeansIterations = 300;
inline constexpr std::size_t kKmeansRestarts = 10;

/// k-means++ then Lloyd on pickups and dropoffs pooled with equal weight,
/// restarted kKmeansRestarts times from one seeded stream.
StationClustering cluster_stations(const std::vector<TripRecord>& trips, std::size_t n,
                                   std::uint64_t seed);

struct EstimateOptions {
  double kappa = 1.0;
  double lambda_floor_per_hour = 0.1;
  /// Days the data covers; 0 counts distinct UTC pickup dates.
  std::size_t days = 0;
};

/// Hourly profile (24 slices, UTC hours). Trips whose endpoints map to the
/// same station are left out of rates and routing.
DemandProfile estimate_profile(const std::vector<TripRecord>& trips,
                               const StationClustering& clustering,
                               const EstimateOptions& opts = {});

struct SynthSpec {
  std::vector<GeoPoint> centers;
  double sigma_m = 150.0;
  /// Pickups per hour at each station before the hourly weight.
  std::vector<double> rate_per_hour;
  std::vector<double> hourly_weight = std::vector<double>(24, 1.0);
  std::optional<Matrix> P;  // drawn from a flat Dirichlet when absent
  double speed = 8.0;       // m/s, Manhattan distance over duration
  double start = 1330560000.0;  // 2012-03-01T00:00:00Z
  std::size_t days = 1;
};

struct SynthTruth {
  std::vector<std::vector<double>> lambda;  // [hour][station], per second
  Matrix P;
  double speed = 0.0;
};

struct SynthCity {
  std::vector<TripRecord> trips;  // sorted by pickup time
  SynthTruth truth;
};

void validate_synth_spec(const SynthSpec& spec);
SynthCity generate_synthetic_city(const SynthSpec& spec, std::uint64_t seed);

}  // namespace amod
