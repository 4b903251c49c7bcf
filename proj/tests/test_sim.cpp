#include <gtest/gtest.h>

#include <random>

#include "amod/errors.hpp"
#include "amod/sim.hpp"
#include "support.hpp"

using namespace amod;

namespace {

SimConfig pair_config(CustomerMode mode, double duration) {
  SimConfig cfg;
  cfg.mode = mode;
  cfg.travel = TravelModel::exponential;
  cfg.duration = duration;
  cfg.horizon = 600.0;
  cfg.sample_interval = 0.0;
  cfg.seed = 3;
  cfg.profile = DemandProfile::stationary(testing_support::symmetric_pair(1.0 / 60.0, 60.0));
  return cfg;
}

Network three_station() {
  Network net;
  net.lambda = {1.0 / 30, 1.0 / 60, 1.0 / 45};
  net.P = Matrix{{0, 0.7, 0.3}, {0.5, 0, 0.5}, {0.8, 0.2, 0}};
  net.T = Matrix{{0, 300, 420}, {300, 0, 240}, {420, 240, 0}};
  return net;
}

}  // namespace

TEST(Sim, EmptyFleetLosesEveryone) {
  const SimResult r = run(pair_config(CustomerMode::loss, 20000.0), 0, Policy::none);
  EXPECT_GT(r.summary.arrivals, 0);
  EXPECT_EQ(r.summary.served, 0);
  for (const StationStats& s : r.summary.stations) EXPECT_EQ(*s.loss_fraction, 1.0);
}

TEST(Sim, LossModeMatchesClosedForm) {
  // Two vehicles on the symmetric pair: availability 4/9 at both stations.
  const SimResult r = run(pair_config(CustomerMode::loss, 2.0e6), 2, Policy::none);
  const auto a = availability_from_trace(r.trace, 2);
  for (const auto& x : a) {
    ASSERT_TRUE(x.has_value());
    EXPECT_NEAR(*x, 4.0 / 9.0, 0.03);
  }
}

TEST(Sim, DeterministicForASeed) {
  SimConfig cfg = pair_config(CustomerMode::queue, 40000.0);
  cfg.profile = DemandProfile::stationary(three_station());
  cfg.travel = TravelModel::deterministic;
  const SimResult a = run(cfg, 6, Policy::realtime), b = run(cfg, 6, Policy::realtime);
  ASSERT_EQ(a.trace.customers.size(), b.trace.customers.size());
  for (std::size_t k = 0; k < a.trace.customers.size(); ++k) {
    EXPECT_EQ(a.trace.customers[k].arrival, b.trace.customers[k].arrival);
    EXPECT_EQ(a.trace.customers[k].board, b.trace.customers[k].board);
  }
  EXPECT_EQ(a.summary.rebalancing_trips, b.summary.rebalancing_trips);
  cfg.seed = 4;
  EXPECT_NE(run(cfg, 6, Policy::realtime).summary.arrivals, a.summary.arrivals);
}

TEST(Sim, SameArrivalsAcrossFleetSizes) {
  SimConfig cfg = pair_config(CustomerMode::loss, 50000.0);
  cfg.profile = DemandProfile::stationary(three_station());
  const SimResult small = run(cfg, 2, Policy::none), big = run(cfg, 20, Policy::none);
  EXPECT_EQ(small.summary.arrivals, big.summary.arrivals);
  EXPECT_GE(big.summary.served, small.summary.served);
}

TEST(Sim, LargerFleetWaitsLess) {
  SimConfig cfg = pair_config(CustomerMode::queue, 4 * 3600.0);
  cfg.profile = DemandProfile::stationary(three_station());
  cfg.travel = TravelModel::deterministic;
  double total_small = 0.0, total_big = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    total_small += *run(cfg, 4, Policy::realtime).summary.mean_wait;
    total_big += *run(cfg, 30, Policy::realtime).summary.mean_wait;
  }
  EXPECT_LT(total_big, total_small);
}

TEST(Sim, ConservesVehicles) {
  SimConfig cfg = pair_config(CustomerMode::queue, 20000.0);
  cfg.profile = DemandProfile::stationary(three_station());
  cfg.sample_interval = 100.0;
  const long long fleet = 9;
  const SimResult r = run(cfg, fleet, Policy::realtime);
  ASSERT_FALSE(r.trace.samples.empty());
  for (const StationSample& s : r.trace.samples) {
    long long total = s.enroute;
    for (long long v : s.idle) total += v;
    EXPECT_EQ(total, fleet) << s.time;
  }
}

TEST(Sim, QueueModeAccountsForEveryCustomer) {
  SimConfig cfg = pair_config(CustomerMode::queue, 30000.0);
  const SimResult r = run(cfg, 1, Policy::none);
  EXPECT_EQ(r.summary.lost, 0);
  EXPECT_EQ(r.summary.served + r.summary.unserved, r.summary.arrivals);
  for (const CustomerRecord& c : r.trace.customers)
    if (c.board) EXPECT_GE(*c.board, c.arrival);
}

TEST(Sim, RejectsBadConfig) {
  SimConfig cfg = pair_config(CustomerMode::queue, 1000.0);
  cfg.dt = 0.0;
  EXPECT_THROW(validate_config(cfg), ValidationError);
  cfg = pair_config(CustomerMode::queue, 1001.0);
  EXPECT_THROW(validate_config(cfg), ValidationError);
  cfg = pair_config(CustomerMode::queue, 1000.0);
  cfg.horizon = 3.0;
  EXPECT_THROW(validate_config(cfg), ValidationError);
  cfg = pair_config(CustomerMode::queue, 1000.0);
  EXPECT_THROW(run(cfg, -1, Policy::none), ValidationError);
}

TEST(AvailabilityFromTrace, CountsServedOverArrivals) {
  SimTrace trace;
  trace.customers = {{0.0, 0, 1, 5.0, false}, {1.0, 0, 1, std::nullopt, true},
                     {2.0, 0, 1, 9.0, false}, {3.0, 0, 1, std::nullopt, true}};
  const auto a = availability_from_trace(trace, 3);
  EXPECT_DOUBLE_EQ(*a[0], 0.5);
  EXPECT_FALSE(a[1].has_value());
  EXPECT_FALSE(a[2].has_value());
}

TEST(Profile, SliceIndexWraps) {
  DemandProfile p = DemandProfile::stationary(testing_support::symmetric_pair());
  p.slices.push_back(p.slices[0]);
  p.slice_length = 100.0;
  EXPECT_EQ(p.slice_index(0.0), 0u);
  EXPECT_EQ(p.slice_index(150.0), 1u);
  EXPECT_EQ(p.slice_index(250.0), 0u);
  EXPECT_NO_THROW(validate_profile(p));
  p.slices[1].lambda = {1.0};
  EXPECT_THROW(validate_profile(p), ValidationError);
}
