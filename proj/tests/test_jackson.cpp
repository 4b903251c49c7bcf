#include <gtest/gtest.h>

#include <random>

#include "amod/errors.hpp"
#include "amod/jackson.hpp"
#include "amod/rebalance.hpp"
#include "oracles/product_form.hpp"
#include "support.hpp"

using namespace amod;

namespace {

Network ring3() {
  Network net;
  net.lambda = {1, 1, 1};
  net.P = Matrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
  net.T = Matrix{{0, 1, 2}, {2, 0, 1}, {1, 2, 0}};
  return net;
}

}  // namespace

TEST(Throughputs, SymmetricPairIsAllOnes) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  const Throughputs pi = solve_throughputs(q);
  ASSERT_EQ(pi.pi.size(), 4u);
  for (double x : pi.pi) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(Throughputs, PermutationRoutingGivesEqualStations) {
  Network net = testing_support::symmetric_pair();
  net.lambda = {2, 1};
  const Throughputs pi = solve_throughputs(build_abstract_net(net));
  EXPECT_NEAR(pi.pi[0], 1.0, 1e-12);
  EXPECT_NEAR(pi.pi[1], 1.0, 1e-12);
}

TEST(Throughputs, PeriodicRingConverges) {
  const AbstractQueueNet q = build_abstract_net(ring3());
  const Throughputs pi = solve_throughputs(q);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pi.pi[i], 1.0, 1e-12);
  EXPECT_NEAR(pi.pi[q.road_index(0, 1)], 1.0, 1e-12);
  EXPECT_NEAR(pi.pi[q.road_index(1, 2)], 1.0, 1e-12);
  EXPECT_NEAR(pi.pi[q.road_index(2, 0)], 1.0, 1e-12);
  EXPECT_EQ(pi.pi[q.road_index(0, 2)], 0.0);
  EXPECT_EQ(pi.pi[q.road_index(1, 0)], 0.0);
}

TEST(Throughputs, NonConvergenceReportsIterations) {
  PowerIterationOptions opts;
  opts.max_iterations = 2;
  std::mt19937_64 rng(1);
  const Matrix P = testing_support::random_network(rng, 6).P;
  try {
    stationary_vector(P, opts);
    FAIL() << "expected non-convergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}

TEST(Oracle, SymmetricPairExactValues) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  const Throughputs pi = solve_throughputs(q);
  const auto G = normalization_constants(q, pi, 2);
  EXPECT_NEAR(G[0], 1.0, 1e-15);
  EXPECT_NEAR(G[1], 4.0, 1e-12);
  EXPECT_NEAR(G[2], 9.0, 1e-12);
  const PerfReport r1 = oracle_metrics(q, pi, 1), r2 = oracle_metrics(q, pi, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(r1.availability[i], 0.25, 1e-12);
    EXPECT_NEAR(r2.availability[i], 4.0 / 9.0, 1e-12);
  }
}

TEST(Oracle, EmptyFleet) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  const Throughputs pi = solve_throughputs(q);
  for (const PerfReport& r : {oracle_metrics(q, pi, 0), mva_metrics(q, pi, 0)}) {
    for (double a : r.availability) EXPECT_EQ(a, 0.0);
    for (double l : r.queue_length) EXPECT_EQ(l, 0.0);
  }
}

TEST(Oracle, ConvolutionMatchesEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = testing_support::random_network(rng, 3);
    const AbstractQueueNet q =
        build_abstract_net(net, testing_support::random_promotion(rng, 3));
    const Throughputs pi = solve_throughputs(q);
    const auto a = normalization_constants(q, pi, 5);
    const auto b = enumerate_normalization_constants(q, pi, 5);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k] / b[k], 1.0, 1e-12);
  }
}

TEST(Oracle, RefusesHugeStateSpaces) {
  std::mt19937_64 rng(2);
  const AbstractQueueNet q = build_abstract_net(testing_support::random_network(rng, 10));
  const Throughputs pi = solve_throughputs(q);
  try {
    oracle_metrics(q, pi, 50);
    FAIL() << "expected refusal";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("use MVA"), std::string::npos);
  }
}

TEST(Mva, SymmetricPairHandIteration) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  const Throughputs pi = solve_throughputs(q);
  const PerfReport r = mva_metrics(q, pi, 2);
  EXPECT_NEAR(r.wait[0], 1.25, 1e-12);
  EXPECT_NEAR(r.queue_length[0], 5.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.throughput[0], 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.availability[0], 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(mva_metrics(q, pi, 1).availability[1], 0.25, 1e-12);
}

TEST(Mva, MatchesOracleQueueLengths) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing_support::random_network(rng, 3);
    const AbstractQueueNet q =
        build_abstract_net(net, testing_support::random_promotion(rng, 3));
    const Throughputs pi = solve_throughputs(q);
    const PerfReport a = mva_metrics(q, pi, 7), b = oracle_metrics(q, pi, 7);
    for (std::size_t k = 0; k < q.node_count(); ++k)
      EXPECT_NEAR(a.queue_length[k], b.queue_length[k], 1e-9);
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_NEAR(a.availability[i] / b.availability[i], 1.0, 1e-9);
  }
}

TEST(Mva, IndependentBruteForce) {
  std::mt19937_64 rng(8);
  const Network net = testing_support::random_network(rng, 3);
  const AbstractQueueNet q = build_abstract_net(net);
  const PerfReport r = mva_metrics(q, solve_throughputs(q), 4);
  const auto nodes = oracle::mod_nodes(net.lambda, net.P.to_rows(), net.T.to_rows(),
                                       std::vector<double>(3, 0.0), uniform_routing(3).to_rows());
  const oracle::Result ref = oracle::brute_force(nodes, 3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(r.availability[i], ref.availability[4][i], 1e-12);
}

TEST(Mva, CurveMatchesPointwise) {
  std::mt19937_64 rng(9);
  const AbstractQueueNet q = build_abstract_net(testing_support::random_network(rng, 4));
  const Throughputs pi = solve_throughputs(q);
  const std::vector<long long> fleets{0, 3, 10, 40};
  const auto curve = mva_curve(q, pi, fleets);
  for (std::size_t k = 0; k < fleets.size(); ++k)
    for (std::size_t i = 0; i < 4; ++i)
      EXPECT_DOUBLE_EQ(curve[k].availability[i], mva_metrics(q, pi, fleets[k]).availability[i]);
}

TEST(Mva, AvailabilityGrowsWithFleet) {
  std::mt19937_64 rng(4);
  const AbstractQueueNet q = build_abstract_net(testing_support::random_network(rng, 5));
  const Throughputs pi = solve_throughputs(q);
  const std::vector<long long> fleets{1, 2, 5, 10, 20, 50, 100};
  const auto curve = mva_curve(q, pi, fleets);
  for (std::size_t k = 1; k < curve.size(); ++k)
    for (std::size_t i = 0; i < 5; ++i)
      EXPECT_GE(curve[k].availability[i], curve[k - 1].availability[i] - 1e-15);
}

TEST(Mva, BalancedNetApproachesFullAvailability) {
  std::mt19937_64 rng(6);
  const Network net = testing_support::random_network(rng, 5);
  const AbstractQueueNet q = build_abstract_net(net, optimal_rebalance(net).promotion);
  const PerfReport r = mva_metrics(q, solve_throughputs(q), 500);
  for (double a : r.availability) EXPECT_GE(a, 0.99);
}

TEST(Mva, RejectsFiniteServerRoads) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair())
                                 .with_road_servers(IntMatrix{{0, 1}, {1, 0}});
  EXPECT_THROW(mva_metrics(q, solve_throughputs(q), 2), ValidationError);
}

TEST(UtilizationIdentity, HoldsWithAndWithoutPromotion) {
  const AbstractQueueNet sym = build_abstract_net(testing_support::symmetric_pair());
  EXPECT_LE(utilization_identity_residual(sym, solve_throughputs(sym)), 1e-12);

  Network net = testing_support::symmetric_pair();
  net.lambda = {2, 1};
  const AbstractQueueNet q = build_abstract_net(net, optimal_rebalance(net).promotion);
  EXPECT_LE(utilization_identity_residual(q, solve_throughputs(q)), 1e-9);

  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const Network r = testing_support::random_network(rng, 5);
    const AbstractQueueNet qr = build_abstract_net(r, testing_support::random_promotion(rng, 5));
    EXPECT_LE(utilization_identity_residual(qr, solve_throughputs(qr)), 1e-9) << seed;
  }
}

TEST(Availability, ClampOnlyNearBounds) {
  EXPECT_EQ(checked_availability(1.0 + 1e-12, 0), 1.0);
  EXPECT_EQ(checked_availability(-1e-12, 0), 0.0);
  EXPECT_THROW(checked_availability(1.01, 0), NumericalError);
}
