#include <gtest/gtest.h>

#include <random>

#include "amod/errors.hpp"
#include "amod/netmodel.hpp"
#include "support.hpp"

using namespace amod;

TEST(Network, AcceptsSymmetricPair) {
  EXPECT_NO_THROW(validate_network(testing_support::symmetric_pair()));
}

TEST(Network, RejectsShortRoutingRow) {
  Network net = testing_support::symmetric_pair();
  net.P(0, 1) = 0.9;
  try {
    validate_network(net);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("non-stochastic routing row"), std::string::npos);
  }
}

TEST(Network, RejectsBadRatesAndTimes) {
  Network net = testing_support::symmetric_pair();
  net.lambda[1] = 0.0;
  EXPECT_THROW(validate_network(net), ValidationError);
  net = testing_support::symmetric_pair();
  net.T(1, 0) = 0.0;
  EXPECT_THROW(validate_network(net), ValidationError);
  net = testing_support::symmetric_pair();
  net.P(0, 0) = 0.5;
  net.P(0, 1) = 0.5;
  EXPECT_THROW(validate_network(net), ValidationError);
}

TEST(Network, RejectsReducibleRouting) {
  // Station 2 is never left: {0, 1} cannot be reached from it.
  Network net;
  net.lambda = {1, 1, 1};
  net.P = Matrix{{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0, 0, 0}};
  net.T = Matrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  EXPECT_THROW(validate_network(net), ValidationError);
  EXPECT_FALSE(is_irreducible(Matrix{{0, 1, 0}, {1, 0, 0}, {1, 0, 0}}));
  EXPECT_TRUE(is_irreducible(Matrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
}

TEST(AbstractNet, SymmetricPairHasFourNodes) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  ASSERT_EQ(q.node_count(), 4u);
  const std::size_t r01 = q.road_index(0, 1), r10 = q.road_index(1, 0);
  EXPECT_EQ(r01, road_node_index(2, 0, 1));
  EXPECT_DOUBLE_EQ(q.routing(0, r01), 1.0);
  EXPECT_DOUBLE_EQ(q.routing(r01, 1), 1.0);
  EXPECT_DOUBLE_EQ(q.routing(r10, 0), 1.0);
  EXPECT_DOUBLE_EQ(q.routing(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(q.node(0).rate, 1.0);
  EXPECT_DOUBLE_EQ(q.node(1).rate, 1.0);
  EXPECT_TRUE(q.node(r01).is_delay());
  EXPECT_TRUE(q.all_roads_delay());
}

TEST(AbstractNet, FoldsPromotion) {
  RebalancePromotion promo{{0.0, 1.0}, Matrix{{0, 1}, {1, 0}}};
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair(), promo);
  EXPECT_DOUBLE_EQ(q.eff_lambda()[0], 1.0);
  EXPECT_DOUBLE_EQ(q.eff_lambda()[1], 2.0);
  EXPECT_DOUBLE_EQ(q.virtual_fraction()[1], 0.5);
  EXPECT_DOUBLE_EQ(q.eff_P()(1, 0), 1.0);
}

TEST(AbstractNet, RoutingRowsSumToOne) {
  std::mt19937_64 rng(3);
  const Network net = testing_support::random_network(rng, 5);
  const AbstractQueueNet q =
      build_abstract_net(net, testing_support::random_promotion(rng, 5));
  EXPECT_EQ(q.node_count(), 25u);
  for (std::size_t a = 0; a < q.node_count(); ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < q.node_count(); ++b) row += q.routing(a, b);
    EXPECT_NEAR(row, 1.0, 1e-12);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double p = q.virtual_fraction()[i];
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_NEAR(q.eff_P()(i, j),
                  q.promotion().alpha(i, j) * p + net.P(i, j) * (1.0 - p), 1e-15);
  }
}

TEST(AbstractNet, RejectsBadPromotion) {
  RebalancePromotion promo{{0.0, -1.0}, Matrix{{0, 1}, {1, 0}}};
  EXPECT_THROW(build_abstract_net(testing_support::symmetric_pair(), promo), ValidationError);
  promo = {{0.0, 1.0}, Matrix{{0, 1}, {0.5, 0}}};
  EXPECT_THROW(build_abstract_net(testing_support::symmetric_pair(), promo), ValidationError);
}

TEST(AbstractNet, RoadServers) {
  const AbstractQueueNet q = build_abstract_net(testing_support::symmetric_pair());
  const AbstractQueueNet f = q.with_road_servers(IntMatrix{{0, 2}, {3, 0}});
  EXPECT_EQ(*f.node(f.road_index(0, 1)).servers, 2);
  EXPECT_EQ(*f.node(f.road_index(1, 0)).servers, 3);
  EXPECT_FALSE(f.all_roads_delay());
  EXPECT_DOUBLE_EQ(f.node(f.road_index(0, 1)).service_rate(5), 2.0);
  EXPECT_THROW(q.with_road_servers(IntMatrix{{0, 0}, {1, 0}}), ValidationError);
}
