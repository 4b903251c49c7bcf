#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "amod/errors.hpp"
#include "amod/io.hpp"
#include "support.hpp"

using namespace amod;

TEST(NetworkJson, RoundTrip) {
  std::mt19937_64 rng(1);
  const Network net = testing_support::random_network(rng, 4);
  const Json j = network_to_json(net);
  EXPECT_EQ(j.at("schema"), kSchemaVersion);
  const Network back = network_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.lambda, net.lambda);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(back.P(i, k), net.P(i, k));
      EXPECT_EQ(back.T(i, k), net.T(i, k));
    }
}

TEST(NetworkJson, RejectsBadDocuments) {
  EXPECT_THROW(network_from_json(Json::parse(R"({"lambda": [1, 1], "P": [[0, 1], [1, 0]]})")),
               ValidationError);
  EXPECT_THROW(network_from_json(Json::parse(
                   R"({"lambda": [1], "P": [[0, 1]], "T": [[0, 1]]})")),
               ValidationError);
  EXPECT_THROW(network_from_json(Json::parse(
                   R"({"schema": 7, "lambda": [1, 1], "P": [[0, 1], [1, 0]], "T": [[0, 1], [1, 0]]})")),
               ValidationError);
}

TEST(ProfileJson, RoundTripAndStationaryFallback) {
  DemandProfile p = DemandProfile::stationary(testing_support::symmetric_pair(0.1, 30.0));
  p.slices.push_back(p.slices[0]);
  p.slices[1].lambda = {0.2, 0.3};
  p.stations = {{-73.9, 40.7}, {-73.8, 40.8}};
  p.warnings = {"hour 1 was quiet"};
  const DemandProfile back = profile_from_json(Json::parse(profile_to_json(p).dump()));
  ASSERT_EQ(back.slices.size(), 2u);
  EXPECT_EQ(back.slices[1].lambda, p.slices[1].lambda);
  EXPECT_EQ(back.stations[1].lat, 40.8);
  EXPECT_EQ(back.warnings, p.warnings);

  const DemandProfile one =
      profile_from_json(network_to_json(testing_support::symmetric_pair(0.5, 2.0)));
  ASSERT_EQ(one.slices.size(), 1u);
  EXPECT_EQ(one.slices[0].T(0, 1), 2.0);
}

TEST(ReportJson, CarriesTheSchema) {
  const Network net = testing_support::symmetric_pair();
  const AbstractQueueNet q = build_abstract_net(net);
  const PerfReport r = mva_metrics(q, solve_throughputs(q), 2);
  const Json j = perf_to_json(r, 2);
  EXPECT_EQ(j.at("schema"), kSchemaVersion);
  EXPECT_NEAR(j.at("availability")[0].get<double>(), 4.0 / 9.0, 1e-12);
  const std::string csv = perf_to_csv(r, 2);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  Network asym = net;
  asym.lambda = {2, 1};
  const Json plan = plan_to_json(optimal_rebalance(asym));
  EXPECT_EQ(plan.at("cost"), 1.0);
  EXPECT_EQ(plan.at("beta")[1][0], 1.0);
}

TEST(TraceJson, OneObjectPerLine) {
  SimTrace t;
  t.customers = {{1.0, 0, 1, 3.0, false}, {2.0, 1, 0, std::nullopt, true}};
  t.dispatches = {{10.0, {{0, 1, 2}}, {{0, 1, 1}}, 1, 5.0}};
  std::ostringstream os;
  write_trace_ndjson(os, t);
  std::istringstream in(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_NO_THROW(Json::parse(line));
    ++lines;
  }
  EXPECT_EQ(lines, 3u);
}

TEST(SynthSpecJson, Parses) {
  const SynthSpec s = synth_spec_from_json(Json::parse(R"({
    "centers": [{"lon": -73.99, "lat": 40.75}, {"lon": -73.96, "lat": 40.75}],
    "rate_per_hour": [5, 6], "start": "2012-03-02T00:00:00Z", "days": 2})"));
  EXPECT_EQ(s.centers.size(), 2u);
  EXPECT_EQ(s.rate_per_hour[1], 6.0);
  EXPECT_EQ(s.start, 1330560000.0 + 86400.0);
  EXPECT_EQ(s.days, 2u);
  EXPECT_FALSE(s.P.has_value());
  EXPECT_THROW(synth_spec_from_json(Json::parse(R"({"centers": []})")), ValidationError);
}

TEST(CongestionCsv, Columns) {
  StudyResult r;
  r.systems.push_back({42, {}});
  r.systems[0].report.reb_ratio = 0.5;
  const std::string csv = congestion_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "seed,reb_ratio,avg_util_increase,max_util_increase");
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 3), "42,");
}
