#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "amod/cityio.hpp"
#include "amod/congestion.hpp"
#include "amod/errors.hpp"
#include "amod/io.hpp"
#include "amod/jackson.hpp"
#include "amod/rebalance.hpp"
#include "amod/sim.hpp"

namespace {

using namespace amod;

struct Common {
  std::uint64_t seed = 1;
  std::string out = "-";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--out", c.out, "output file, '-' for stdout")->capture_default_str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Network slice_network(const std::string& path, std::size_t slice) {
  const DemandProfile p = profile_from_json(read_json_file(path));
  if (slice >= p.slices.size())
    throw ValidationError("slice " + std::to_string(slice) + " out of range");
  return p.network(slice);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet availability, rebalancing and congestion toolkit"};
  app.set_config("--config", "", "INI/TOML file with option values");
  app.require_subcommand(1);

  // ingest
  Common ing_c;
  std::string ing_trips;
  std::size_t ing_n = 0;
  EstimateOptions ing_opts;
  BoundingBox ing_box;
  auto* ing = app.add_subcommand("ingest", "trip CSV -> hourly demand profile JSON");
  add_common(ing, ing_c);
  ing->add_option("--trips", ing_trips, "trip CSV")->required();
  ing->add_option("--stations", ing_n, "number of stations")->required();
  ing->add_option("--kappa", ing_opts.kappa, "Laplace smoothing count")->capture_default_str();
  ing->add_option("--days", ing_opts.days, "days covered, 0 to count them");
  ing->add_option("--lon-min", ing_box.lon_min);
  ing->add_option("--lon-max", ing_box.lon_max);
  ing->add_option("--lat-min", ing_box.lat_min);
  ing->add_option("--lat-max", ing_box.lat_max);

  // analyze
  Common an_c;
  std::string an_profile, an_format = "json", an_method = "mva";
  std::size_t an_slice = 0;
  long long an_fleet = 0;
  bool an_rebalance = false;
  auto* an = app.add_subcommand("analyze", "profile + fleet size -> availability report");
  add_common(an, an_c);
  an->add_option("--profile", an_profile, "network or profile JSON")->required();
  an->add_option("--fleet", an_fleet, "fleet size")->required();
  an->add_option("--slice", an_slice, "profile slice")->capture_default_str();
  an->add_flag("--rebalance", an_rebalance, "apply the optimal rebalancing plan");
  an->add_option("--method", an_method)->check(CLI::IsMember({"mva", "oracle"}))->capture_default_str();
  an->add_option("--format", an_format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  // rebalance
  Common rb_c;
  std::string rb_profile;
  std::size_t rb_slice = 0;
  auto* rb = app.add_subcommand("rebalance", "profile -> optimal rebalancing plan JSON");
  add_common(rb, rb_c);
  rb->add_option("--profile", rb_profile, "network or profile JSON")->required();
  rb->add_option("--slice", rb_slice, "profile slice")->capture_default_str();

  // simulate
  Common sm_c;
  std::string sm_profile, sm_policy = "realtime", sm_mode = "queue", sm_travel = "deterministic";
  std::string sm_trace, sm_format = "json";
  long long sm_fleet = 0;
  SimConfig sm_cfg;
  auto* sm = app.add_subcommand("simulate", "profile + fleet + policy -> run summary");
  add_common(sm, sm_c);
  sm->add_option("--profile", sm_profile, "network or profile JSON")->required();
  sm->add_option("--fleet", sm_fleet, "fleet size")->required();
  sm->add_option("--policy", sm_policy)->check(CLI::IsMember({"none", "realtime"}))->capture_default_str();
  sm->add_option("--mode", sm_mode)->check(CLI::IsMember({"loss", "queue"}))->capture_default_str();
  sm->add_option("--travel", sm_travel)
      ->check(CLI::IsMember({"exponential", "deterministic"}))
      ->capture_default_str();
  sm->add_option("--dt", sm_cfg.dt)->capture_default_str();
  sm->add_option("--horizon", sm_cfg.horizon)->capture_default_str();
  sm->add_option("--duration", sm_cfg.duration)->capture_default_str();
  sm->add_option("--sample-interval", sm_cfg.sample_interval)->capture_default_str();
  sm->add_option("--trace", sm_trace, "write the event trace as NDJSON");
  sm->add_option("--format", sm_format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  // congestion
  Common cg_c;
  StudyConfig cg_cfg;
  double cg_lmin = cg_cfg.lambda_min * 60.0, cg_lmax = cg_cfg.lambda_max * 60.0;
  auto* cg = app.add_subcommand("congestion", "grid spec -> congestion ensemble CSV");
  add_common(cg, cg_c);
  cg->add_option("--systems", cg_cfg.systems)->capture_default_str();
  cg->add_option("--rows", cg_cfg.grid.rows)->capture_default_str();
  cg->add_option("--cols", cg_cfg.grid.cols)->capture_default_str();
  cg->add_option("--segment-km", cg_cfg.grid.segment_km)->capture_default_str();
  cg->add_option("--density", cg_cfg.grid.critical_density_per_km, "vehicles per km")
      ->capture_default_str();
  cg->add_option("--speed-kmh", cg_cfg.grid.speed_kmh)->capture_default_str();
  cg->add_option("--lambda-min", cg_lmin, "customers per minute")->capture_default_str();
  cg->add_option("--lambda-max", cg_lmax, "customers per minute")->capture_default_str();

  // synth
  Common sy_c;
  std::string sy_spec, sy_truth;
  auto* sy = app.add_subcommand("synth", "synthetic city spec JSON -> trip CSV");
  add_common(sy, sy_c);
  sy->add_option("--spec", sy_spec, "spec JSON")->required();
  sy->add_option("--truth", sy_truth, "write the ground truth JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ing) {
      const auto trips = read_trips(ing_trips, ing_box);
      const StationClustering cl = cluster_stations(trips, ing_n, ing_c.seed);
      const DemandProfile prof = estimate_profile(trips, cl, ing_opts);
      for (const std::string& w : prof.warnings) std::cerr << "warning: " << w << '\n';
      Json j = profile_to_json(prof);
      j["diagnostics"] = {{"trips", trips.size()},
                          {"mean_walk_m", cl.mean_walk_m},
                          {"p95_walk_m", cl.p95_walk_m},
                          {"kmeans_iterations", cl.iterations},
                          {"seed", ing_c.seed}};
      write_text_file(ing_c.out, dump(j));
    } else if (*an) {
      const Network net = slice_network(an_profile, an_slice);
      std::optional<RebalancePromotion> promo;
      if (an_rebalance) promo = optimal_rebalance(net).promotion;
      const AbstractQueueNet qnet = build_abstract_net(net, promo);
      const Throughputs pi = solve_throughputs(qnet);
      const PerfReport r = an_method == "mva" ? mva_metrics(qnet, pi, an_fleet)
                                              : oracle_metrics(qnet, pi, an_fleet);
      write_text_file(an_c.out, an_format == "csv" ? perf_to_csv(r, net.size())
                                                   : dump(perf_to_json(r, net.size())));
    } else if (*rb) {
      write_text_file(rb_c.out, dump(plan_to_json(optimal_rebalance(slice_network(rb_profile, rb_slice)))));
    } else if (*sm) {
      sm_cfg.profile = profile_from_json(read_json_file(sm_profile));
      sm_cfg.seed = sm_c.seed;
      sm_cfg.mode = sm_mode == "loss" ? CustomerMode::loss : CustomerMode::queue;
      sm_cfg.travel =
          sm_travel == "exponential" ? TravelModel::exponential : TravelModel::deterministic;
      const SimResult res =
          run(sm_cfg, sm_fleet, sm_policy == "none" ? Policy::none : Policy::realtime);
      write_text_file(sm_c.out, sm_format == "csv" ? summary_to_csv(res.summary)
                                                   : dump(summary_to_json(res.summary)));
      if (!sm_trace.empty()) {
        std::ostringstream os;
        write_trace_ndjson(os, res.trace);
        write_text_file(sm_trace, os.str());
      }
    } else if (*cg) {
      cg_cfg.seed = cg_c.seed;
      cg_cfg.lambda_min = cg_lmin / 60.0;
      cg_cfg.lambda_max = cg_lmax / 60.0;
      const StudyResult r = congestion_study(cg_cfg);
      std::cerr << "systems " << r.systems.size() << ", resampled " << r.resampled
                << ", fit slope " << r.slope << ", R^2 " << r.r_squared
                << ", zero max-increase fraction " << r.zero_max_fraction << '\n';
      write_text_file(cg_c.out, congestion_to_csv(r));
    } else if (*sy) {
      const SynthCity city = generate_synthetic_city(synth_spec_from_json(read_json_file(sy_spec)), sy_c.seed);
      std::ostringstream os;
      write_trips(os, city.trips);
      write_text_file(sy_c.out, os.str());
      if (!sy_truth.empty()) write_text_file(sy_truth, dump(truth_to_json(city.truth)));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
