#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "amod/cityio.hpp"
#include "amod/congestion.hpp"
#include "amod/jackson.hpp"
#include "amod/netmodel.hpp"
#include "amod/rebalance.hpp"
#include "amod/sim.hpp"

namespace amod {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json read_json_file(const std::string& path);
/// "-" writes to stdout.
void write_text_file(const std::string& path, const std::string& text);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const char* what);

Json network_to_json(const Network& net);
Network network_from_json(const Json& j);

/// Also accepts a single network document, read as a one-slice profile.
Json profile_to_json(const DemandProfile& p);
DemandProfile profile_from_json(const Json& j);

Json plan_to_json(const RebalancePlan& plan);
Json perf_to_json(const PerfReport& r, std::size_t stations);
std::string perf_to_csv(const PerfReport& r, std::size_t stations);

Json summary_to_json(const SimSummary& s);
std::string summary_to_csv(const SimSummary& s);
void write_trace_ndjson(std::ostream& out, const SimTrace& trace);

std::string congestion_to_csv(const StudyResult& r);

SynthSpec synth_spec_from_json(const Json& j);
Json truth_to_json(const SynthTruth& t);

}  // namespace amod
