#pragma once

#include "cqa/diagnosis.hpp"
#include "cqa/evolve.hpp"
#include "cqa/hamiltonian.hpp"
#include "cqa/schedule.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace cqa {

using Json = nlohmann::ordered_json;

/// 12 significant digits, the project-wide numeric output format.
std::string fmt12(double v);

/// Nearest double to the 12-significant-digit decimal of v. Applied to
/// every floating-point value before it enters a JSON document, so dumps
/// stay diffable across platforms.
double round12(double v);

/// Writes via a temp file + rename so failures never leave partial output.
void atomic_write_file(const std::string& path, const std::string& content);

/// "0110..." with character p holding bit p.
std::string bits_to_string(uint64_t bits, int count);
uint64_t bits_from_string(const std::string& s, int expected_count);

Json instance_to_json(const Instance& inst);
/// `base_dir` resolves a circuit given as a file path instead of inline text.
Instance instance_from_json(const Json& j, const std::string& base_dir = ".");
Instance load_instance_file(const std::string& path);

Json schedule_spec_to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_spec_from_json(const Json& j);

Json mfd_to_json(const MfdResult& r, const Instance& inst);
Json graph_report_to_json(const TransitionGraphReport& rep);
Json evolution_to_json(const EvolutionResult& r, const Instance& inst, const ScheduleSpec& spec,
                       const MfdResult& mfd);

} // namespace cqa
