#pragma once

#include "cqa/diagnosis.hpp"
#include "cqa/hamiltonian.hpp"
#include "cqa/schedule.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cqa {

enum class OutputFlip {
    All,          // complement every observed output bit
    RandomSubset, // complement a random nonempty subset (exploratory)
};

/// Draws a random instance from a base topology: every 2-input gate kind is
/// redrawn uniformly from {NAND, AND, OR, NOR, XOR} (FAN/INV kept), inputs
/// are uniform bits, and the observed outputs are the healthy outputs with
/// the flip rule applied. Deterministic in (topology, seed, index); the
/// draw order is gate kinds first (gate order), then input bits (wire
/// order), from the stream Splitmix64::stream(seed, index).
Instance generate_instance(const Circuit& topology, uint64_t seed, uint64_t index = 0,
                           const std::string& base = "", OutputFlip flip = OutputFlip::All);

struct Classification {
    int min_faults = 0;
    uint64_t degeneracy = 0;
};

/// MFD fault count and ground-space degeneracy via mfd_bruteforce.
Classification classify(const Instance& inst, int cap = kDefaultEnumerationCap);

struct CampaignFilters {
    bool non_degenerate = false;
    int min_faults = -1; // -1: any
};

struct CampaignSpec {
    std::string base = "c17";
    int count = 1;
    uint64_t seed = 0;
    std::vector<ScheduleSpec> schedules; // empty: classification/gap study only
    CampaignFilters filters;
    std::string out_dir = ".";
    int grid = 100; // 0 skips the gap trace
    DriverSign driver = DriverSign::Stoquastic;
    double tol = 1e-8;
    uint64_t attempt_budget = 0; // 0: 500 * count
    OutputFlip flip = OutputFlip::All;
    bool extended_ok = false; // opt-in guard for long-running c26 evolutions
};

struct CampaignRow {
    std::string instance_id;
    uint64_t seed = 0;
    int min_faults = 0;
    uint64_t degeneracy = 0;
    std::optional<double> min_gap;
    std::optional<double> gap_location;
    std::optional<double> tf;
    std::optional<double> success_probability;
};

struct CampaignResult {
    std::vector<CampaignRow> rows;
    uint64_t attempts = 0; // draws including rejected ones
    int accepted = 0;
    std::string csv_path;
};

/// Generates, filters (rejection sampling over draw indices), classifies and
/// optionally gap-traces / evolves `count` instances, writing one instance
/// JSON each, one result JSON per evolution, an aggregate CSV and a summary
/// JSON under out_dir. Progress goes to `progress` (stderr in the CLI);
/// stdout stays machine-clean. Throws SamplingError when the attempt budget
/// runs out and std::invalid_argument when a c26 evolution is requested
/// without extended_ok.
CampaignResult run_campaign(const CampaignSpec& spec, std::ostream* progress = nullptr);

/// Aggregate CSV header + rows (12 significant digits, empty cells for
/// fields a row does not have).
std::string campaign_csv(const std::vector<CampaignRow>& rows);

CampaignSpec campaign_spec_from_json_text(const std::string& text);

} // namespace cqa
