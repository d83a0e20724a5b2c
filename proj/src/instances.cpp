#include "cqa/instances.hpp"

#include "cqa/errors.hpp"
#include "cqa/evolve.hpp"
#include "cqa/io.hpp"
#include "cqa/prng.hpp"
#include "cqa/spectrum.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqa {

namespace {

constexpr GateKind kTwoInputDraw[] = {GateKind::Nand, GateKind::And, GateKind::Or, GateKind::Nor,
                                      GateKind::Xor};

std::string make_id(const std::string& base, uint64_t seed, uint64_t index) {
    char buf[96];
    snprintf(buf, sizeof buf, "%s_s%llu_i%06llu", base.c_str(),
             static_cast<unsigned long long>(seed), static_cast<unsigned long long>(index));
    return buf;
}

} // namespace

Instance generate_instance(const Circuit& topology, uint64_t seed, uint64_t index,
                           const std::string& base, OutputFlip flip) {
    Splitmix64 rng = Splitmix64::stream(seed, index);

    Instance inst;
    inst.circuit = topology;
    for (Gate& g : inst.circuit.gates)
        if (gate_fan_in(g.kind) == 2) g.kind = kTwoInputDraw[rng.bounded(5)];

    for (int k = 0; k < inst.circuit.input_count; ++k)
        inst.applied_inputs |= static_cast<uint64_t>(rng.next_bit()) << k;

    const int n_out = inst.circuit.output_count;
    uint64_t healthy = (propagate(inst.circuit, inst.applied_inputs) >> inst.circuit.free_count()) &
                       ((1ull << n_out) - 1);
    uint64_t flip_mask = (1ull << n_out) - 1;
    if (flip == OutputFlip::RandomSubset) flip_mask = 1 + rng.bounded((1ull << n_out) - 1);
    inst.observed_outputs = healthy ^ flip_mask;

    inst.meta.seed = seed;
    inst.meta.index = index;
    inst.meta.base = base.empty() ? "circuit" : base;
    inst.meta.id = make_id(inst.meta.base, seed, index);
    return inst;
}

Classification classify(const Instance& inst, int cap) {
    MfdResult r = mfd_bruteforce(inst, cap);
    return {r.min_faults, r.degeneracy};
}

std::string campaign_csv(const std::vector<CampaignRow>& rows) {
    std::ostringstream out;
    out << "instance_id,seed,min_faults,degeneracy,min_gap,gap_location,tf,success_probability\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt12(*v) : std::string(); };
    for (const CampaignRow& r : rows) {
        out << r.instance_id << ',' << r.seed << ',' << r.min_faults << ',' << r.degeneracy << ','
            << cell(r.min_gap) << ',' << cell(r.gap_location) << ',' << cell(r.tf) << ','
            << cell(r.success_probability) << '\n';
    }
    return out.str();
}

CampaignSpec campaign_spec_from_json_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("campaign spec is not valid JSON: ") + e.what());
    }
    CampaignSpec spec;
    spec.base = j.value("base", spec.base);
    spec.count = j.value("count", spec.count);
    spec.seed = j.value("seed", spec.seed);
    spec.out_dir = j.value("out_dir", spec.out_dir);
    spec.grid = j.value("grid", spec.grid);
    spec.tol = j.value("tol", spec.tol);
    spec.attempt_budget = j.value("attempt_budget", spec.attempt_budget);
    spec.extended_ok = j.value("extended", spec.extended_ok);
    if (j.contains("driver")) {
        std::string d = j.at("driver").get<std::string>();
        if (d == "stoq" || d == "stoquastic")
            spec.driver = DriverSign::Stoquastic;
        else if (d == "nonstoq" || d == "nonstoquastic")
            spec.driver = DriverSign::NonStoquastic;
        else
            throw ParseError("unknown driver '" + d + "' (have: stoq, nonstoq)");
    }
    if (j.contains("flip")) {
        std::string f = j.at("flip").get<std::string>();
        if (f == "all")
            spec.flip = OutputFlip::All;
        else if (f == "random_subset")
            spec.flip = OutputFlip::RandomSubset;
        else
            throw ParseError("unknown flip rule '" + f + "' (have: all, random_subset)");
    }
    if (j.contains("filters")) {
        const Json& f = j.at("filters");
        spec.filters.non_degenerate = f.value("non_degenerate", false);
        spec.filters.min_faults = f.value("min_faults", -1);
    }
    if (j.contains("schedules"))
        for (const Json& s : j.at("schedules")) spec.schedules.push_back(schedule_spec_from_json(s));
    if (spec.count < 1) throw ParseError("campaign count must be >= 1");
    return spec;
}

namespace {

struct AcceptedInstance {
    Instance inst;
    MfdResult mfd;
};

bool passes(const CampaignFilters& f, const MfdResult& mfd) {
    if (f.non_degenerate && mfd.degeneracy != 1) return false;
    if (f.min_faults >= 0 && mfd.min_faults != f.min_faults) return false;
    return true;
}

} // namespace

CampaignResult run_campaign(const CampaignSpec& spec, std::ostream* progress) {
    namespace fs = std::filesystem;
    const Circuit topo = builtin_topology(spec.base);
    const uint64_t budget = spec.attempt_budget ? spec.attempt_budget
                                                : 500ull * static_cast<uint64_t>(spec.count);

    if (!spec.schedules.empty() && topo.free_count() > 20 && !spec.extended_ok)
        throw std::invalid_argument(
            "evolutions on '" + spec.base + "' run for hours at dimension 2^" +
            std::to_string(topo.free_count()) + "; set \"extended\": true to confirm");

    // Rejection sampling over draw indices.
    std::vector<AcceptedInstance> accepted;
    CampaignResult result;
    while (static_cast<int>(accepted.size()) < spec.count && result.attempts < budget) {
        Instance inst =
            generate_instance(topo, spec.seed, result.attempts, spec.base, spec.flip);
        result.attempts++;
        MfdResult mfd = mfd_bruteforce(inst);
        if (passes(spec.filters, mfd)) accepted.push_back({std::move(inst), std::move(mfd)});
    }
    if (static_cast<int>(accepted.size()) < spec.count)
        throw SamplingError("only " + std::to_string(accepted.size()) + " of " +
                            std::to_string(spec.count) + " instances passed the filter after " +
                            std::to_string(result.attempts) + " draws");
    result.accepted = spec.count;

    // One row per instance, or one per (instance, schedule) when evolving.
    const size_t per = spec.schedules.empty() ? 1 : spec.schedules.size();
    std::vector<std::vector<CampaignRow>> rows(accepted.size());
    std::vector<std::string> result_files(accepted.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int64_t ai = 0; ai < static_cast<int64_t>(accepted.size()); ++ai) {
        const AcceptedInstance& a = accepted[ai];
        std::optional<double> mg, mg_at;
        SpectrumTrace trace;
        if (spec.grid > 0) {
            trace = gap_trace(a.inst, spec.grid, spec.driver);
            MinGap m = min_gap(trace);
            mg = m.gap_star;
            mg_at = m.s_star;
        }
        std::ostringstream result_json;
        rows[ai].reserve(per);
        if (spec.schedules.empty()) {
            rows[ai].push_back({a.inst.meta.id, spec.seed, a.mfd.min_faults, a.mfd.degeneracy, mg,
                                mg_at, std::nullopt, std::nullopt});
        } else {
            ReducedSpace space(a.inst);
            AnnealHamiltonian h(space, spec.driver);
            for (const ScheduleSpec& sched : spec.schedules) {
                std::function<double(double)> s_of_t;
                if (sched.kind == ScheduleKind::OptAdia) {
                    auto sg = trace.s_grid();
                    auto gg = trace.gap_values();
                    s_of_t = make_schedule(sched, &sg, &gg);
                } else {
                    s_of_t = make_schedule(sched);
                }
                EvolveOptions eopt;
                eopt.tol = spec.tol;
                eopt.keep_state = false;
                EvolutionResult er = evolve(space, h, s_of_t, sched.tf, a.mfd, eopt);
                rows[ai].push_back({a.inst.meta.id, spec.seed, a.mfd.min_faults, a.mfd.degeneracy,
                                    mg, mg_at, sched.tf, er.success_probability});
                result_json << evolution_to_json(er, a.inst, sched, a.mfd).dump(2) << "\n";
            }
        }
        result_files[ai] = result_json.str();
        if (progress) {
#ifdef _OPENMP
#pragma omp critical(campaign_progress)
#endif
            *progress << "done " << a.inst.meta.id << " (mfd=" << a.mfd.min_faults
                      << " degeneracy=" << a.mfd.degeneracy << ")\n";
        }
    }

    fs::create_directories(spec.out_dir);
    for (size_t ai = 0; ai < accepted.size(); ++ai) {
        const Instance& inst = accepted[ai].inst;
        atomic_write_file((fs::path(spec.out_dir) / (inst.meta.id + ".json")).string(),
                          instance_to_json(inst).dump(2) + "\n");
        if (!result_files[ai].empty())
            atomic_write_file((fs::path(spec.out_dir) / (inst.meta.id + ".results.json")).string(),
                              result_files[ai]);
        for (CampaignRow& r : rows[ai]) result.rows.push_back(std::move(r));
    }

    result.csv_path = (fs::path(spec.out_dir) / "aggregate.csv").string();
    atomic_write_file(result.csv_path, campaign_csv(result.rows));

    Json summary;
    summary["base"] = spec.base;
    summary["seed"] = spec.seed;
    summary["count"] = spec.count;
    summary["attempts"] = result.attempts;
    summary["draws_per_accept"] = round12(static_cast<double>(result.attempts) / spec.count);
    summary["grid"] = spec.grid;
    summary["driver"] = spec.driver == DriverSign::Stoquastic ? "stoq" : "nonstoq";
    Json scheds = Json::array();
    for (const auto& s : spec.schedules) scheds.push_back(schedule_spec_to_json(s));
    summary["schedules"] = scheds;
    atomic_write_file((fs::path(spec.out_dir) / "campaign.json").string(), summary.dump(2) + "\n");
    return result;
}

} // namespace cqa
