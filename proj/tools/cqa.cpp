// Command-line front end: instance generation, diagnosis, driver-graph
// checks, spectrum traces, closed-system anneals and batch campaigns.
// Results go to stdout (or --out); progress and errors stay on stderr.

#include "cqa/errors.hpp"
#include "cqa/evolve.hpp"
#include "cqa/instances.hpp"
#include "cqa/io.hpp"
#include "cqa/spectrum.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace cqa;

namespace {

struct GlobalOpts {
    uint64_t seed = 0;
    int threads = 0;
    std::string out;
    std::string format = "json"; // json|csv where both make sense
};

void emit(const GlobalOpts& g, const std::string& content) {
    if (g.out.empty())
        std::cout << content;
    else
        atomic_write_file(g.out, content);
}

std::string csv_escape_free(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt12(v.get<double>());
    return v.dump();
}

// Flat JSON object -> two-line CSV with identical values.
std::string json_to_csv(const Json& j) {
    std::ostringstream head, row;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_object() || it.value().is_array()) continue;
        if (!first) {
            head << ',';
            row << ',';
        }
        first = false;
        head << it.key();
        row << csv_escape_free(it.value());
    }
    return head.str() + "\n" + row.str() + "\n";
}

DriverSign parse_driver(const std::string& s) {
    if (s == "stoq" || s == "stoquastic") return DriverSign::Stoquastic;
    if (s == "nonstoq" || s == "nonstoquastic") return DriverSign::NonStoquastic;
    throw CLI::ValidationError("--driver", "expected stoq or nonstoq");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained-annealing simulator for circuit fault diagnosis"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global random seed");
    app.add_option("--threads", g.threads, "worker thread cap (0 = runtime default)");
    app.add_option("--out", g.out, "write the result to this file instead of stdout");
    app.add_option("--format", g.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // gen
    auto* gen = app.add_subcommand("gen", "generate random instances from a base topology");
    gen->fallthrough();
    std::string gen_base = "c17";
    int gen_count = 1;
    std::string gen_dir = ".";
    std::string gen_flip = "all";
    gen->add_option("--base", gen_base, "base topology (c17 or c26)")->required();
    gen->add_option("--count", gen_count, "how many instances")->check(CLI::PositiveNumber);
    gen->add_option("--dir", gen_dir, "output directory (default .)");
    gen->add_option("--flip", gen_flip, "output flip rule: all or random-subset")
        ->check(CLI::IsMember({"all", "random-subset"}));

    // mfd
    auto* mfd_cmd = app.add_subcommand("mfd", "brute-force minimum fault diagnosis");
    mfd_cmd->fallthrough();
    std::string mfd_file;
    bool mfd_crosscheck = false;
    mfd_cmd->add_option("instance", mfd_file, "instance JSON file")->required();
    mfd_cmd->add_flag("--crosscheck", mfd_crosscheck,
                      "also run the independent fault-planting oracle and compare");

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "driver transition-graph report");
    graph_cmd->fallthrough();
    std::string graph_file;
    bool graph_check = false;
    graph_cmd->add_option("instance", graph_file, "instance JSON file")->required();
    graph_cmd->add_flag("--check", graph_check, "BFS connectivity / regularity check");

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "lowest-two eigenvalues along the anneal");
    spec_cmd->fallthrough();
    std::string spec_file, spec_driver = "stoq";
    int spec_grid = 100;
    spec_cmd->add_option("instance", spec_file, "instance JSON file")->required();
    spec_cmd->add_option("--grid", spec_grid, "uniform s grid size")->check(CLI::Range(2, 100000));
    spec_cmd->add_option("--driver", spec_driver, "driver sign: stoq or nonstoq")
        ->check(CLI::IsMember({"stoq", "nonstoq"}));

    // anneal
    auto* ann_cmd = app.add_subcommand("anneal", "closed-system evolution of one instance");
    ann_cmd->fallthrough();
    std::string ann_file, ann_schedule = "param", ann_trace, ann_mode = "time";
    double ann_tf = 40.0, ann_t0 = 20.0, ann_s0 = 0.75, ann_tol = 1e-8;
    int ann_segments = 100;
    ann_cmd->add_option("instance", ann_file, "instance JSON file")->required();
    ann_cmd->add_option("--schedule", ann_schedule, "linear, param or opt-adia")
        ->check(CLI::IsMember({"linear", "param", "opt-adia", "opt_adia"}));
    ann_cmd->add_option("--tf", ann_tf, "total anneal time");
    ann_cmd->add_option("--t0", ann_t0, "param: time spent on [0, s0]");
    ann_cmd->add_option("--s0", ann_s0, "param: split point in (0, 1)");
    ann_cmd->add_option("--tol", ann_tol, "integrator tolerance");
    ann_cmd->add_option("--trace", ann_trace, "opt-adia: gap trace CSV (computed when omitted)");
    ann_cmd->add_option("--segments", ann_segments, "opt-adia: piecewise segments");
    ann_cmd->add_option("--opt-adia-mode", ann_mode, "opt-adia allocation: time or slope")
        ->check(CLI::IsMember({"time", "slope"}));

    // campaign
    auto* camp_cmd = app.add_subcommand("campaign", "run a campaign spec");
    camp_cmd->fallthrough();
    std::string camp_file;
    camp_cmd->add_option("spec", camp_file, "campaign spec JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }

#ifdef _OPENMP
    if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

    try {
        if (*gen) {
            Circuit topo = builtin_topology(gen_base);
            OutputFlip flip = gen_flip == "all" ? OutputFlip::All : OutputFlip::RandomSubset;
            fs::create_directories(gen_dir);
            for (int k = 0; k < gen_count; ++k) {
                Instance inst = generate_instance(topo, g.seed, k, gen_base, flip);
                atomic_write_file((fs::path(gen_dir) / (inst.meta.id + ".json")).string(),
                                  instance_to_json(inst).dump(2) + "\n");
            }
            std::cerr << "wrote " << gen_count << " instance(s) to " << gen_dir << "\n";
        } else if (*mfd_cmd) {
            Instance inst = load_instance_file(mfd_file);
            MfdResult r = mfd_bruteforce(inst);
            Json j = mfd_to_json(r, inst);
            if (mfd_crosscheck) {
                MfdResult p = mfd_fault_planting(inst);
                j["crosscheck_agrees"] =
                    p.min_faults == r.min_faults && p.mfd_set == r.mfd_set;
            }
            emit(g, g.format == "csv" ? json_to_csv(j) : j.dump(2) + "\n");
        } else if (*graph_cmd) {
            Instance inst = load_instance_file(graph_file);
            TransitionGraphReport rep = transition_graph_check(ReducedSpace(inst));
            (void)graph_check; // the report always carries the BFS result
            emit(g, g.format == "csv" ? json_to_csv(graph_report_to_json(rep))
                                      : graph_report_to_json(rep).dump(2) + "\n");
        } else if (*spec_cmd) {
            Instance inst = load_instance_file(spec_file);
            SpectrumTrace tr = gap_trace(inst, spec_grid, parse_driver(spec_driver));
            if (g.format == "csv") {
                std::ostringstream out;
                write_trace_csv(tr, out);
                emit(g, out.str());
            } else {
                Json rows = Json::array();
                for (auto& p : tr.samples)
                    rows.push_back(Json{{"s", round12(p.s)},
                                        {"e0", round12(p.e0)},
                                        {"e1", round12(p.e1)},
                                        {"gap", round12(p.gap())}});
                MinGap m = min_gap(tr);
                Json j{{"instance_id", inst.meta.id},
                       {"driver", spec_driver},
                       {"degenerate", tr.degenerate},
                       {"min_gap", round12(m.gap_star)},
                       {"gap_location", round12(m.s_star)},
                       {"samples", rows}};
                emit(g, j.dump(2) + "\n");
            }
        } else if (*ann_cmd) {
            Instance inst = load_instance_file(ann_file);
            ScheduleSpec spec;
            spec.kind = schedule_kind_from_name(ann_schedule == "opt-adia" ? "opt_adia"
                                                                           : ann_schedule);
            spec.tf = ann_tf;
            spec.t0 = ann_t0;
            spec.s0 = ann_s0;
            spec.segments = ann_segments;
            spec.mode = opt_adia_mode_from_name(ann_mode);
            spec.trace_path = ann_trace;

            SpectrumTrace trace;
            const SpectrumTrace* trace_ptr = nullptr;
            if (spec.kind == ScheduleKind::OptAdia) {
                if (!ann_trace.empty()) {
                    std::istringstream in(read_file(ann_trace));
                    trace = read_trace_csv(in);
                } else {
                    std::cerr << "computing gap trace for opt-adia schedule...\n";
                    trace = gap_trace(inst, std::max(ann_segments + 1, 101));
                }
                trace_ptr = &trace;
            }
            EvolveOptions opt;
            opt.tol = ann_tol;
            opt.keep_state = false;
            MfdResult mfd = mfd_bruteforce(inst);
            ReducedSpace space(inst);
            AnnealHamiltonian h(space, DriverSign::Stoquastic);
            std::function<double(double)> s_of_t;
            if (spec.kind == ScheduleKind::OptAdia) {
                auto sg = trace.s_grid();
                auto gg = trace.gap_values();
                s_of_t = make_schedule(spec, &sg, &gg);
            } else {
                s_of_t = make_schedule(spec);
            }
            EvolutionResult r = evolve(space, h, s_of_t, spec.tf, mfd, opt);
            Json j = evolution_to_json(r, inst, spec, mfd);
            emit(g, g.format == "csv" ? json_to_csv(j) : j.dump(2) + "\n");
        } else if (*camp_cmd) {
            CampaignSpec spec = campaign_spec_from_json_text(read_file(camp_file));
            if (g.seed != 0) spec.seed = g.seed;
            CampaignResult r = run_campaign(spec, &std::cerr);
            Json j{{"attempts", r.attempts},
                   {"accepted", r.accepted},
                   {"rows", r.rows.size()},
                   {"aggregate_csv", r.csv_path}};
            emit(g, j.dump(2) + "\n");
        }
    } catch (const ParseError& e) {
        std::cerr << Json{{"error", "parse"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const CLI::Error& e) {
        std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const CapExceeded& e) {
        std::cerr << Json{{"error", "cap_exceeded"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << Json{{"error", "non_convergence"},
                          {"message", e.what()},
                          {"residual", e.residual()}}
                         .dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "computation"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    return 0;
}
