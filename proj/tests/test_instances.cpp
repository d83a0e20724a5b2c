#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cqa/errors.hpp"
#include "cqa/instances.hpp"
#include "cqa/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cqa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cqa_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("generated instances are deterministic and well formed") {
    Circuit c17 = builtin_topology("c17");
    Instance a = generate_instance(c17, 7, 3, "c17");
    Instance b = generate_instance(c17, 7, 3, "c17");
    CHECK(a.circuit == b.circuit);
    CHECK(a.applied_inputs == b.applied_inputs);
    CHECK(a.observed_outputs == b.observed_outputs);
    CHECK(a.meta.id == "c17_s7_i000003");

    // Observed outputs are the complement of the healthy ones.
    uint64_t healthy = (propagate(a.circuit, a.applied_inputs) >> 15) & 0b11;
    CHECK(a.observed_outputs == (healthy ^ 0b11));

    // Gate kinds come from the draw set; FAN gates survive untouched.
    int fan = 0;
    for (const Gate& g : a.circuit.gates) {
        if (g.kind == GateKind::Fan) {
            fan++;
            continue;
        }
        CHECK(gate_fan_in(g.kind) == 2);
        CHECK(g.kind != GateKind::Inv);
    }
    CHECK(fan == 3);
    CHECK(validate_structure(a.circuit).empty());

    // Different indices explore different circuits/inputs.
    std::set<std::string> seen;
    for (uint64_t k = 0; k < 10; ++k)
        seen.insert(serialize(generate_instance(c17, 7, k, "c17").circuit));
    CHECK(seen.size() > 1);
}

TEST_CASE("c26 instances flip all four outputs") {
    Circuit c26 = builtin_topology("c26");
    Instance inst = generate_instance(c26, 5, 0, "c26");
    uint64_t healthy = (propagate(inst.circuit, inst.applied_inputs) >> 22) & 0b1111;
    CHECK(inst.observed_outputs == (healthy ^ 0b1111));

    Instance sub = generate_instance(c26, 5, 0, "c26", OutputFlip::RandomSubset);
    uint64_t sub_healthy = (propagate(sub.circuit, sub.applied_inputs) >> 22) & 0b1111;
    CHECK(sub.observed_outputs != sub_healthy); // nonempty flip
}

TEST_CASE("classify matches the brute-force oracle") {
    Circuit c17 = builtin_topology("c17");
    for (uint64_t k = 0; k < 4; ++k) {
        Instance inst = generate_instance(c17, 13, k, "c17");
        Classification cls = classify(inst);
        MfdResult mfd = mfd_bruteforce(inst);
        CHECK(cls.min_faults == mfd.min_faults);
        CHECK(cls.degeneracy == mfd.degeneracy);
        CHECK(cls.min_faults >= 1);
        CHECK(cls.min_faults <= 2);
    }
    Instance clean;
    clean.circuit = c17;
    clean.applied_inputs = 0b00110;
    clean.observed_outputs = (propagate(c17, 0b00110) >> 15) & 0b11;
    Classification cls = classify(clean);
    CHECK(cls.min_faults == 0);
    CHECK(cls.degeneracy == 1);
}

TEST_CASE("instance JSON round trip") {
    Instance inst = generate_instance(builtin_topology("c17"), 21, 4, "c17");
    Json j = instance_to_json(inst);
    Instance back = instance_from_json(j);
    CHECK(back.circuit == inst.circuit);
    CHECK(back.applied_inputs == inst.applied_inputs);
    CHECK(back.observed_outputs == inst.observed_outputs);
    CHECK(back.meta.seed == inst.meta.seed);
    CHECK(back.meta.id == inst.meta.id);

    CHECK(bits_from_string("01101", 5) == 0b10110);
    CHECK(bits_to_string(0b10110, 5) == "01101");
    CHECK_THROWS_AS(bits_from_string("01", 5), ParseError);
    CHECK_THROWS_AS(bits_from_string("01x01", 5), ParseError);
}

TEST_CASE("campaign: classification-only runs are reproducible byte for byte") {
    TempDir dir_a("camp_a"), dir_b("camp_b");
    CampaignSpec spec;
    spec.base = "c17";
    spec.count = 3;
    spec.seed = 20260811;
    spec.grid = 0; // no traces: classification only
    spec.out_dir = dir_a.path.string();

    CampaignResult ra = run_campaign(spec);
    CHECK(ra.rows.size() == 3);
    CHECK(ra.accepted == 3);
    CHECK(ra.attempts >= 3);

    spec.out_dir = dir_b.path.string();
    CampaignResult rb = run_campaign(spec);
    CHECK(slurp(dir_a.path / "aggregate.csv") == slurp(dir_b.path / "aggregate.csv"));
    for (const auto& row : ra.rows)
        CHECK(slurp(dir_a.path / (row.instance_id + ".json")) ==
              slurp(dir_b.path / (row.instance_id + ".json")));

    // CSV shape: empty trailing cells when no trace/evolution ran.
    std::string csv = slurp(dir_a.path / "aggregate.csv");
    CHECK(csv.rfind("instance_id,seed,min_faults,degeneracy,min_gap,gap_location,tf,"
                    "success_probability\n", 0) == 0);
    CHECK(csv.find(",,,,\n") != std::string::npos);
}

TEST_CASE("campaign filters via rejection sampling") {
    TempDir dir("camp_filter");
    CampaignSpec spec;
    spec.base = "c17";
    spec.count = 2;
    spec.seed = 4242;
    spec.grid = 0;
    spec.filters.min_faults = 1;
    spec.filters.non_degenerate = true;
    spec.out_dir = dir.path.string();

    CampaignResult r = run_campaign(spec);
    CHECK(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        CHECK(row.min_faults == 1);
        CHECK(row.degeneracy == 1);
    }
    CHECK(r.attempts >= 2);
}

TEST_CASE("impossible filters exhaust the attempt budget") {
    TempDir dir("camp_bad");
    CampaignSpec spec;
    spec.base = "c17";
    spec.count = 1;
    spec.seed = 1;
    spec.grid = 0;
    spec.filters.min_faults = 0; // outputs were flipped, so min_faults >= 1
    spec.attempt_budget = 40;
    spec.out_dir = dir.path.string();
    CHECK_THROWS_AS(run_campaign(spec), SamplingError);
}

TEST_CASE("campaign with gap traces fills the gap columns") {
    TempDir dir("camp_gap");
    CampaignSpec spec;
    spec.base = "c17";
    spec.count = 2;
    spec.seed = 4242;
    spec.grid = 11;
    spec.out_dir = dir.path.string();

    CampaignResult r = run_campaign(spec);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        REQUIRE(row.min_gap.has_value());
        REQUIRE(row.gap_location.has_value());
        CHECK(*row.min_gap > 0.0);
        CHECK(*row.gap_location >= 0.0);
        CHECK(*row.gap_location <= 1.0);
        CHECK(!row.tf.has_value());
    }
}

TEST_CASE("c26 evolutions require the extended opt-in") {
    CampaignSpec spec;
    spec.base = "c26";
    spec.count = 1;
    spec.seed = 3;
    ScheduleSpec sched;
    sched.kind = ScheduleKind::Param;
    sched.tf = 40.0;
    spec.schedules.push_back(sched);
    CHECK_THROWS_AS(run_campaign(spec), std::invalid_argument);
}

TEST_CASE("campaign spec JSON parsing") {
    const char* text = R"({
        "base": "c17", "count": 4, "seed": 99, "grid": 25,
        "driver": "nonstoq",
        "filters": {"non_degenerate": true, "min_faults": 1},
        "schedules": [{"kind": "param", "tf": 40, "t0": 20, "s0": 0.75},
                      {"kind": "linear", "tf": 40}],
        "out_dir": "camp_out", "tol": 1e-8, "extended": false
    })";
    CampaignSpec spec = campaign_spec_from_json_text(text);
    CHECK(spec.base == "c17");
    CHECK(spec.count == 4);
    CHECK(spec.seed == 99);
    CHECK(spec.grid == 25);
    CHECK(spec.driver == DriverSign::NonStoquastic);
    CHECK(spec.filters.non_degenerate);
    CHECK(spec.filters.min_faults == 1);
    REQUIRE(spec.schedules.size() == 2);
    CHECK(spec.schedules[0].kind == ScheduleKind::Param);
    CHECK(spec.schedules[1].kind == ScheduleKind::Linear);

    CHECK_THROWS_AS(campaign_spec_from_json_text("{nope"), ParseError);
    CHECK_THROWS_AS(campaign_spec_from_json_text(R"({"count": 0})"), ParseError);
    CHECK_THROWS_AS(campaign_spec_from_json_text(R"({"driver": "bogus"})"), ParseError);
}

TEST_CASE("schedule spec JSON round trip") {
    ScheduleSpec spec;
    spec.kind = ScheduleKind::OptAdia;
    spec.tf = 80.0;
    spec.segments = 50;
    spec.mode = OptAdiaMode::Slope;
    spec.trace_path = "trace.csv";
    ScheduleSpec back = schedule_spec_from_json(schedule_spec_to_json(spec));
    CHECK(back.kind == spec.kind);
    CHECK(back.tf == spec.tf);
    CHECK(back.segments == spec.segments);
    CHECK(back.mode == spec.mode);
    CHECK(back.trace_path == spec.trace_path);
}

TEST_CASE("atomic writes leave no partial files behind") {
    TempDir dir("atomic");
    fs::path target = dir.path / "sub" / "file.txt";
    atomic_write_file(target.string(), "payload");
    CHECK(slurp(target) == "payload");
    CHECK(!fs::exists(target.string() + ".tmp"));
    atomic_write_file(target.string(), "payload2");
    CHECK(slurp(target) == "payload2");
}

TEST_CASE("numeric formatting is 12 significant digits") {
    CHECK(fmt12(0.5) == "0.5");
    CHECK(fmt12(1.0 / 3.0) == "0.333333333333");
    CHECK(fmt12(123456789.0) == "123456789");
    CHECK(round12(1.0 / 3.0) == 0.333333333333);
}
