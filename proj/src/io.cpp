#include "cqa/io.hpp"

#include "cqa/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cqa {

std::string fmt12(double v) {
    char buf[64];
    snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) { return std::stod(fmt12(v)); }

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target);
}

std::string bits_to_string(uint64_t bits, int count) {
    std::string s(count, '0');
    for (int i = 0; i < count; ++i)
        if ((bits >> i) & 1) s[i] = '1';
    return s;
}

uint64_t bits_from_string(const std::string& s, int expected_count) {
    if (static_cast<int>(s.size()) != expected_count)
        throw ParseError("bit string '" + s + "' should have " + std::to_string(expected_count) +
                         " characters");
    uint64_t bits = 0;
    for (int i = 0; i < expected_count; ++i) {
        if (s[i] == '1')
            bits |= 1ull << i;
        else if (s[i] != '0')
            throw ParseError("bit string '" + s + "' contains a character other than 0/1");
    }
    return bits;
}

Json instance_to_json(const Instance& inst) {
    Json j;
    j["circuit"] = serialize(inst.circuit);
    j["inputs"] = bits_to_string(inst.applied_inputs, inst.circuit.input_count);
    j["outputs"] = bits_to_string(inst.observed_outputs, inst.circuit.output_count);
    j["seed"] = inst.meta.seed;
    j["metadata"] = Json{{"id", inst.meta.id}, {"base", inst.meta.base}, {"index", inst.meta.index}};
    return j;
}

namespace {

bool looks_like_netlist(const std::string& s) {
    return s.find('\n') != std::string::npos || s.rfind("INPUT", 0) == 0 ||
           s.rfind("OUTPUT", 0) == 0 || s.rfind("GATE", 0) == 0 || s.rfind("#", 0) == 0;
}

} // namespace

Instance instance_from_json(const Json& j, const std::string& base_dir) {
    if (!j.contains("circuit")) throw ParseError("instance JSON lacks a 'circuit' field");
    std::string circuit_field = j.at("circuit").get<std::string>();
    std::string netlist;
    if (looks_like_netlist(circuit_field)) {
        netlist = circuit_field;
    } else {
        std::filesystem::path p(circuit_field);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        std::ifstream in(p);
        if (!in) throw ParseError("cannot open circuit file '" + p.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        netlist = ss.str();
    }
    Instance inst;
    inst.circuit = parse_netlist(netlist);
    inst.applied_inputs =
        bits_from_string(j.at("inputs").get<std::string>(), inst.circuit.input_count);
    inst.observed_outputs =
        bits_from_string(j.at("outputs").get<std::string>(), inst.circuit.output_count);
    if (j.contains("seed")) inst.meta.seed = j.at("seed").get<uint64_t>();
    if (j.contains("metadata")) {
        const Json& m = j.at("metadata");
        if (m.contains("id")) inst.meta.id = m.at("id").get<std::string>();
        if (m.contains("base")) inst.meta.base = m.at("base").get<std::string>();
        if (m.contains("index")) inst.meta.index = m.at("index").get<uint64_t>();
    }
    return inst;
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("instance file '" + path + "' is not valid JSON: " + e.what());
    }
    std::string dir = std::filesystem::path(path).parent_path().string();
    Instance inst = instance_from_json(j, dir.empty() ? "." : dir);
    if (inst.meta.id.empty())
        inst.meta.id = std::filesystem::path(path).stem().string();
    return inst;
}

Json schedule_spec_to_json(const ScheduleSpec& spec) {
    Json j;
    j["kind"] = schedule_kind_name(spec.kind);
    j["tf"] = round12(spec.tf);
    if (spec.kind == ScheduleKind::Param) {
        j["t0"] = round12(spec.t0);
        j["s0"] = round12(spec.s0);
    }
    if (spec.kind == ScheduleKind::OptAdia) {
        j["segments"] = spec.segments;
        j["mode"] = opt_adia_mode_name(spec.mode);
        if (!spec.trace_path.empty()) j["trace_path"] = spec.trace_path;
    }
    return j;
}

ScheduleSpec schedule_spec_from_json(const Json& j) {
    ScheduleSpec spec;
    spec.kind = schedule_kind_from_name(j.at("kind").get<std::string>());
    spec.tf = j.at("tf").get<double>();
    if (j.contains("t0")) spec.t0 = j.at("t0").get<double>();
    if (j.contains("s0")) spec.s0 = j.at("s0").get<double>();
    if (j.contains("segments")) spec.segments = j.at("segments").get<int>();
    if (j.contains("mode")) spec.mode = opt_adia_mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("trace_path")) spec.trace_path = j.at("trace_path").get<std::string>();
    return spec;
}

Json mfd_to_json(const MfdResult& r, const Instance& inst) {
    constexpr size_t kMaxListed = 4096;
    Json j;
    j["instance_id"] = inst.meta.id;
    j["min_faults"] = r.min_faults;
    j["degeneracy"] = r.degeneracy;
    Json set = Json::array();
    for (size_t i = 0; i < r.mfd_set.size() && i < kMaxListed; ++i) set.push_back(r.mfd_set[i]);
    j["mfd_set"] = set;
    j["mfd_set_truncated"] = r.mfd_set.size() > kMaxListed;
    j["trivial_faults"] = fault_count(trivial_diagnosis(inst));
    return j;
}

Json graph_report_to_json(const TransitionGraphReport& rep) {
    Json j;
    j["dim"] = rep.dim;
    j["degree"] = rep.degree;
    j["regular"] = rep.regular;
    j["connected"] = rep.connected;
    j["reached"] = rep.reached;
    j["mask_fingerprint"] = rep.mask_fingerprint;
    j["masks"] = rep.masks;
    return j;
}

Json evolution_to_json(const EvolutionResult& r, const Instance& inst, const ScheduleSpec& spec,
                       const MfdResult& mfd) {
    Json j;
    j["instance_id"] = inst.meta.id;
    j["schedule"] = schedule_spec_to_json(spec);
    j["tf"] = round12(r.tf);
    j["success_probability"] = round12(r.success_probability);
    j["norm_drift"] = round12(r.norm_drift);
    j["steps"] = r.steps;
    j["rejected_steps"] = r.rejected_steps;
    j["min_faults"] = mfd.min_faults;
    j["degeneracy"] = mfd.degeneracy;
    return j;
}

} // namespace cqa
