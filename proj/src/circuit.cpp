#include "cqa/circuit.hpp"

#include "cqa/errors.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cqa {

namespace {

struct KindInfo {
    const char* name;
    int fan_in;
    int fan_out;
    uint32_t table; // bit (in_bits) = output bit; FAN handled separately
};

// 2-input tables are indexed by in0 | in1<<1.
constexpr KindInfo kKinds[] = {
    {"FAN", 1, 2, 0b10},     // out = in, duplicated
    {"INV", 1, 1, 0b01},     // out = !in
    {"AND", 2, 1, 0b1000},   //
    {"OR", 2, 1, 0b1110},    //
    {"XOR", 2, 1, 0b0110},   //
    {"NOR", 2, 1, 0b0001},   //
    {"NAND", 2, 1, 0b0111},  //
};

const KindInfo& info(GateKind k) { return kKinds[static_cast<int>(k)]; }

} // namespace

int gate_fan_in(GateKind k) { return info(k).fan_in; }
int gate_fan_out(GateKind k) { return info(k).fan_out; }
const char* gate_kind_name(GateKind k) { return info(k).name; }

GateKind gate_kind_from_name(const std::string& name) {
    for (int i = 0; i < static_cast<int>(std::size(kKinds)); ++i)
        if (name == kKinds[i].name) return static_cast<GateKind>(i);
    throw ParseError("unknown gate kind '" + name + "'");
}

uint32_t gate_eval_bits(GateKind kind, uint32_t in_bits) {
    if (kind == GateKind::Fan) {
        uint32_t v = in_bits & 1u;
        return v | (v << 1);
    }
    return (info(kind).table >> in_bits) & 1u;
}

std::vector<int> gate_eval(GateKind kind, const std::vector<int>& inputs) {
    const KindInfo& ki = info(kind);
    if (static_cast<int>(inputs.size()) != ki.fan_in)
        throw std::invalid_argument(std::string(ki.name) + " expects " +
                                    std::to_string(ki.fan_in) + " inputs, got " +
                                    std::to_string(inputs.size()));
    uint32_t in_bits = 0;
    for (size_t i = 0; i < inputs.size(); ++i) in_bits |= (inputs[i] & 1u) << i;
    uint32_t out_bits = gate_eval_bits(kind, in_bits);
    std::vector<int> out(ki.fan_out);
    for (int i = 0; i < ki.fan_out; ++i) out[i] = (out_bits >> i) & 1;
    return out;
}

WireAssignment propagate(const Circuit& c, uint64_t inputs) {
    uint64_t values = inputs & ((c.input_count >= 64 ? ~0ull : (1ull << c.input_count) - 1));
    for (const Gate& g : c.gates) {
        int nin = gate_fan_in(g.kind), nout = gate_fan_out(g.kind);
        uint32_t in_bits = 0;
        for (int i = 0; i < nin; ++i) in_bits |= static_cast<uint32_t>((values >> g.in[i]) & 1) << i;
        uint32_t out_bits = gate_eval_bits(g.kind, in_bits);
        for (int i = 0; i < nout; ++i)
            values = (values & ~(1ull << g.out[i])) | (static_cast<uint64_t>((out_bits >> i) & 1) << g.out[i]);
    }
    return values;
}

std::vector<std::string> validate_structure(const Circuit& c) {
    std::vector<std::string> out;
    auto wire_name = [&](int w) {
        if (w >= 0 && w < static_cast<int>(c.wire_names.size()) && !c.wire_names[w].empty())
            return "'" + c.wire_names[w] + "'";
        return "#" + std::to_string(w);
    };

    if (c.wire_count <= 0) out.push_back("circuit has no wires");
    if (c.input_count < 0 || c.output_count < 0 || c.input_count + c.output_count > c.wire_count)
        out.push_back("input/output counts do not fit in " + std::to_string(c.wire_count) + " wires");
    if (c.wire_count > 63) out.push_back("more than 63 wires is not supported");
    if (!out.empty()) return out;

    std::vector<int> producers(c.wire_count, 0), consumers(c.wire_count, 0);
    for (size_t gi = 0; gi < c.gates.size(); ++gi) {
        const Gate& g = c.gates[gi];
        int nin = gate_fan_in(g.kind), nout = gate_fan_out(g.kind);
        for (int i = 0; i < nin; ++i) {
            int w = g.in[i];
            if (w < 0 || w >= c.wire_count) {
                out.push_back("gate '" + g.name + "' reads out-of-range wire id " + std::to_string(w));
                continue;
            }
            consumers[w]++;
        }
        if (nin == 2 && g.in[0] == g.in[1])
            out.push_back("gate '" + g.name + "' uses wire " + wire_name(g.in[0]) + " for both inputs");
        for (int i = 0; i < nout; ++i) {
            int w = g.out[i];
            if (w < 0 || w >= c.wire_count) {
                out.push_back("gate '" + g.name + "' drives out-of-range wire id " + std::to_string(w));
                continue;
            }
            producers[w]++;
            if (c.is_input(w)) out.push_back("circuit input " + wire_name(w) + " is driven by gate '" + g.name + "'");
        }
        if (nout == 2 && g.out[0] == g.out[1])
            out.push_back("gate '" + g.name + "' drives wire " + wire_name(g.out[0]) + " twice");
    }

    for (int w = 0; w < c.wire_count; ++w) {
        bool in = c.is_input(w), outp = c.is_output(w);
        if (!in && producers[w] == 0) out.push_back("wire " + wire_name(w) + " is not driven by any gate");
        if (producers[w] > 1) out.push_back("wire " + wire_name(w) + " is driven by " + std::to_string(producers[w]) + " gates");
        if (outp && consumers[w] > 0) out.push_back("circuit output " + wire_name(w) + " feeds a gate");
        if (!outp && consumers[w] == 0) out.push_back("wire " + wire_name(w) + " is not consumed by any gate");
        if (!outp && consumers[w] > 1) out.push_back("wire " + wire_name(w) + " feeds " + std::to_string(consumers[w]) + " gates");
    }

    // Cycle check: Kahn over gates, a gate is ready once all inputs are settled.
    std::vector<char> settled(c.wire_count, 0);
    for (int w = 0; w < c.input_count; ++w) settled[w] = 1;
    std::vector<char> done(c.gates.size(), 0);
    bool progress = true;
    size_t remaining = c.gates.size();
    while (progress && remaining > 0) {
        progress = false;
        for (size_t gi = 0; gi < c.gates.size(); ++gi) {
            if (done[gi]) continue;
            const Gate& g = c.gates[gi];
            int nin = gate_fan_in(g.kind);
            bool ready = true;
            for (int i = 0; i < nin; ++i)
                if (g.in[i] < 0 || g.in[i] >= c.wire_count || !settled[g.in[i]]) ready = false;
            if (!ready) continue;
            for (int i = 0; i < gate_fan_out(g.kind); ++i)
                if (g.out[i] >= 0 && g.out[i] < c.wire_count) settled[g.out[i]] = 1;
            done[gi] = 1;
            remaining--;
            progress = true;
        }
    }
    if (remaining > 0) {
        for (size_t gi = 0; gi < c.gates.size(); ++gi)
            if (!done[gi]) {
                out.push_back("gate '" + c.gates[gi].name + "' is part of a cycle or depends on one");
                break;
            }
    }
    return out;
}

namespace {

struct RawGate {
    std::string name;
    GateKind kind;
    std::vector<std::string> ins, outs;
    int line;
};

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

} // namespace

Circuit parse_netlist(const std::string& text) {
    std::vector<std::string> input_names, output_names;
    std::vector<RawGate> raw;
    std::set<std::string> gate_names;

    std::istringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& kw = toks[0];
        if (kw == "INPUT" || kw == "OUTPUT") {
            if (toks.size() != 2) throw ParseError(kw + " expects exactly one wire name", lineno);
            auto& list = (kw == "INPUT") ? input_names : output_names;
            if (std::find(list.begin(), list.end(), toks[1]) != list.end())
                throw ParseError("duplicate " + kw + " declaration for wire '" + toks[1] + "'", lineno);
            list.push_back(toks[1]);
        } else if (kw == "GATE") {
            if (toks.size() < 5) throw ParseError("GATE expects: GATE <name> <KIND> <ins...> -> <outs...>", lineno);
            RawGate g;
            g.name = toks[1];
            g.line = lineno;
            try {
                g.kind = gate_kind_from_name(toks[2]);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), lineno);
            }
            auto arrow = std::find(toks.begin(), toks.end(), "->");
            if (arrow == toks.end()) throw ParseError("GATE line is missing '->'", lineno);
            g.ins.assign(toks.begin() + 3, arrow);
            g.outs.assign(arrow + 1, toks.end());
            if (static_cast<int>(g.ins.size()) != gate_fan_in(g.kind))
                throw ParseError("gate '" + g.name + "': " + gate_kind_name(g.kind) + " takes " +
                                     std::to_string(gate_fan_in(g.kind)) + " input(s), got " +
                                     std::to_string(g.ins.size()),
                                 lineno);
            if (static_cast<int>(g.outs.size()) != gate_fan_out(g.kind))
                throw ParseError("gate '" + g.name + "': " + gate_kind_name(g.kind) + " drives " +
                                     std::to_string(gate_fan_out(g.kind)) + " output(s), got " +
                                     std::to_string(g.outs.size()),
                                 lineno);
            if (!gate_names.insert(g.name).second)
                throw ParseError("duplicate gate name '" + g.name + "'", lineno);
            raw.push_back(std::move(g));
        } else {
            throw ParseError("unknown directive '" + kw + "'", lineno);
        }
    }

    if (input_names.empty()) throw StructureError("netlist declares no INPUT wires");
    if (output_names.empty()) throw StructureError("netlist declares no OUTPUT wires");

    // Collect every wire name and who produces / consumes it.
    std::map<std::string, int> produced_by, consumed_by; // -> raw gate index
    std::set<std::string> all;
    for (auto& n : input_names) all.insert(n);
    for (auto& n : output_names) all.insert(n);
    for (size_t gi = 0; gi < raw.size(); ++gi) {
        for (auto& n : raw[gi].ins) {
            all.insert(n);
            if (consumed_by.count(n))
                throw StructureError("wire '" + n + "' feeds both gate '" + raw[consumed_by[n]].name +
                                     "' and gate '" + raw[gi].name + "'");
            consumed_by[n] = static_cast<int>(gi);
        }
        for (auto& n : raw[gi].outs) {
            all.insert(n);
            if (produced_by.count(n))
                throw StructureError("wire '" + n + "' is driven by both gate '" + raw[produced_by[n]].name +
                                     "' and gate '" + raw[gi].name + "'");
            produced_by[n] = static_cast<int>(gi);
        }
    }
    for (auto& n : input_names) {
        if (produced_by.count(n)) throw StructureError("circuit input '" + n + "' is driven by gate '" + raw[produced_by[n]].name + "'");
        if (!consumed_by.count(n)) throw StructureError("circuit input '" + n + "' is not connected to any gate");
    }
    for (auto& n : output_names) {
        if (consumed_by.count(n)) throw StructureError("circuit output '" + n + "' feeds gate '" + raw[consumed_by[n]].name + "'");
        if (!produced_by.count(n)) throw StructureError("circuit output '" + n + "' is not driven by any gate");
    }
    for (auto& n : all) {
        bool is_in = std::find(input_names.begin(), input_names.end(), n) != input_names.end();
        bool is_out = std::find(output_names.begin(), output_names.end(), n) != output_names.end();
        if (is_in && is_out) throw StructureError("wire '" + n + "' is declared both INPUT and OUTPUT");
        if (!is_in && !produced_by.count(n)) throw StructureError("wire '" + n + "' is not driven by any gate");
        if (!is_out && !consumed_by.count(n)) throw StructureError("wire '" + n + "' is not consumed by any gate");
    }

    // Topological order over gates, smallest original index first among ready
    // gates, so canonical ids are stable under re-parsing.
    std::set<std::string> settled(input_names.begin(), input_names.end());
    std::vector<int> topo;
    std::vector<char> done(raw.size(), 0);
    while (topo.size() < raw.size()) {
        int picked = -1;
        for (size_t gi = 0; gi < raw.size(); ++gi) {
            if (done[gi]) continue;
            bool ready = true;
            for (auto& n : raw[gi].ins)
                if (!settled.count(n)) ready = false;
            if (ready) {
                picked = static_cast<int>(gi);
                break;
            }
        }
        if (picked < 0) {
            for (size_t gi = 0; gi < raw.size(); ++gi)
                if (!done[gi])
                    throw StructureError("gate '" + raw[gi].name + "' is part of a cycle or depends on one");
        }
        done[picked] = 1;
        topo.push_back(picked);
        for (auto& n : raw[picked].outs) settled.insert(n);
    }

    // Assign canonical ids: inputs, then internal wires in topo production
    // order, then outputs.
    int n_wires = static_cast<int>(all.size());
    if (n_wires > 63) throw StructureError("more than 63 wires is not supported");
    std::map<std::string, int> id;
    std::vector<std::string> names(n_wires);
    int next = 0;
    for (auto& n : input_names) {
        id[n] = next;
        names[next++] = n;
    }
    auto is_output_name = [&](const std::string& n) {
        return std::find(output_names.begin(), output_names.end(), n) != output_names.end();
    };
    for (int gi : topo)
        for (auto& n : raw[gi].outs)
            if (!is_output_name(n)) {
                id[n] = next;
                names[next++] = n;
            }
    for (auto& n : output_names) {
        id[n] = next;
        names[next++] = n;
    }

    Circuit c;
    c.wire_count = n_wires;
    c.input_count = static_cast<int>(input_names.size());
    c.output_count = static_cast<int>(output_names.size());
    c.wire_names = std::move(names);
    for (int gi : topo) {
        const RawGate& rg = raw[gi];
        Gate g;
        g.kind = rg.kind;
        g.name = rg.name;
        for (size_t i = 0; i < rg.ins.size(); ++i) g.in[i] = id.at(rg.ins[i]);
        for (size_t i = 0; i < rg.outs.size(); ++i) g.out[i] = id.at(rg.outs[i]);
        c.gates.push_back(std::move(g));
    }

    auto violations = validate_structure(c);
    if (!violations.empty()) throw StructureError(violations.front());
    return c;
}

std::string serialize(const Circuit& c) {
    std::ostringstream out;
    for (int w = 0; w < c.input_count; ++w) out << "INPUT " << c.wire_names[w] << "\n";
    for (int w = c.wire_count - c.output_count; w < c.wire_count; ++w)
        out << "OUTPUT " << c.wire_names[w] << "\n";
    for (const Gate& g : c.gates) {
        out << "GATE " << g.name << " " << gate_kind_name(g.kind);
        for (int i = 0; i < gate_fan_in(g.kind); ++i) out << " " << c.wire_names[g.in[i]];
        out << " ->";
        for (int i = 0; i < gate_fan_out(g.kind); ++i) out << " " << c.wire_names[g.out[i]];
        out << "\n";
    }
    return out.str();
}

namespace {

// The classic 5-input NAND network with its three fanout points made
// explicit as FAN gates: 17 wires, 5 inputs, 2 outputs, 6 NAND + 3 FAN.
constexpr const char* kC17 = R"(INPUT i1
INPUT i2
INPUT i3
INPUT i4
INPUT i5
OUTPUT o1
OUTPUT o2
GATE f1 FAN i3 -> i3a i3b
GATE g1 NAND i1 i3a -> n10
GATE g2 NAND i3b i4 -> n11
GATE f2 FAN n11 -> n11a n11b
GATE g3 NAND i2 n11a -> n16
GATE f3 FAN n16 -> n16a n16b
GATE g4 NAND n11b i5 -> n19
GATE g5 NAND n10 n16a -> o1
GATE g6 NAND n16b n19 -> o2
)";

// A widened two-layer variant of the same idiom: 26 wires, 6 inputs,
// 4 outputs, 8 NAND + 6 FAN. Free wires: 22.
constexpr const char* kC26 = R"(INPUT a
INPUT b
INPUT c
INPUT d
INPUT e
INPUT f
OUTPUT o1
OUTPUT o2
OUTPUT o3
OUTPUT o4
GATE f1 FAN c -> c1 c2
GATE f2 FAN f -> fa fb
GATE g1 NAND a c1 -> n1
GATE g2 NAND c2 d -> n2
GATE f3 FAN n1 -> n1a n1b
GATE f4 FAN n2 -> n2a n2b
GATE g3 NAND b n1a -> n3
GATE g4 NAND n2a e -> n4
GATE f5 FAN n3 -> n3a n3b
GATE f6 FAN n4 -> n4a n4b
GATE g5 NAND n1b n3a -> o1
GATE g6 NAND n3b n4a -> o2
GATE g7 NAND n4b fa -> o3
GATE g8 NAND n2b fb -> o4
)";

} // namespace

Circuit builtin_topology(const std::string& name) {
    if (name == "c17") return parse_netlist(kC17);
    if (name == "c26") return parse_netlist(kC26);
    throw std::invalid_argument("unknown builtin topology '" + name + "' (have: c17, c26)");
}

} // namespace cqa
