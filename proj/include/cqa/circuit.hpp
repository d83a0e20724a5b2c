#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cqa {

/// Gate kinds. FAN copies one input to two outputs, INV is 1-in/1-out, the
/// rest are the usual 2-in/1-out logic functions. Arity is fixed per kind;
/// a new k-input kind would only need its own truth-table row below.
enum class GateKind { Fan, Inv, And, Or, Xor, Nor, Nand };

int gate_fan_in(GateKind k);
int gate_fan_out(GateKind k);
const char* gate_kind_name(GateKind k);
GateKind gate_kind_from_name(const std::string& name); // throws ParseError

/// Healthy gate function. `inputs.size()` must equal gate_fan_in(kind);
/// throws std::invalid_argument otherwise.
std::vector<int> gate_eval(GateKind kind, const std::vector<int>& inputs);

/// Branch-light variant for inner loops: the low fan_in bits of `in_bits`
/// are the input values; the low fan_out bits of the result are the outputs.
uint32_t gate_eval_bits(GateKind kind, uint32_t in_bits);

struct Gate {
    GateKind kind = GateKind::Nand;
    std::string name;
    std::array<int, 2> in{{-1, -1}};  // canonical wire ids, fan_in used
    std::array<int, 2> out{{-1, -1}}; // canonical wire ids, fan_out used
    bool operator==(const Gate&) const = default;
};

/// Structural netlist. Canonical wire ids: inputs are 0..input_count-1 in
/// declaration order, internal wires follow in topological order of their
/// producing gate (output slot 0 before slot 1), and the outputs occupy the
/// last output_count ids in declaration order. Gates are stored in
/// topological order. Circuits are immutable once built and safe to share
/// across threads; every library entry point treats them as read-only.
struct Circuit {
    int wire_count = 0;
    int input_count = 0;
    int output_count = 0;
    std::vector<Gate> gates;
    std::vector<std::string> wire_names; // size wire_count once canonical

    /// Wires whose value parameterizes a valid diagnosis (all but the outputs).
    int free_count() const { return wire_count - output_count; }
    bool is_input(int w) const { return w >= 0 && w < input_count; }
    bool is_output(int w) const { return w >= wire_count - output_count && w < wire_count; }
    bool operator==(const Circuit&) const = default;
};

/// Parses the line-oriented netlist format ('#' starts a comment):
///
///   INPUT <wire>
///   OUTPUT <wire>
///   GATE <name> <KIND> <in1> [<in2>] -> <out1> [<out2>]
///
/// Wires are free-form identifiers; canonical integer ids are assigned here.
/// Throws ParseError on bad syntax and StructureError when the netlist
/// violates a circuit invariant, naming the offending wire or gate.
Circuit parse_netlist(const std::string& text);

/// Emits the netlist text for a canonical circuit.
/// parse_netlist(serialize(c)) == c.
std::string serialize(const Circuit& c);

/// Empty iff all structural invariants hold; otherwise one message per
/// violation, each naming the wire or gate involved. Works on raw
/// (not yet canonicalized) circuits as well.
std::vector<std::string> validate_structure(const Circuit& c);

/// Shipped topologies. "c17": 17 wires, 5 inputs, 2 outputs, 6 NAND + 3 FAN.
/// "c26": 26 wires, 6 inputs, 4 outputs, 8 NAND + 6 FAN (see docs/ for the
/// wiring). Throws std::invalid_argument for any other name.
Circuit builtin_topology(const std::string& name);

/// A full wire-value assignment, one bit per wire; bit w is wire w.
using WireAssignment = uint64_t;

/// Healthy-circuit evaluation. The low input_count bits of `inputs` are the
/// applied input values; bit w of the result is the value wire w settles to.
WireAssignment propagate(const Circuit& c, uint64_t inputs);

} // namespace cqa
