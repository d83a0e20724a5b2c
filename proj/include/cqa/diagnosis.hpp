#pragma once

#include "cqa/circuit.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cqa {

/// Wire values plus per-wire fault flags; bit w of each mask belongs to
/// canonical wire w.
struct Diagnosis {
    uint64_t wires = 0;
    uint64_t faults = 0;
    bool operator==(const Diagnosis&) const = default;
};

inline int fault_count(const Diagnosis& d) { return std::popcount(d.faults); }

struct InstanceMeta {
    std::string id;    // stable identifier used in result files
    std::string base;  // topology name when generated
    uint64_t seed = 0;
    uint64_t index = 0;
};

/// A fault-diagnosis problem: a circuit together with the inputs that were
/// applied and the (possibly faulty) outputs that were observed.
struct Instance {
    Circuit circuit;
    uint64_t applied_inputs = 0;   // bit k = input wire k
    uint64_t observed_outputs = 0; // bit j = output wire free_count()+j
    InstanceMeta meta;
};

/// Low output_count bits = healthy output values for the applied inputs.
uint64_t healthy_outputs(const Instance& inst);

/// Operations that scan all 2^(N-N_O) valid diagnoses refuse to run above
/// this many free wires unless the caller raises the cap explicitly.
inline constexpr int kDefaultEnumerationCap = 26;

/// One consistent local configuration of a single gate: values and fault
/// bits of the gate's own wires only.
struct LocalAssignment {
    std::vector<int> in_values, out_values, in_faults, out_faults;
    /// "(1,0,0;0,0,1)" — values in declaration order, then fault bits.
    std::string to_string() const;
};

/// Exhaustive list of consistent assignments for a gate kind, in canonical
/// order (ascending on the formatted tuple). Each output fault bit equals
/// the indicator of disagreement with the healthy gate function; input
/// fault bits are unconstrained, so e.g. a 2-in/1-out gate has 32 rows.
std::vector<LocalAssignment> consistent_assignments(GateKind kind);

/// Fault flags forced by a full wire assignment: a circuit input is flagged
/// iff it differs from the applied value, any other wire iff its value
/// contradicts its producing gate. Throws std::invalid_argument when the
/// output wires do not match the observed outputs.
uint64_t induced_fault_bits(const Instance& inst, uint64_t wire_values);

/// Gate-by-gate consistency of a full diagnosis against the instance.
bool is_valid(const Instance& inst, const Diagnosis& d);

/// The annealer's start state: healthy propagation with the output wires
/// forced to the observed values, fault bits induced (so the only possible
/// faults sit on the disagreeing outputs).
Diagnosis trivial_diagnosis(const Instance& inst);

/// Visits all 2^(N-N_O) valid diagnoses in increasing free-bit order
/// (wire 0 is the least significant bit). Throws CapExceeded above `cap`
/// free wires.
void for_each_valid(const Instance& inst,
                    const std::function<void(uint64_t index, const Diagnosis&)>& fn,
                    int cap = kDefaultEnumerationCap);

std::vector<Diagnosis> enumerate_valid(const Instance& inst, int cap = kDefaultEnumerationCap);

struct MfdResult {
    int min_faults = 0;
    uint64_t degeneracy = 0;        // = mfd_set.size()
    std::vector<uint64_t> mfd_set;  // reduced indices, increasing
};

/// Exhaustive scan of the valid-diagnosis space for the minimum fault count.
MfdResult mfd_bruteforce(const Instance& inst, int cap = kDefaultEnumerationCap);

/// Independent route to the same answer: plant stuck-at values on every
/// k-subset of wires (k ascending), propagate, and keep assignments that
/// reproduce the observed outputs. Cost grows as C(N,k) 2^k, so this is a
/// cross-check for small fault counts, not a production solver.
MfdResult mfd_fault_planting(const Instance& inst, int max_sites = -1);

} // namespace cqa
