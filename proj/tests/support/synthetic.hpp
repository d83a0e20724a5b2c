#pragma once

// Random small circuits and instances for cross-checking oracles in tests.
// Construction keeps every structural invariant by building forward through
// an open-wire pool, then round-trips through the netlist parser so tests
// exercise the same canonicalization as production inputs.

#include "cqa/circuit.hpp"
#include "cqa/diagnosis.hpp"
#include "cqa/prng.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace cqa::testsupport {

// Acyclic circuit whose free-wire count (= sum of gate fan-ins) stays at or
// below max_free. At least one gate, at least one output.
inline Circuit random_small_circuit(Splitmix64& rng, int max_free = 12) {
    const GateKind kinds[] = {GateKind::Fan,  GateKind::Inv, GateKind::And, GateKind::Or,
                              GateKind::Xor,  GateKind::Nor, GateKind::Nand};
    int n_pi = 1 + static_cast<int>(rng.bounded(3));
    int budget = max_free;

    std::vector<std::string> open, pi_open;
    std::ostringstream net;
    int next_wire = 0;
    for (int i = 0; i < n_pi; ++i) {
        std::string w = "w" + std::to_string(next_wire++);
        net << "INPUT " << w << "\n";
        pi_open.push_back(w);
    }

    std::vector<std::string> gate_lines;
    int gate_no = 0;
    while (!pi_open.empty() ||
           (budget > 0 && static_cast<int>(open.size() + pi_open.size()) > 0 && rng.bounded(4) != 0)) {
        int avail = static_cast<int>(open.size() + pi_open.size());
        int max_in = std::min(budget, std::min(avail, 2));
        if (max_in < 1) break;
        GateKind k;
        do {
            k = kinds[rng.bounded(std::size(kinds))];
        } while (gate_fan_in(k) > max_in);

        std::ostringstream line;
        line << "GATE g" << gate_no++ << " " << gate_kind_name(k);
        for (int i = 0; i < gate_fan_in(k); ++i) {
            auto& pool = pi_open.empty() ? open : pi_open;
            size_t pick = rng.bounded(pool.size());
            line << " " << pool[pick];
            pool.erase(pool.begin() + pick);
        }
        line << " ->";
        for (int i = 0; i < gate_fan_out(k); ++i) {
            std::string w = "w" + std::to_string(next_wire++);
            line << " " << w;
            open.push_back(w);
        }
        budget -= gate_fan_in(k);
        gate_lines.push_back(line.str());
    }

    for (const std::string& w : open) net << "OUTPUT " << w << "\n";
    for (const std::string& l : gate_lines) net << l << "\n";
    return parse_netlist(net.str());
}

// Random instance over a random small circuit. force_flip guarantees the
// observed outputs disagree with the healthy ones.
inline Instance random_small_instance(Splitmix64& rng, int max_free = 12,
                                      bool force_flip = false) {
    Instance inst;
    inst.circuit = random_small_circuit(rng, max_free);
    for (int k = 0; k < inst.circuit.input_count; ++k)
        inst.applied_inputs |= static_cast<uint64_t>(rng.next_bit()) << k;
    int n_out = inst.circuit.output_count;
    uint64_t healthy = (propagate(inst.circuit, inst.applied_inputs) >> inst.circuit.free_count()) &
                       ((1ull << n_out) - 1);
    uint64_t flip = force_flip ? 1 + rng.bounded((1ull << n_out) - 1)
                               : rng.bounded(1ull << n_out);
    inst.observed_outputs = healthy ^ flip;
    inst.meta.id = "synthetic";
    return inst;
}

} // namespace cqa::testsupport
