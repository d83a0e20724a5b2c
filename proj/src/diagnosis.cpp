#include "cqa/diagnosis.hpp"

#include "cqa/errors.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqa {

namespace {

inline uint64_t low_mask(int bits) { return bits >= 64 ? ~0ull : (1ull << bits) - 1; }

// Fault bits forced by `wires`, without the observed-output precondition.
inline uint64_t induced_faults_nocheck(const Instance& inst, uint64_t wires) {
    const Circuit& c = inst.circuit;
    uint64_t faults = (wires ^ inst.applied_inputs) & low_mask(c.input_count);
    for (const Gate& g : c.gates) {
        int nin = gate_fan_in(g.kind), nout = gate_fan_out(g.kind);
        uint32_t in_bits = 0;
        for (int i = 0; i < nin; ++i) in_bits |= static_cast<uint32_t>((wires >> g.in[i]) & 1) << i;
        uint32_t healthy = gate_eval_bits(g.kind, in_bits);
        for (int i = 0; i < nout; ++i) {
            uint64_t got = (wires >> g.out[i]) & 1;
            faults |= (got ^ ((healthy >> i) & 1)) << g.out[i];
        }
    }
    return faults;
}

inline uint64_t output_bits(const Circuit& c, uint64_t wires) {
    return (wires >> c.free_count()) & low_mask(c.output_count);
}

} // namespace

uint64_t healthy_outputs(const Instance& inst) {
    return output_bits(inst.circuit, propagate(inst.circuit, inst.applied_inputs));
}

std::string LocalAssignment::to_string() const {
    std::string s = "(";
    auto append = [&s](const std::vector<int>& v, bool first_group) {
        for (size_t i = 0; i < v.size(); ++i) {
            if (!first_group || i > 0) s += ',';
            s += v[i] ? '1' : '0';
        }
    };
    append(in_values, true);
    append(out_values, false);
    s += ';';
    append(in_faults, true);
    append(out_faults, false);
    s += ')';
    return s;
}

std::vector<LocalAssignment> consistent_assignments(GateKind kind) {
    int nin = gate_fan_in(kind), nout = gate_fan_out(kind);
    std::vector<LocalAssignment> rows;
    for (uint32_t iv = 0; iv < (1u << nin); ++iv)
        for (uint32_t ov = 0; ov < (1u << nout); ++ov) {
            uint32_t healthy = gate_eval_bits(kind, iv);
            for (uint32_t fi = 0; fi < (1u << nin); ++fi) {
                LocalAssignment a;
                for (int i = 0; i < nin; ++i) a.in_values.push_back((iv >> i) & 1);
                for (int i = 0; i < nout; ++i) a.out_values.push_back((ov >> i) & 1);
                for (int i = 0; i < nin; ++i) a.in_faults.push_back((fi >> i) & 1);
                for (int i = 0; i < nout; ++i) a.out_faults.push_back(((ov ^ healthy) >> i) & 1);
                rows.push_back(std::move(a));
            }
        }
    std::sort(rows.begin(), rows.end(), [](const LocalAssignment& a, const LocalAssignment& b) {
        return a.to_string() < b.to_string();
    });
    return rows;
}

uint64_t induced_fault_bits(const Instance& inst, uint64_t wire_values) {
    if (output_bits(inst.circuit, wire_values) != inst.observed_outputs)
        throw std::invalid_argument("wire assignment does not match the observed outputs");
    return induced_faults_nocheck(inst, wire_values);
}

bool is_valid(const Instance& inst, const Diagnosis& d) {
    const Circuit& c = inst.circuit;
    if (output_bits(c, d.wires) != inst.observed_outputs) return false;
    return d.faults == induced_faults_nocheck(inst, d.wires);
}

Diagnosis trivial_diagnosis(const Instance& inst) {
    const Circuit& c = inst.circuit;
    uint64_t wires = propagate(c, inst.applied_inputs);
    wires = (wires & low_mask(c.free_count())) |
            (inst.observed_outputs << c.free_count());
    return Diagnosis{wires, induced_faults_nocheck(inst, wires)};
}

void for_each_valid(const Instance& inst,
                    const std::function<void(uint64_t, const Diagnosis&)>& fn, int cap) {
    const Circuit& c = inst.circuit;
    int free = c.free_count();
    if (free > cap)
        throw CapExceeded("enumeration over " + std::to_string(free) +
                          " free wires exceeds the cap of " + std::to_string(cap));
    uint64_t fixed = inst.observed_outputs << free;
    for (uint64_t i = 0; i < (1ull << free); ++i) {
        uint64_t wires = i | fixed;
        fn(i, Diagnosis{wires, induced_faults_nocheck(inst, wires)});
    }
}

std::vector<Diagnosis> enumerate_valid(const Instance& inst, int cap) {
    std::vector<Diagnosis> out;
    out.reserve(1ull << inst.circuit.free_count());
    for_each_valid(inst, [&](uint64_t, const Diagnosis& d) { out.push_back(d); }, cap);
    return out;
}

MfdResult mfd_bruteforce(const Instance& inst, int cap) {
    const Circuit& c = inst.circuit;
    int free = c.free_count();
    if (free > cap)
        throw CapExceeded("enumeration over " + std::to_string(free) +
                          " free wires exceeds the cap of " + std::to_string(cap));
    const uint64_t dim = 1ull << free;
    const uint64_t fixed = inst.observed_outputs << free;

    int best = c.wire_count + 1;
#pragma omp parallel for schedule(static) reduction(min : best)
    for (int64_t i = 0; i < static_cast<int64_t>(dim); ++i) {
        uint64_t wires = static_cast<uint64_t>(i) | fixed;
        int fc = std::popcount(induced_faults_nocheck(inst, wires));
        if (fc < best) best = fc;
    }

    MfdResult r;
    r.min_faults = best;
    for (uint64_t i = 0; i < dim; ++i) {
        uint64_t wires = i | fixed;
        if (std::popcount(induced_faults_nocheck(inst, wires)) == best) r.mfd_set.push_back(i);
    }
    r.degeneracy = r.mfd_set.size();
    return r;
}

namespace {

// Wire values when the wires in `stuck_mask` are pinned to `stuck_vals`
// and everything else follows the healthy gates.
uint64_t propagate_with_stuck(const Circuit& c, uint64_t applied, uint64_t stuck_mask,
                              uint64_t stuck_vals) {
    uint64_t values = applied & low_mask(c.input_count);
    values = (values & ~stuck_mask) | (stuck_vals & stuck_mask);
    for (const Gate& g : c.gates) {
        int nin = gate_fan_in(g.kind), nout = gate_fan_out(g.kind);
        uint32_t in_bits = 0;
        for (int i = 0; i < nin; ++i) in_bits |= static_cast<uint32_t>((values >> g.in[i]) & 1) << i;
        uint32_t out_bits = gate_eval_bits(g.kind, in_bits);
        for (int i = 0; i < nout; ++i)
            values = (values & ~(1ull << g.out[i])) |
                     (static_cast<uint64_t>((out_bits >> i) & 1) << g.out[i]);
        values = (values & ~stuck_mask) | (stuck_vals & stuck_mask);
    }
    return values;
}

} // namespace

MfdResult mfd_fault_planting(const Instance& inst, int max_sites) {
    const Circuit& c = inst.circuit;
    const int n = c.wire_count;
    const int upper = max_sites >= 0 ? max_sites : fault_count(trivial_diagnosis(inst));
    const uint64_t free_mask = low_mask(c.free_count());

    for (int k = 0; k <= upper; ++k) {
        std::vector<uint64_t> found;
        std::vector<int> sites(k);
        for (int i = 0; i < k; ++i) sites[i] = i;
        bool more = true;
        while (more) {
            uint64_t stuck_mask = 0;
            for (int s : sites) stuck_mask |= 1ull << s;
            for (uint64_t v = 0; v < (1ull << k); ++v) {
                uint64_t stuck_vals = 0;
                for (int i = 0; i < k; ++i)
                    if ((v >> i) & 1) stuck_vals |= 1ull << sites[i];
                uint64_t wires = propagate_with_stuck(c, inst.applied_inputs, stuck_mask, stuck_vals);
                if (output_bits(c, wires) != inst.observed_outputs) continue;
                // A hit with fewer than k faults would already have ended the
                // search at that smaller k.
                if (std::popcount(induced_faults_nocheck(inst, wires)) == k)
                    found.push_back(wires & free_mask);
            }
            // next k-combination of {0..n-1}
            if (k == 0) break;
            int i = k - 1;
            while (i >= 0 && sites[i] == n - k + i) --i;
            if (i < 0) {
                more = false;
            } else {
                ++sites[i];
                for (int j = i + 1; j < k; ++j) sites[j] = sites[j - 1] + 1;
            }
        }
        if (!found.empty()) {
            std::sort(found.begin(), found.end());
            found.erase(std::unique(found.begin(), found.end()), found.end());
            MfdResult r;
            r.min_faults = k;
            r.mfd_set = std::move(found);
            r.degeneracy = r.mfd_set.size();
            return r;
        }
    }
    throw std::logic_error("fault planting found nothing up to " + std::to_string(upper) +
                           " sites; instance and cap are inconsistent");
}

} // namespace cqa
