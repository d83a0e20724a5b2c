#include "cqa/hamiltonian.hpp"

#include "cqa/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqa {

namespace {

inline uint64_t low_mask(int bits) { return bits >= 64 ? ~0ull : (1ull << bits) - 1; }

// y[i] = (diag[i] - shift) * x[i] + sum_k w_k * x[i ^ m_k]; each y[i] is
// produced by a single thread with the flip terms accumulated in list order,
// so the result does not depend on the thread count.
template <typename T, bool MinusI>
void apply_kernel(uint64_t dim, const double* diag_a, double wa, const double* diag_b, double wb,
                  double shift, const uint64_t* masks, const double* weights, size_t n_flips,
                  const T* x, T* y, bool parallel) {
    const int64_t n = static_cast<int64_t>(dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < n; ++i) {
        double d = -shift;
        if (diag_a) d += wa * diag_a[i];
        if (diag_b) d += wb * diag_b[i];
        T acc = d * x[i];
        for (size_t k = 0; k < n_flips; ++k) acc += weights[k] * x[static_cast<uint64_t>(i) ^ masks[k]];
        if constexpr (MinusI) {
            y[i] = T(acc.imag(), -acc.real());
        } else {
            y[i] = acc;
        }
    }
#ifndef _OPENMP
    (void)parallel;
#endif
}

} // namespace

ReducedSpace::ReducedSpace(Instance inst, int cap) : inst_(std::move(inst)) {
    free_bits_ = inst_.circuit.free_count();
    if (free_bits_ > cap)
        throw CapExceeded("reduced space over " + std::to_string(free_bits_) +
                          " free wires exceeds the cap of " + std::to_string(cap));
    fixed_output_bits_ = inst_.observed_outputs << free_bits_;
}

Diagnosis ReducedSpace::decode(uint64_t index) const {
    uint64_t wires = (index & (dim() - 1)) | fixed_output_bits_;
    return Diagnosis{wires, induced_fault_bits(inst_, wires)};
}

std::vector<FlipGenerator> driver_generators(const Circuit& c) {
    std::vector<FlipGenerator> gens;
    for (size_t gi = 0; gi < c.gates.size(); ++gi) {
        const Gate& g = c.gates[gi];
        int nin = gate_fan_in(g.kind);
        for (uint32_t subset = 1; subset < (1u << nin); ++subset) {
            FlipGenerator fg;
            fg.gate = static_cast<int>(gi);
            for (int i = 0; i < nin; ++i)
                if ((subset >> i) & 1) fg.mask |= 1ull << g.in[i];
            fg.coeff = -1.0;
            gens.push_back(fg);
        }
    }
    return gens;
}

ReducedOperator build_driver(const ReducedSpace& space, DriverSign sign) {
    ReducedOperator op;
    op.dim = space.dim();
    op.generators = driver_generators(space.instance().circuit);
    if (sign == DriverSign::NonStoquastic)
        for (auto& g : op.generators) g.coeff = -g.coeff;
    for (const auto& g : op.generators)
        if (g.mask == 0 || (g.mask & ~(op.dim - 1)))
            throw std::logic_error("driver mask touches a non-free wire");
    return op;
}

ReducedOperator build_initial(const ReducedSpace& space) {
    const Instance& inst = space.instance();
    const int two_n = 2 * inst.circuit.wire_count;
    const Diagnosis d0 = trivial_diagnosis(inst);

    ReducedOperator op;
    op.dim = space.dim();
    op.diagonal.resize(op.dim);
    const uint64_t fixed = inst.observed_outputs << space.free_bits();
    double* diag = op.diagonal.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(op.dim); ++i) {
        uint64_t wires = static_cast<uint64_t>(i) | fixed;
        uint64_t faults = induced_fault_bits(inst, wires);
        int dist = std::popcount(wires ^ d0.wires) + std::popcount(faults ^ d0.faults);
        diag[i] = static_cast<double>(-two_n + 2 * dist);
    }
    return op;
}

ReducedOperator build_final(const ReducedSpace& space) {
    const Instance& inst = space.instance();
    const int n = inst.circuit.wire_count;

    ReducedOperator op;
    op.dim = space.dim();
    op.diagonal.resize(op.dim);
    const uint64_t fixed = inst.observed_outputs << space.free_bits();
    double* diag = op.diagonal.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(op.dim); ++i) {
        uint64_t wires = static_cast<uint64_t>(i) | fixed;
        diag[i] = static_cast<double>(2 * std::popcount(induced_fault_bits(inst, wires)) - n);
    }
    return op;
}

LinearCombination::LinearCombination(std::span<const double> weights,
                                     std::span<const ReducedOperator* const> parts) {
    if (weights.size() != parts.size() || parts.empty())
        throw std::invalid_argument("assemble needs one weight per operator part");
    dim_ = parts[0]->dim;
    for (const ReducedOperator* p : parts)
        if (p->dim != dim_) throw std::invalid_argument("operator parts have mismatched dimensions");
    for (size_t k = 0; k < parts.size(); ++k) {
        const ReducedOperator& p = *parts[k];
        if (!p.diagonal.empty()) {
            if (diag_.empty()) diag_.assign(dim_, 0.0);
            for (uint64_t i = 0; i < dim_; ++i) diag_[i] += weights[k] * p.diagonal[i];
        }
        for (const FlipGenerator& g : p.generators) {
            double w = weights[k] * g.coeff;
            if (w != 0.0) {
                masks_.push_back(g.mask);
                weights_.push_back(w);
            }
        }
    }
}

void LinearCombination::apply(std::span<const double> x, std::span<double> y, Exec exec) const {
    if (x.size() != dim_ || y.size() != dim_)
        throw std::invalid_argument("vector size does not match operator dimension");
    apply_kernel<double, false>(dim_, diag_.empty() ? nullptr : diag_.data(), 1.0, nullptr, 0.0,
                                0.0, masks_.data(), weights_.data(), masks_.size(), x.data(),
                                y.data(), exec == Exec::Parallel);
}

void LinearCombination::apply(std::span<const std::complex<double>> x,
                              std::span<std::complex<double>> y, Exec exec) const {
    if (x.size() != dim_ || y.size() != dim_)
        throw std::invalid_argument("vector size does not match operator dimension");
    apply_kernel<std::complex<double>, false>(dim_, diag_.empty() ? nullptr : diag_.data(), 1.0,
                                              nullptr, 0.0, 0.0, masks_.data(), weights_.data(),
                                              masks_.size(), x.data(), y.data(),
                                              exec == Exec::Parallel);
}

LinearCombination assemble(double s, const ReducedOperator& initial, const ReducedOperator& driver,
                           const ReducedOperator& final_part) {
    Envelopes e = envelopes(s);
    const double w[3] = {e.a, e.b, e.c};
    const ReducedOperator* p[3] = {&initial, &driver, &final_part};
    return LinearCombination(w, p);
}

AnnealHamiltonian::AnnealHamiltonian(const ReducedSpace& space, DriverSign sign)
    : initial_(build_initial(space)), driver_(build_driver(space, sign)),
      final_(build_final(space)), sign_(sign) {
    masks_.reserve(driver_.generators.size());
    coeffs_.reserve(driver_.generators.size());
    for (const auto& g : driver_.generators) {
        masks_.push_back(g.mask);
        coeffs_.push_back(g.coeff);
    }
}

void AnnealHamiltonian::apply(double s, std::span<const double> x, std::span<double> y,
                              Exec exec) const {
    if (x.size() != dim() || y.size() != dim())
        throw std::invalid_argument("vector size does not match operator dimension");
    Envelopes e = envelopes(s);
    std::vector<double> ws(coeffs_.size());
    for (size_t k = 0; k < ws.size(); ++k) ws[k] = e.b * coeffs_[k];
    apply_kernel<double, false>(dim(), initial_.diagonal.data(), e.a, final_.diagonal.data(), e.c,
                                0.0, masks_.data(), ws.data(), ws.size(), x.data(), y.data(),
                                exec == Exec::Parallel);
}

void AnnealHamiltonian::apply(double s, std::span<const std::complex<double>> x,
                              std::span<std::complex<double>> y, Exec exec) const {
    if (x.size() != dim() || y.size() != dim())
        throw std::invalid_argument("vector size does not match operator dimension");
    Envelopes e = envelopes(s);
    std::vector<double> ws(coeffs_.size());
    for (size_t k = 0; k < ws.size(); ++k) ws[k] = e.b * coeffs_[k];
    apply_kernel<std::complex<double>, false>(dim(), initial_.diagonal.data(), e.a,
                                              final_.diagonal.data(), e.c, 0.0, masks_.data(),
                                              ws.data(), ws.size(), x.data(), y.data(),
                                              exec == Exec::Parallel);
}

void AnnealHamiltonian::apply_rhs(double s, std::span<const std::complex<double>> x,
                                  std::span<std::complex<double>> y, Exec exec,
                                  double shift) const {
    if (x.size() != dim() || y.size() != dim())
        throw std::invalid_argument("vector size does not match operator dimension");
    Envelopes e = envelopes(s);
    std::vector<double> ws(coeffs_.size());
    for (size_t k = 0; k < ws.size(); ++k) ws[k] = e.b * coeffs_[k];
    apply_kernel<std::complex<double>, true>(dim(), initial_.diagonal.data(), e.a,
                                             final_.diagonal.data(), e.c, shift, masks_.data(),
                                             ws.data(), ws.size(), x.data(), y.data(),
                                             exec == Exec::Parallel);
}

TransitionGraphReport transition_graph_check(const ReducedSpace& space) {
    TransitionGraphReport rep;
    rep.dim = space.dim();
    auto gens = driver_generators(space.instance().circuit);
    for (const auto& g : gens) rep.masks.push_back(g.mask);
    std::sort(rep.masks.begin(), rep.masks.end());
    rep.regular = std::adjacent_find(rep.masks.begin(), rep.masks.end()) == rep.masks.end() &&
                  std::none_of(rep.masks.begin(), rep.masks.end(), [](uint64_t m) { return m == 0; });
    rep.degree = static_cast<int>(rep.masks.size());

    // FNV-1a over the sorted mask set; equal fingerprints across instances of
    // one topology certify isomorphic transition graphs (same Cayley graph).
    uint64_t h = 1469598103934665603ull;
    for (uint64_t m : rep.masks)
        for (int b = 0; b < 8; ++b) {
            h ^= (m >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    char buf[19];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    rep.mask_fingerprint = buf;

    // BFS from the trivial diagnosis over XOR moves.
    const uint64_t dim = rep.dim;
    const uint64_t start = space.encode(trivial_diagnosis(space.instance()));
    std::vector<char> seen(dim, 0);
    std::deque<uint64_t> queue;
    seen[start] = 1;
    queue.push_back(start);
    uint64_t reached = 0;
    while (!queue.empty()) {
        uint64_t u = queue.front();
        queue.pop_front();
        ++reached;
        for (uint64_t m : rep.masks) {
            uint64_t v = u ^ m;
            if (!seen[v]) {
                seen[v] = 1;
                queue.push_back(v);
            }
        }
    }
    rep.reached = reached;
    rep.connected = reached == dim;
    return rep;
}

std::vector<std::tuple<uint64_t, uint64_t, double>> sparse_coordinates(const LinearCombination& h) {
    if (h.dim() > (1ull << 16))
        throw CapExceeded("sparse materialization is limited to dimension 2^16");
    std::vector<std::tuple<uint64_t, uint64_t, double>> out;
    for (uint64_t i = 0; i < h.dim(); ++i) {
        if (!h.diagonal().empty() && h.diagonal()[i] != 0.0)
            out.emplace_back(i, i, h.diagonal()[i]);
        for (size_t k = 0; k < h.flip_masks().size(); ++k)
            out.emplace_back(i, i ^ h.flip_masks()[k], h.flip_weights()[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void dump_coordinates(const LinearCombination& h, std::ostream& out) {
    char buf[64];
    for (const auto& [r, c, v] : sparse_coordinates(h)) {
        snprintf(buf, sizeof buf, "%llu %llu %.12g\n", static_cast<unsigned long long>(r),
                 static_cast<unsigned long long>(c), v);
        out << buf;
    }
}

} // namespace cqa
