#pragma once

#include "cqa/hamiltonian.hpp"
#include "cqa/schedule.hpp"
#include "cqa/spectrum.hpp"

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace cqa {

struct EvolveOptions {
    double tol = 1e-8;             // absolute and relative integrator tolerance
    double max_norm_drift = 1e-4;  // hard failure past this (tolerance too loose)
    uint64_t max_steps = 50'000'000;
    Exec exec = Exec::Parallel;
    bool keep_state = true;
};

struct EvolutionResult {
    double success_probability = 0.0;
    double norm_drift = 0.0;  // | ||psi(tf)|| - 1 |
    uint64_t steps = 0;       // accepted
    uint64_t rejected_steps = 0;
    double tf = 0.0;
    std::vector<std::complex<double>> state;  // final state, un-normalized
};

/// Total squared amplitude on `mfd_set`, normalized by the state's squared
/// norm (guarding integrator drift). Throws on an empty set.
double success_probability(std::span<const std::complex<double>> state,
                           std::span<const uint64_t> mfd_set);

/// Integrates i dpsi/dt = H(s(t)) psi from the trivial-diagnosis basis state
/// to t = tf with an adaptive Dormand-Prince 5(4) pair. No renormalization
/// happens during integration; the drift at tf is a diagnostic and must stay
/// under max_norm_drift. The MFD set used for scoring comes from the caller
/// (mfd_bruteforce), never from the evolution itself.
EvolutionResult evolve(const ReducedSpace& space, const AnnealHamiltonian& h,
                       const std::function<double(double)>& schedule, double tf,
                       const MfdResult& mfd, const EvolveOptions& opt = {});

/// Convenience wrapper: builds the space, Hamiltonian (stoquastic driver)
/// and brute-force MFD internally. OptAdia schedules need `trace`.
EvolutionResult evolve(const Instance& inst, const ScheduleSpec& spec,
                       const EvolveOptions& opt = {}, const SpectrumTrace* trace = nullptr);

} // namespace cqa
