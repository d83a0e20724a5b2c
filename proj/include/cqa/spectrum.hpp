#pragma once

#include "cqa/hamiltonian.hpp"
#include "cqa/schedule.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace cqa {

struct SpectrumSample {
    double s = 0, e0 = 0, e1 = 0;
    double gap() const { return e1 - e0; }
};

/// Instances whose gap at s=1 falls below this are treated as spectrally
/// degenerate; analytically that gap is either 0 or at least 2.
inline constexpr double kDegenerateGapThreshold = 1e-9;

struct SpectrumTrace {
    std::vector<SpectrumSample> samples; // s strictly increasing over [0, 1]
    DriverSign sign = DriverSign::Stoquastic;
    bool degenerate = false; // gap at s=1 below kDegenerateGapThreshold

    std::vector<double> s_grid() const;
    std::vector<double> gap_values() const;
};

using MatVec = std::function<void(std::span<const double>, std::span<double>)>;

struct EigenOptions {
    int k = 2;                 // how many smallest eigenpairs
    double tol = 1e-10;        // residual <= tol * scale estimate of ||H||
    int block = 2;             // Krylov block width (>= 2 resolves doublets)
    int max_basis = 40;        // basis columns per restart cycle
    int max_cycles = 600;
    uint64_t seed = 0x51ac5eed;       // start-block seed
    uint64_t dense_threshold = 4096;  // direct solve at or below this dim
};

struct EigenResult {
    std::vector<double> values;                // ascending, k entries
    std::vector<std::vector<double>> vectors;  // matching eigenvectors
    int cycles = 0;
    double residual = 0.0;  // max explicit residual over returned pairs
    bool dense = false;
};

/// k smallest eigenpairs of a Hermitian operator given only its action.
/// Dense direct solve at small dimensions, restarted block Lanczos with full
/// reorthogonalization otherwise. `warm_start` seeds the initial block.
/// Throws ConvergenceError (with the best residual) when max_cycles runs out.
EigenResult lowest_eigenpairs(const MatVec& h, uint64_t dim, const EigenOptions& opt = {},
                              const std::vector<std::vector<double>>* warm_start = nullptr);

struct GapTraceOptions {
    int grid = 100;  // uniform s grid including both endpoints
    EigenOptions eig;
    Exec exec = Exec::Parallel;  // matvec parallelism
};

/// (s, E0, E1) along the anneal on a uniform s grid. Endpoints are diagonal
/// and read off exactly; interior points reuse the previous point's
/// eigenvectors as the Lanczos warm start.
SpectrumTrace gap_trace(const AnnealHamiltonian& h, const GapTraceOptions& opt = {});
SpectrumTrace gap_trace(const Instance& inst, int grid = 100,
                        DriverSign sign = DriverSign::Stoquastic);

struct MinGap {
    double s_star = 0;
    double gap_star = 0;
    bool degenerate = false;  // searched only s <= 1 - interior_eps
};

/// Minimum-gap sample refined by a 3-point quadratic fit. For degenerate
/// traces (gap collapsing at s=1) the search is restricted to
/// s <= 1 - interior_eps and flagged. Throws for traces under 3 samples.
MinGap min_gap(const SpectrumTrace& trace, double interior_eps = 0.1);

/// CSV with header `s,e0,e1,gap`, one row per sample, 12 significant digits.
void write_trace_csv(const SpectrumTrace& trace, std::ostream& out);
SpectrumTrace read_trace_csv(std::istream& in);

/// Gap-adapted schedule straight from a trace (see schedule.hpp).
PiecewiseLinearSchedule s_opt_adia(const SpectrumTrace& trace, double tf, int segments = 100,
                                   OptAdiaMode mode = OptAdiaMode::Time);

} // namespace cqa
