#include "cqa/evolve.hpp"

#include "cqa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqa {

namespace {

using cd = std::complex<double>;

// Dormand-Prince 5(4) tableau (the classic 7-stage FSAL pair).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void combine(std::span<cd> out, std::span<const cd> y, double h,
             std::initializer_list<std::pair<double, const std::vector<cd>*>> terms,
             bool parallel) {
    const int64_t n = static_cast<int64_t>(y.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < n; ++i) {
        cd acc = y[i];
        for (const auto& [coef, k] : terms) acc += (h * coef) * (*k)[i];
        out[i] = acc;
    }
#ifndef _OPENMP
    (void)parallel;
#endif
}

double state_norm(std::span<const cd> y) {
    double s = 0.0;
    for (const cd& v : y) s += std::norm(v);
    return std::sqrt(s);
}

} // namespace

double success_probability(std::span<const cd> state, std::span<const uint64_t> mfd_set) {
    if (mfd_set.empty()) throw std::invalid_argument("MFD set is empty");
    double total = 0.0;
    for (const cd& v : state) total += std::norm(v);
    if (total <= 0.0) throw std::invalid_argument("state has zero norm");
    double hit = 0.0;
    for (uint64_t i : mfd_set) {
        if (i >= state.size()) throw std::invalid_argument("MFD index out of range");
        hit += std::norm(state[i]);
    }
    return hit / total;
}

EvolutionResult evolve(const ReducedSpace& space, const AnnealHamiltonian& h,
                       const std::function<double(double)>& schedule, double tf,
                       const MfdResult& mfd, const EvolveOptions& opt) {
    if (!(tf > 0.0)) throw std::invalid_argument("evolution needs tf > 0");
    if (h.dim() != space.dim()) throw std::invalid_argument("space and Hamiltonian disagree");
    const uint64_t dim = space.dim();
    // The local error test divides the requested tolerance by this margin so
    // the accumulated norm drift over thousands of steps stays well below
    // the tolerance itself.
    constexpr double kErrMargin = 4.0;
    const double atol = opt.tol / kErrMargin, rtol = opt.tol / kErrMargin;

    std::vector<cd> y(dim, cd(0.0, 0.0)), ynew(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim),
        k6(dim), k7(dim);
    y[space.encode(trivial_diagnosis(space.instance()))] = cd(1.0, 0.0);

    // The step runs in a frame rotating at the instantaneous mean energy:
    // rhs = -i (H - E) with E = <y|H|y> refreshed every step. That is an
    // exact global-phase change (undone at output time) which shrinks the
    // local-error scale from ||H|| to the spread of the populated band.
    double e_shift = 0.0;
    auto rhs = [&](double t, std::span<const cd> in, std::span<cd> out) {
        h.apply_rhs(schedule(t), in, out, opt.exec, e_shift);
    };

    double t = 0.0;
    rhs(0.0, y, k1);
    {
        // Initial shift from the raw derivative: E = -Im<y, k1> / ||y||^2,
        // then fix k1 up to the shifted frame.
        double im = 0.0, n2 = 0.0;
        for (uint64_t i = 0; i < dim; ++i) {
            im += y[i].real() * k1[i].imag() - y[i].imag() * k1[i].real();
            n2 += std::norm(y[i]);
        }
        e_shift = -im / n2;
        for (uint64_t i = 0; i < dim; ++i) k1[i] += cd(0.0, e_shift) * y[i];
    }

    // Norm-wise error scale: ||e||_2 against atol + rtol * ||y||_2. For
    // unit-norm states this keeps the per-step error near the tolerance
    // itself instead of sqrt(dim) times it.
    auto norm2 = [&](const std::vector<cd>& v) { return state_norm(v); };

    // Automatic initial step (Hairer's heuristic, order 5).
    double hstep;
    {
        double sc = atol + rtol * norm2(y);
        double d0 = norm2(y) / sc, d1 = norm2(k1) / sc;
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, tf);
        combine(ynew, y, h0, {{1.0, &k1}}, opt.exec == Exec::Parallel);
        rhs(h0, ynew, k2);
        double d2 = 0.0;
        for (uint64_t i = 0; i < dim; ++i) d2 += std::norm(k2[i] - k1[i]);
        d2 = std::sqrt(d2) / sc / h0;
        double dm = std::max(d1, d2);
        double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        hstep = std::min({100.0 * h0, h1, tf});
    }

    EvolutionResult result;
    result.tf = tf;
    const bool par = opt.exec == Exec::Parallel;
    bool last_rejected = false;
    double phase = 0.0; // integral of e_shift over accepted steps

    while (t < tf) {
        if (result.steps + result.rejected_steps >= opt.max_steps)
            throw EvolveError("integrator exceeded the step budget");
        if (hstep < 1e-14 * std::max(1.0, t))
            throw EvolveError("step size underflow at t=" + std::to_string(t));
        if (t + hstep > tf) hstep = tf - t;

        combine(ynew, y, hstep, {{a21, &k1}}, par);
        rhs(t + c2 * hstep, ynew, k2);
        combine(ynew, y, hstep, {{a31, &k1}, {a32, &k2}}, par);
        rhs(t + c3 * hstep, ynew, k3);
        combine(ynew, y, hstep, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, par);
        rhs(t + c4 * hstep, ynew, k4);
        combine(ynew, y, hstep, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, par);
        rhs(t + c5 * hstep, ynew, k5);
        combine(ynew, y, hstep, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, par);
        rhs(t + hstep, ynew, k6);
        combine(ynew, y, hstep, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, par);
        rhs(t + hstep, ynew, k7);

        // Error estimate in fixed-order passes (deterministic).
        double err2 = 0.0, ny2 = 0.0, nynew2 = 0.0;
        for (uint64_t i = 0; i < dim; ++i) {
            cd e = hstep * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            err2 += std::norm(e);
            ny2 += std::norm(y[i]);
            nynew2 += std::norm(ynew[i]);
        }
        double sc = atol + rtol * std::sqrt(std::max(ny2, nynew2));
        double err = std::sqrt(err2) / sc;

        if (err <= 1.0) {
            t += hstep;
            phase += e_shift * hstep;
            y.swap(ynew);
            k1.swap(k7); // FSAL

            // Refresh the frame energy from the accepted derivative and move
            // k1 into the new frame: f_new = f_old + i (E_new - E_old) y.
            double im = 0.0, n2 = 0.0;
            for (uint64_t i = 0; i < dim; ++i) {
                im += y[i].real() * k1[i].imag() - y[i].imag() * k1[i].real();
                n2 += std::norm(y[i]);
            }
            double e_new = e_shift - im / n2;
            const cd rot(0.0, e_new - e_shift);
            for (uint64_t i = 0; i < dim; ++i) k1[i] += rot * y[i];
            e_shift = e_new;

            result.steps++;
            double grow = last_rejected ? 1.0 : 5.0;
            hstep *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, grow);
            last_rejected = false;
        } else {
            result.rejected_steps++;
            hstep *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            last_rejected = true;
        }
    }

    // Undo the accumulated frame phase so the state solves the original
    // equation i dpsi/dt = H psi.
    const cd unrot = std::exp(cd(0.0, -phase));
    for (uint64_t i = 0; i < dim; ++i) y[i] *= unrot;

    double norm = state_norm(y);
    result.norm_drift = std::abs(norm - 1.0);
    if (result.norm_drift > opt.max_norm_drift)
        throw EvolveError("norm drift " + std::to_string(result.norm_drift) +
                          " exceeds the bound; tolerance is too loose for this run");
    result.success_probability = success_probability(y, mfd.mfd_set);
    if (opt.keep_state) result.state = std::move(y);
    return result;
}

EvolutionResult evolve(const Instance& inst, const ScheduleSpec& spec, const EvolveOptions& opt,
                       const SpectrumTrace* trace) {
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, DriverSign::Stoquastic);
    MfdResult mfd = mfd_bruteforce(inst);

    std::function<double(double)> s_of_t;
    if (spec.kind == ScheduleKind::OptAdia) {
        if (!trace) throw std::invalid_argument("opt_adia evolution needs a gap trace");
        auto s = trace->s_grid();
        auto g = trace->gap_values();
        s_of_t = make_schedule(spec, &s, &g);
    } else {
        s_of_t = make_schedule(spec);
    }
    return evolve(space, h, s_of_t, spec.tf, mfd, opt);
}

} // namespace cqa
