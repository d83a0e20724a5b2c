#include "cqa/spectrum.hpp"

#include "cqa/errors.hpp"
#include "cqa/prng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace cqa {

std::vector<double> SpectrumTrace::s_grid() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& p : samples) out.push_back(p.s);
    return out;
}

std::vector<double> SpectrumTrace::gap_values() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& p : samples) out.push_back(p.gap());
    return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

EigenResult dense_solve(const MatVec& h, uint64_t dim, int k) {
    MatrixXd m(dim, dim);
    std::vector<double> e(dim, 0.0), col(dim);
    for (uint64_t j = 0; j < dim; ++j) {
        e[j] = 1.0;
        h(e, col);
        for (uint64_t i = 0; i < dim; ++i) m(i, j) = col[i];
        e[j] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
    EigenResult r;
    r.dense = true;
    int kk = std::min<int>(k, static_cast<int>(dim));
    for (int i = 0; i < kk; ++i) {
        r.values.push_back(solver.eigenvalues()(i));
        r.vectors.emplace_back(solver.eigenvectors().col(i).data(),
                               solver.eigenvectors().col(i).data() + dim);
    }
    return r;
}

// Thick-restart block Lanczos with full (two-pass) reorthogonalization.
// Each cycle seeds the basis with the kept Ritz vectors plus the natural
// continuation block, then extends with new Krylov blocks. T is assembled
// from the explicitly computed projections, so the Rayleigh-Ritz step stays
// exact even across restarts.
class BlockLanczos {
  public:
    BlockLanczos(const MatVec& h, uint64_t dim, const EigenOptions& opt)
        : h_(h), dim_(dim), opt_(opt) {
        p_ = std::max(2, std::max(opt.block, std::min(opt.k, 4)));
        p_ = static_cast<int>(std::min<uint64_t>(p_, dim / 2));
        p_ = std::max(p_, 1);
        max_cols_ = std::max(4 * p_, opt.max_basis);
        if (static_cast<uint64_t>(max_cols_ + p_) > dim)
            max_cols_ = std::max(2 * p_, static_cast<int>(dim) - p_);
        keep_ = std::min(opt.k + 3 * p_, max_cols_ - 2 * p_);
        v_.resize(static_cast<size_t>(max_cols_ + p_) * dim_);
    }

    EigenResult run(const std::vector<std::vector<double>>* warm) {
        const int k = std::min<int>(opt_.k, static_cast<int>(dim_));
        Eigen::Map<MatrixXd> v(v_.data(), dim_, max_cols_ + p_);
        MatrixXd kept(dim_, 0);
        VectorXd kept_theta(0);
        MatrixXd x = start_block(warm);
        double best_residual = std::numeric_limits<double>::infinity();
        EigenResult result;

        for (int cycle = 0; cycle < opt_.max_cycles; ++cycle) {
            int q = factorize(kept, kept_theta, x);
            Eigen::SelfAdjointEigenSolver<MatrixXd> small(t_.topLeftCorner(q, q));
            const VectorXd& theta = small.eigenvalues();
            const MatrixXd& y = small.eigenvectors();
            scale_ = std::max({scale_, std::abs(theta(0)), std::abs(theta(q - 1))});

            int want = std::min(q, k);
            double worst = 0.0;
            for (int i = 0; i < want; ++i)
                worst = std::max(worst, (b_ext_ * y.col(i).tail(p_)).norm());
            best_residual = std::min(best_residual, worst);

            if (worst <= opt_.tol * scale_ && q >= k) {
                // Verify with real matvecs before accepting.
                MatrixXd u = v.leftCols(q) * y.leftCols(want);
                double explicit_worst = 0.0;
                std::vector<double> hu(dim_);
                for (int i = 0; i < want; ++i) {
                    std::span<const double> ui(u.col(i).data(), dim_);
                    h_(ui, hu);
                    double r2 = 0.0;
                    for (uint64_t j = 0; j < dim_; ++j) {
                        double d = hu[j] - theta(i) * u(j, i);
                        r2 += d * d;
                    }
                    explicit_worst = std::max(explicit_worst, std::sqrt(r2));
                }
                best_residual = std::min(best_residual, explicit_worst);
                if (explicit_worst <= 2.0 * opt_.tol * scale_) {
                    result.cycles = cycle + 1;
                    result.residual = explicit_worst;
                    for (int i = 0; i < want; ++i) {
                        result.values.push_back(theta(i));
                        result.vectors.emplace_back(u.col(i).data(), u.col(i).data() + dim_);
                    }
                    return result;
                }
            }

            // Thick restart: keep the lowest Ritz vectors, continue from the
            // extension block (already orthonormal to all of them).
            int l = std::min(keep_, q - p_);
            kept = v.leftCols(q) * y.leftCols(l);
            kept_theta = theta.head(l);
            x = v.middleCols(q, p_);
        }
        throw ConvergenceError("eigensolver did not converge within " +
                                   std::to_string(opt_.max_cycles) + " restart cycles",
                               best_residual);
    }

  private:
    MatrixXd start_block(const std::vector<std::vector<double>>* warm) {
        MatrixXd x(dim_, p_);
        Splitmix64 rng(opt_.seed);
        int have = 0;
        if (warm) {
            for (const auto& w : *warm) {
                if (have >= p_ || w.size() != dim_) break;
                for (uint64_t i = 0; i < dim_; ++i) x(i, have) = w[i];
                ++have;
            }
        }
        for (int j = have; j < p_; ++j)
            for (uint64_t i = 0; i < dim_; ++i) x(i, j) = rng.next_unit() - 0.5;
        orthonormalize(x);
        return x;
    }

    void orthonormalize(MatrixXd& x) {
        Splitmix64 rng(opt_.seed ^ 0xa5a5a5a5ull);
        for (int j = 0; j < x.cols(); ++j) {
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i < j; ++i) x.col(j) -= x.col(i).dot(x.col(j)) * x.col(i);
            double n = x.col(j).norm();
            if (n < 1e-12) {
                for (uint64_t i = 0; i < dim_; ++i) x(i, j) = rng.next_unit() - 0.5;
                for (int pass = 0; pass < 2; ++pass)
                    for (int i = 0; i < j; ++i) x.col(j) -= x.col(i).dot(x.col(j)) * x.col(i);
                n = x.col(j).norm();
            }
            x.col(j) /= n;
        }
    }

    // Seeds [kept | x], extends with Krylov blocks up to max_cols_ columns,
    // and leaves the extension block at columns [q, q+p). Returns q.
    int factorize(const MatrixXd& kept, const VectorXd& kept_theta, const MatrixXd& x) {
        Eigen::Map<MatrixXd> v(v_.data(), dim_, max_cols_ + p_);
        const int l = static_cast<int>(kept.cols());
        t_ = MatrixXd::Zero(max_cols_, max_cols_);
        if (l > 0) {
            v.leftCols(l) = kept;
            t_.topLeftCorner(l, l) = kept_theta.asDiagonal();
        }
        v.middleCols(l, p_) = x;

        MatrixXd w(dim_, p_);
        std::vector<double> yv(dim_);
        int cur = l;
        for (;;) {
            auto vcur = v.middleCols(cur, p_);
            for (int col = 0; col < p_; ++col) {
                std::span<const double> xin(vcur.col(col).data(), dim_);
                h_(xin, yv);
                for (uint64_t i = 0; i < dim_; ++i) w(i, col) = yv[i];
            }
            if (scale_ == 0.0) {
                for (int col = 0; col < p_; ++col) scale_ = std::max(scale_, w.col(col).norm());
                scale_ = std::max(scale_, 1e-30);
            }

            // Project out everything built so far (two passes); the first
            // pass coefficients are the T entries for this column block.
            auto vall = v.leftCols(cur + p_);
            MatrixXd c = vall.transpose() * w;
            w.noalias() -= vall * c;
            MatrixXd c2 = vall.transpose() * w;
            w.noalias() -= vall * c2;
            c += c2;
            t_.block(0, cur, cur + p_, p_) = c;
            t_.block(cur, 0, p_, cur) = c.topRows(cur).transpose();
            t_.block(cur, cur, p_, p_) =
                0.5 * (c.bottomRows(p_) + c.bottomRows(p_).transpose()).eval();

            // QR of the remainder -> next block plus coupling.
            MatrixXd b = MatrixXd::Zero(p_, p_);
            auto vnext = v.middleCols(cur + p_, p_);
            Splitmix64 rng(opt_.seed ^ (0x9e37ull * (cur + 1)));
            for (int col = 0; col < p_; ++col) {
                VectorXd wc = w.col(col);
                for (int i = 0; i < col; ++i) {
                    double r = vnext.col(i).dot(wc);
                    b(i, col) = r;
                    wc -= r * vnext.col(i);
                }
                double n = wc.norm();
                if (n > 1e-12 * scale_) {
                    b(col, col) = n;
                    vnext.col(col) = wc / n;
                } else {
                    // Invariant subspace hit: inject a fresh direction with a
                    // zero coupling coefficient.
                    b(col, col) = 0.0;
                    VectorXd fresh(dim_);
                    for (uint64_t i = 0; i < dim_; ++i) fresh(i) = rng.next_unit() - 0.5;
                    auto vsofar = v.leftCols(cur + p_ + col);
                    for (int pass = 0; pass < 2; ++pass)
                        fresh -= vsofar * (vsofar.transpose() * fresh).eval();
                    vnext.col(col) = fresh / fresh.norm();
                }
            }

            if (cur + 2 * p_ <= max_cols_) {
                t_.block(cur + p_, cur, p_, p_) = b;
                t_.block(cur, cur + p_, p_, p_) = b.transpose();
                cur += p_;
            } else {
                b_ext_ = b;
                return cur + p_;
            }
        }
    }

    const MatVec& h_;
    uint64_t dim_;
    EigenOptions opt_;
    int p_ = 2, max_cols_ = 8, keep_ = 8;
    double scale_ = 0.0;
    std::vector<double> v_;
    MatrixXd t_, b_ext_;
};

} // namespace

EigenResult lowest_eigenpairs(const MatVec& h, uint64_t dim, const EigenOptions& opt,
                              const std::vector<std::vector<double>>* warm_start) {
    if (dim == 0 || opt.k < 1) throw std::invalid_argument("lowest_eigenpairs needs dim, k >= 1");
    if (dim <= opt.dense_threshold) return dense_solve(h, dim, opt.k);
    BlockLanczos solver(h, dim, opt);
    return solver.run(warm_start);
}

namespace {

// Two smallest entries (with multiplicity) and their positions.
void two_smallest(const std::vector<double>& a, const std::vector<double>& b, double wa, double wb,
                  double& e0, double& e1, uint64_t& i0, uint64_t& i1) {
    e0 = e1 = std::numeric_limits<double>::infinity();
    i0 = i1 = 0;
    for (uint64_t i = 0; i < a.size(); ++i) {
        double d = wa * a[i] + wb * b[i];
        if (d < e0) {
            e1 = e0;
            i1 = i0;
            e0 = d;
            i0 = i;
        } else if (d < e1) {
            e1 = d;
            i1 = i;
        }
    }
}

} // namespace

SpectrumTrace gap_trace(const AnnealHamiltonian& h, const GapTraceOptions& opt) {
    if (opt.grid < 2) throw std::invalid_argument("gap trace needs a grid of at least 2 points");
    const uint64_t dim = h.dim();

    SpectrumTrace trace;
    trace.sign = h.sign();
    trace.samples.reserve(opt.grid);

    EigenOptions eig = opt.eig;
    if (dim >= (1ull << 20) && eig.max_basis > 24) eig.max_basis = 24; // memory guard
    eig.k = std::max(eig.k, 2);

    std::vector<std::vector<double>> warm;
    bool have_warm = false;
    for (int j = 0; j < opt.grid; ++j) {
        double s = static_cast<double>(j) / (opt.grid - 1);
        Envelopes env = envelopes(s);
        double e0, e1;
        if (env.b == 0.0) {
            // Purely diagonal (s = 0 or s = 1): read the spectrum off exactly.
            uint64_t i0, i1;
            two_smallest(h.initial().diagonal, h.final_part().diagonal, env.a, env.c, e0, e1, i0, i1);
            warm.assign(2, std::vector<double>(dim, 0.0));
            warm[0][i0] = 1.0;
            warm[1][i1] = 1.0;
            have_warm = true;
        } else {
            MatVec action = [&](std::span<const double> x, std::span<double> y) {
                h.apply(s, x, y, opt.exec);
            };
            EigenResult r = lowest_eigenpairs(action, dim, eig, have_warm ? &warm : nullptr);
            e0 = r.values[0];
            e1 = r.values[1];
            if (r.vectors.size() >= 2) {
                warm = std::move(r.vectors);
                have_warm = true;
            }
        }
        trace.samples.push_back({s, e0, e1});
    }
    trace.degenerate = trace.samples.back().gap() < kDegenerateGapThreshold;
    return trace;
}

SpectrumTrace gap_trace(const Instance& inst, int grid, DriverSign sign) {
    ReducedSpace space(inst);
    AnnealHamiltonian h(space, sign);
    GapTraceOptions opt;
    opt.grid = grid;
    return gap_trace(h, opt);
}

MinGap min_gap(const SpectrumTrace& trace, double interior_eps) {
    const auto& ss = trace.samples;
    if (ss.size() < 3) throw std::invalid_argument("trace too coarse: need at least 3 samples");

    size_t last = ss.size() - 1;
    if (trace.degenerate) {
        while (last > 0 && ss[last].s > 1.0 - interior_eps) --last;
        if (last < 2) throw std::invalid_argument("trace too coarse for an interior minimum");
    }
    size_t arg = 0;
    for (size_t j = 1; j <= last; ++j)
        if (ss[j].gap() < ss[arg].gap()) arg = j;

    MinGap out;
    out.degenerate = trace.degenerate;
    out.s_star = ss[arg].s;
    out.gap_star = ss[arg].gap();
    if (arg == 0 || arg == last) return out;

    // 3-point quadratic refinement around the minimum sample.
    double x1 = ss[arg - 1].s, x2 = ss[arg].s, x3 = ss[arg + 1].s;
    double y1 = ss[arg - 1].gap(), y2 = ss[arg].gap(), y3 = ss[arg + 1].gap();
    double n = (x2 - x1) * (x2 - x1) * (y2 - y3) - (x2 - x3) * (x2 - x3) * (y2 - y1);
    double d = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    if (d > 0.0) { // positive curvature: the parabola has a minimum
        double xs = x2 - 0.5 * n / d;
        xs = std::clamp(xs, x1, x3);
        double l1 = (xs - x2) * (xs - x3) / ((x1 - x2) * (x1 - x3));
        double l2 = (xs - x1) * (xs - x3) / ((x2 - x1) * (x2 - x3));
        double l3 = (xs - x1) * (xs - x2) / ((x3 - x1) * (x3 - x2));
        double ys = l1 * y1 + l2 * y2 + l3 * y3;
        if (ys <= out.gap_star) {
            out.s_star = xs;
            out.gap_star = ys;
        }
    }
    return out;
}

void write_trace_csv(const SpectrumTrace& trace, std::ostream& out) {
    out << "s,e0,e1,gap\n";
    char buf[128];
    for (const auto& p : trace.samples) {
        snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", p.s, p.e0, p.e1, p.gap());
        out << buf;
    }
}

SpectrumTrace read_trace_csv(std::istream& in) {
    SpectrumTrace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("s,e0,e1", 0) != 0)
        throw ParseError("trace CSV must start with header 's,e0,e1,gap'");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        SpectrumSample p;
        double gap;
        if (sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p.s, &p.e0, &p.e1, &gap) != 4)
            throw ParseError("bad trace CSV row", lineno);
        trace.samples.push_back(p);
    }
    if (trace.samples.size() < 2) throw ParseError("trace CSV has fewer than 2 rows");
    trace.degenerate = trace.samples.back().gap() < kDegenerateGapThreshold;
    return trace;
}

PiecewiseLinearSchedule s_opt_adia(const SpectrumTrace& trace, double tf, int segments,
                                   OptAdiaMode mode) {
    return s_opt_adia(trace.s_grid(), trace.gap_values(), tf, segments, mode);
}

} // namespace cqa
