#include "cqa/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqa {

namespace {

constexpr double kEdgeSlack = 1e-12; // rounding allowance at interval ends

double checked_s(double s) {
    if (s < 0.0 && s > -kEdgeSlack) s = 0.0;
    if (s > 1.0 && s < 1.0 + kEdgeSlack) s = 1.0;
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("s must lie in [0, 1], got " + std::to_string(s));
    return s;
}

double checked_t(double t, double tf) {
    if (t < 0.0 && t > -kEdgeSlack * std::max(1.0, tf)) t = 0.0;
    if (t > tf && t < tf * (1.0 + kEdgeSlack)) t = tf;
    if (t < 0.0 || t > tf)
        throw std::invalid_argument("t must lie in [0, " + std::to_string(tf) + "], got " + std::to_string(t));
    return t;
}

} // namespace

Envelopes envelopes(double s) {
    s = checked_s(s);
    return {1.0 - s * s, 4.0 * s * (1.0 - s), s * s};
}

double s_linear(double t, double tf) {
    if (!(tf > 0.0)) throw std::invalid_argument("tf must be positive");
    t = checked_t(t, tf);
    return t / tf;
}

double s_param(double t, double t0, double s0, double tf) {
    if (!(tf > 0.0) || !(t0 > 0.0) || !(t0 < tf))
        throw std::invalid_argument("s_param needs 0 < t0 < tf");
    if (!(s0 > 0.0) || !(s0 < 1.0)) throw std::invalid_argument("s_param needs 0 < s0 < 1");
    // The quadratic piece starts with slope (1 - s0(2 tf/t0 - 1)) / (t0 - tf);
    // it dips below zero unless s0 (2 tf/t0 - 1) >= 1.
    if (s0 * (2.0 * tf / t0 - 1.0) < 1.0 - 1e-12)
        throw std::invalid_argument("s_param parameters are non-monotone; need s0*(2*tf/t0 - 1) >= 1");
    t = checked_t(t, tf);
    double r = tf / t0;
    if (t < t0) {
        double alpha = (s0 * r - 1.0) / (t0 * (t0 - tf));
        double beta = (1.0 - s0 * (2.0 * r - 1.0)) / (t0 - tf);
        return alpha * t * t + beta * t;
    }
    double slope = (s0 - 1.0) / (t0 - tf);
    double intercept = (1.0 - s0 * r) / (1.0 - r);
    return slope * t + intercept;
}

PiecewiseLinearSchedule::PiecewiseLinearSchedule(std::vector<double> t_knots,
                                                 std::vector<double> s_knots)
    : t_(std::move(t_knots)), s_(std::move(s_knots)) {
    if (t_.size() != s_.size() || t_.size() < 2)
        throw std::invalid_argument("piecewise schedule needs matching knot lists of size >= 2");
    for (size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1]) || s_[i] < s_[i - 1])
            throw std::invalid_argument("piecewise schedule knots must increase");
}

double PiecewiseLinearSchedule::operator()(double t) const {
    t = checked_t(t, t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t hi = std::min<size_t>(t_.size() - 1, static_cast<size_t>(it - t_.begin()));
    if (hi == 0) hi = 1;
    size_t lo = hi - 1;
    double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
    return s_[lo] + w * (s_[hi] - s_[lo]);
}

PiecewiseLinearSchedule s_opt_adia(const std::vector<double>& s_samples,
                                   const std::vector<double>& gap_samples, double tf,
                                   int segments, OptAdiaMode mode) {
    if (!(tf > 0.0)) throw std::invalid_argument("tf must be positive");
    if (segments < 2) throw std::invalid_argument("segments must be >= 2");
    if (s_samples.size() != gap_samples.size() || s_samples.size() < static_cast<size_t>(segments) + 1)
        throw std::invalid_argument("gap trace must cover [0,1] with at least segments+1 samples");
    if (s_samples.front() != 0.0 || s_samples.back() != 1.0)
        throw std::invalid_argument("gap trace must start at s=0 and end at s=1");

    auto gap_at = [&](double s) {
        auto it = std::upper_bound(s_samples.begin(), s_samples.end(), s);
        size_t hi = std::min<size_t>(s_samples.size() - 1, static_cast<size_t>(it - s_samples.begin()));
        if (hi == 0) hi = 1;
        size_t lo = hi - 1;
        double w = (s - s_samples[lo]) / (s_samples[hi] - s_samples[lo]);
        return gap_samples[lo] + w * (gap_samples[hi] - gap_samples[lo]);
    };

    std::vector<double> weight(segments);
    double total = 0.0;
    for (int j = 0; j < segments; ++j) {
        double mid = (j + 0.5) / segments;
        double g = gap_at(mid);
        if (!(g > 0.0))
            throw std::invalid_argument(
                "gap trace is not positive at s=" + std::to_string(mid) +
                "; the instance is degenerate — use a non-degenerate instance for opt_adia");
        weight[j] = mode == OptAdiaMode::Time ? 1.0 / (g * g) : g * g;
        total += weight[j];
    }

    std::vector<double> t(segments + 1), s(segments + 1);
    t[0] = 0.0;
    s[0] = 0.0;
    for (int j = 0; j < segments; ++j) {
        t[j + 1] = t[j] + tf * weight[j] / total;
        s[j + 1] = static_cast<double>(j + 1) / segments;
    }
    t[segments] = tf; // absorb rounding
    s[segments] = 1.0;
    return PiecewiseLinearSchedule(std::move(t), std::move(s));
}

const char* schedule_kind_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Linear: return "linear";
        case ScheduleKind::Param: return "param";
        case ScheduleKind::OptAdia: return "opt_adia";
    }
    return "?";
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
    if (name == "linear") return ScheduleKind::Linear;
    if (name == "param") return ScheduleKind::Param;
    if (name == "opt_adia" || name == "opt-adia") return ScheduleKind::OptAdia;
    throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

const char* opt_adia_mode_name(OptAdiaMode m) {
    return m == OptAdiaMode::Time ? "time" : "slope";
}

OptAdiaMode opt_adia_mode_from_name(const std::string& name) {
    if (name == "time") return OptAdiaMode::Time;
    if (name == "slope") return OptAdiaMode::Slope;
    throw std::invalid_argument("unknown opt-adia mode '" + name + "' (have: time, slope)");
}

std::function<double(double)> make_schedule(const ScheduleSpec& spec,
                                            const std::vector<double>* s_samples,
                                            const std::vector<double>* gap_samples) {
    if (!(spec.tf > 0.0)) throw std::invalid_argument("schedule tf must be positive");
    switch (spec.kind) {
        case ScheduleKind::Linear: {
            double tf = spec.tf;
            return [tf](double t) { return s_linear(t, tf); };
        }
        case ScheduleKind::Param: {
            double tf = spec.tf, t0 = spec.t0, s0 = spec.s0;
            s_param(0.0, t0, s0, tf); // validate eagerly
            return [tf, t0, s0](double t) { return s_param(t, t0, s0, tf); };
        }
        case ScheduleKind::OptAdia: {
            if (!s_samples || !gap_samples)
                throw std::invalid_argument("opt_adia schedule needs a gap trace");
            auto pl = s_opt_adia(*s_samples, *gap_samples, spec.tf, spec.segments, spec.mode);
            return [pl = std::move(pl)](double t) { return pl(t); };
        }
    }
    throw std::invalid_argument("bad schedule kind");
}

} // namespace cqa
