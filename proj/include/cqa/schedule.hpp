#pragma once

#include <functional>
#include <string>
#include <vector>

namespace cqa {

/// Interpolation weights of the initial, driver and final parts at anneal
/// parameter s.
struct Envelopes {
    double a, b, c;
};

/// A(s) = 1 - s^2, B(s) = 4 s (1 - s), C(s) = s^2. Throws for s outside
/// [0, 1] (beyond a tiny rounding allowance).
Envelopes envelopes(double s);

/// s(t) = t / tf on [0, tf].
double s_linear(double t, double tf);

/// Quadratic on [0, t0] reaching s0, then linear to 1 at tf, with the
/// derivative continuous at t0. Requires 0 < t0 < tf and 0 < s0 < 1.
double s_param(double t, double t0, double s0, double tf);

/// Monotone piecewise-linear map t -> s with fixed knots.
class PiecewiseLinearSchedule {
  public:
    PiecewiseLinearSchedule(std::vector<double> t_knots, std::vector<double> s_knots);
    double operator()(double t) const;
    const std::vector<double>& t_knots() const { return t_; }
    const std::vector<double>& s_knots() const { return s_; }

  private:
    std::vector<double> t_, s_;
};

enum class OptAdiaMode {
    Time,  // dwell time per interval proportional to 1/gap^2
    Slope, // ds/dt per interval proportional to 1/gap^2
};

/// Gap-adapted schedule: [0,1] is split into `segments` equal s-intervals
/// and each interval gets a time share from the gap at its midpoint,
/// linearly interpolated from the (s, gap) samples, normalized to total tf.
/// Throws std::invalid_argument when any interpolated gap is not positive
/// (degenerate instance: pick a non-degenerate one or a different schedule).
PiecewiseLinearSchedule s_opt_adia(const std::vector<double>& s_samples,
                                   const std::vector<double>& gap_samples, double tf,
                                   int segments = 100, OptAdiaMode mode = OptAdiaMode::Time);

enum class ScheduleKind { Linear, Param, OptAdia };

const char* schedule_kind_name(ScheduleKind k);
ScheduleKind schedule_kind_from_name(const std::string& name);
const char* opt_adia_mode_name(OptAdiaMode m);
OptAdiaMode opt_adia_mode_from_name(const std::string& name);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Linear;
    double tf = 40.0;
    double t0 = 20.0;  // param only
    double s0 = 0.75;  // param only
    int segments = 100;                    // opt_adia only
    OptAdiaMode mode = OptAdiaMode::Time;  // opt_adia only
    std::string trace_path;                // opt_adia: where the gap trace lives
};

/// Validates the spec and returns the callable s(t) on [0, tf]. OptAdia
/// needs the gap samples; the other kinds ignore them.
std::function<double(double)> make_schedule(const ScheduleSpec& spec,
                                            const std::vector<double>* s_samples = nullptr,
                                            const std::vector<double>* gap_samples = nullptr);

} // namespace cqa
