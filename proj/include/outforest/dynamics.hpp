#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "outforest/eigenprojection.hpp"
#include "outforest/expm.hpp"
#include "outforest/format.hpp"
#include "outforest/laplacian.hpp"
#include "outforest/matrix.hpp"
#include "outforest/rational.hpp"

namespace outforest {

using StateVector = std::vector<double>;

inline constexpr double kDefaultConvergenceTol = 1e-9;

// How close to the step bound tau sits. `uncertain` marks a floating-point
// tau inside the guard band around the bound, where strictness cannot be
// decided from the bits alone.
enum class StrictBound { strict, boundary, uncertain };

inline const char* to_string(StrictBound s) {
    switch (s) {
        case StrictBound::strict: return "strict";
        case StrictBound::boundary: return "boundary";
        case StrictBound::uncertain: return "uncertain";
    }
    return "?";
}

struct tau_bound_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Perron matrix P = I - tau L, row stochastic for tau within the reciprocal
// of the largest influence row sum. Entries are exact; the Laplacian is kept
// so downstream code can reach the digraph.
class PerronMatrix {
  public:
    PerronMatrix(Matrix<Rational> entries, Rational tau, StrictBound strictness,
                 LaplacianMatrix source)
        : entries_(std::move(entries)), tau_(std::move(tau)), strictness_(strictness),
          source_(std::move(source)) {}

    const Matrix<Rational>& entries() const { return entries_; }
    const Rational& tau() const { return tau_; }
    StrictBound strictness() const { return strictness_; }
    bool strict() const { return strictness_ == StrictBound::strict; }
    const LaplacianMatrix& source() const { return source_; }
    int size() const { return source_.size(); }
    Matrix<double> to_double() const { return outforest::to_double(entries_); }

  private:
    Matrix<Rational> entries_;
    Rational tau_;
    StrictBound strictness_;
    LaplacianMatrix source_;
};

namespace detail {

inline Matrix<Rational> perron_entries(const LaplacianMatrix& l, const Rational& tau) {
    Matrix<Rational> p = Matrix<Rational>::identity(l.entries().rows());
    p -= tau * l.entries();
    return p;
}

}  // namespace detail

// Exact-step construction; the bound comparison is exact.
inline PerronMatrix perron(const LaplacianMatrix& l, const Rational& tau) {
    if (tau <= 0) throw std::invalid_argument("tau must be positive");
    const Rational max_row = l.max_influence_row_sum();
    StrictBound strictness = StrictBound::strict;
    if (max_row > 0) {
        const Rational bound = Rational(1) / max_row;
        if (tau > bound)
            throw tau_bound_error("tau = " + to_string(tau) + " exceeds the row-stochastic bound " +
                                  to_string(bound) + "; the Perron matrix would have negative entries");
        strictness = tau == bound ? StrictBound::boundary : StrictBound::strict;
    }
    return PerronMatrix(detail::perron_entries(l, tau), tau, strictness, l);
}

// Float-step construction. A tau within the 1e-12 guard band of the bound is
// snapped to the exact bound and flagged uncertain, so accepted matrices stay
// exactly row stochastic even when the caller meant "the bound" in floating
// point.
inline PerronMatrix perron(const LaplacianMatrix& l, double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    const Rational max_row = l.max_influence_row_sum();
    Rational exact_tau = rational_from_double(tau);
    if (max_row == 0)
        return PerronMatrix(detail::perron_entries(l, exact_tau), exact_tau, StrictBound::strict, l);
    const Rational bound = Rational(1) / max_row;
    const double band = 1e-12 * std::max(1.0, std::abs(tau));
    if (std::abs(tau - to_double(bound)) <= band) {
        return PerronMatrix(detail::perron_entries(l, bound), bound, StrictBound::uncertain, l);
    }
    if (exact_tau > bound)
        throw tau_bound_error("tau = " + std::to_string(tau) + " exceeds the row-stochastic bound " +
                              to_string(bound) + "; the Perron matrix would have negative entries");
    return PerronMatrix(detail::perron_entries(l, exact_tau), exact_tau, StrictBound::strict, l);
}

enum class TrajectoryMode { continuous, discrete, cesaro };

inline const char* to_string(TrajectoryMode m) {
    switch (m) {
        case TrajectoryMode::continuous: return "continuous";
        case TrajectoryMode::discrete: return "discrete";
        case TrajectoryMode::cesaro: return "cesaro";
    }
    return "?";
}

// Sampled trajectory with the detected limit and its deviation from the
// predicted limit J x(0). A true `converged` together with a small
// `max_deviation` is the full claim; either alone is reported but weaker.
struct TrajectoryReport {
    TrajectoryMode mode = TrajectoryMode::continuous;
    std::vector<std::pair<double, StateVector>> samples;  // (time or step, state)
    StateVector limit_estimate;
    StateVector predicted_limit;
    double max_deviation = 0.0;   // inf-norm of limit_estimate - predicted_limit
    double last_step_delta = 0.0; // inf-norm of the final successive difference
    bool converged = false;
};

inline void check_state(const LaplacianMatrix& l, const StateVector& x0) {
    if (static_cast<int>(x0.size()) != l.size())
        throw std::invalid_argument("state vector length does not match the digraph");
    for (double v : x0)
        if (!std::isfinite(v)) throw std::invalid_argument("state vector entries must be finite");
}

// e^{-L t} x0 by dense scaling-and-squaring.
inline StateVector matrix_exponential_action(const LaplacianMatrix& l, double t,
                                             const StateVector& x0) {
    if (!(t >= 0)) throw std::invalid_argument("time must be nonnegative");
    check_state(l, x0);
    if (t == 0) return x0;
    return expm(-t * l.to_double()) * x0;
}

namespace detail {

inline StateVector predicted_limit_for(const LaplacianMatrix& l, const StateVector& x0) {
    return to_double(exact_eigenprojection(l)) * x0;
}

}  // namespace detail

// Integrates x(t) = e^{-Lt} x(0) on an even grid. Converged means the last
// two samples agree and the final sample sits at the predicted limit, both
// within the tolerance.
inline TrajectoryReport simulate_continuous(const LaplacianMatrix& l, const StateVector& x0,
                                            double horizon, int samples,
                                            double tol = kDefaultConvergenceTol) {
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
    if (samples < 2) throw std::invalid_argument("need at least two samples");
    check_state(l, x0);

    TrajectoryReport report;
    report.mode = TrajectoryMode::continuous;
    report.predicted_limit = detail::predicted_limit_for(l, x0);
    report.samples.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        const double t = horizon * k / (samples - 1);
        report.samples.emplace_back(t, matrix_exponential_action(l, t, x0));
    }
    report.limit_estimate = report.samples.back().second;
    report.last_step_delta = max_abs_diff(report.samples[report.samples.size() - 2].second,
                                          report.limit_estimate);
    report.max_deviation = max_abs_diff(report.limit_estimate, report.predicted_limit);
    report.converged = report.last_step_delta < tol && report.max_deviation < tol;
    return report;
}

namespace detail {

// Record at most ~10k rows; long runs keep every stride-th iterate plus the
// final one.
inline int sample_stride(int steps) { return steps <= 10000 ? 1 : (steps + 9999) / 10000; }

}  // namespace detail

// Plain power iteration y(k) = P y(k-1). Stops early once successive iterates
// agree within the tolerance; a periodic P simply never does.
inline TrajectoryReport degroot_iterate(const PerronMatrix& p, const StateVector& y0, int steps,
                                        double tol = kDefaultConvergenceTol) {
    if (steps < 1) throw std::invalid_argument("need at least one step");
    check_state(p.source(), y0);

    TrajectoryReport report;
    report.mode = TrajectoryMode::discrete;
    report.predicted_limit = detail::predicted_limit_for(p.source(), y0);

    const Matrix<double> pf = p.to_double();
    const int stride = detail::sample_stride(steps);
    StateVector current = y0;
    report.samples.emplace_back(0.0, current);
    for (int k = 1; k <= steps; ++k) {
        StateVector next = pf * current;
        report.last_step_delta = max_abs_diff(next, current);
        current = std::move(next);
        if (k % stride == 0 || k == steps) report.samples.emplace_back(k, current);
        if (report.last_step_delta < tol) {
            if (report.samples.back().first != k) report.samples.emplace_back(k, current);
            report.converged = true;
            break;
        }
    }
    report.limit_estimate = current;
    report.max_deviation = max_abs_diff(report.limit_estimate, report.predicted_limit);
    return report;
}

// Running averages (1/k) sum_{i=1..k} y(i). These converge to J y(0) for any
// admissible step, at rate O(1/k), which is the route of record when the
// power iterates oscillate.
inline TrajectoryReport cesaro_limit(const PerronMatrix& p, const StateVector& y0, int steps,
                                     double tol = kDefaultConvergenceTol) {
    if (steps < 1) throw std::invalid_argument("need at least one step");
    check_state(p.source(), y0);

    TrajectoryReport report;
    report.mode = TrajectoryMode::cesaro;
    report.predicted_limit = detail::predicted_limit_for(p.source(), y0);

    const Matrix<double> pf = p.to_double();
    const int stride = detail::sample_stride(steps);
    const std::size_t n = y0.size();
    StateVector iterate = y0;
    StateVector sum(n, 0.0), average(n, 0.0), previous_average(n, 0.0);
    for (int k = 1; k <= steps; ++k) {
        iterate = pf * iterate;
        previous_average = average;
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += iterate[i];
            average[i] = sum[i] / k;
        }
        if (k % stride == 0 || k == steps) report.samples.emplace_back(k, average);
    }
    report.limit_estimate = average;
    report.last_step_delta = steps > 1 ? max_abs_diff(average, previous_average) : 0.0;
    report.max_deviation = max_abs_diff(report.limit_estimate, report.predicted_limit);
    report.converged = report.last_step_delta < tol;
    return report;
}

// Trajectory CSV: `t,x1,...,xn` (continuous) or `k,y1,...,yn` (discrete and
// Cesaro), one row per sample, 17 significant digits.
inline void write_trajectory_csv(std::ostream& out, const TrajectoryReport& report) {
    const bool continuous = report.mode == TrajectoryMode::continuous;
    const std::size_t n = report.predicted_limit.size();
    out << (continuous ? "t" : "k");
    for (std::size_t i = 1; i <= n; ++i) out << "," << (continuous ? "x" : "y") << i;
    out << "\n";
    for (const auto& [time, state] : report.samples) {
        if (continuous)
            out << format_double_17(time);
        else
            out << static_cast<long long>(time);
        for (double v : state) out << "," << format_double_17(v);
        out << "\n";
    }
}

}  // namespace outforest
