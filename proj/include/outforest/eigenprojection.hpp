#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "outforest/bicomponents.hpp"
#include "outforest/charpoly.hpp"
#include "outforest/format.hpp"
#include "outforest/laplacian.hpp"
#include "outforest/matrix.hpp"

namespace outforest {

// Spectrum of the Laplacian with algebraic multiplicities. Eigenvalues that
// are exactly rational (always including 0) are identified against the exact
// characteristic polynomial and reported at their exact values; the rest come
// from the dense solver.
struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;  // sorted by (re, im)
    int index_of_zero = 0;                          // exact rank test on L, L^2, ...
    int zero_multiplicity = 0;                      // algebraic multiplicity of 0
    bool positive_real_part_ok = false;             // all nonzero eigenvalues have re > 0
};

enum class ProjectionMethod { recursive, resolvent, polynomial, forest };

inline const char* to_string(ProjectionMethod m) {
    switch (m) {
        case ProjectionMethod::recursive: return "recursive";
        case ProjectionMethod::resolvent: return "resolvent";
        case ProjectionMethod::polynomial: return "polynomial";
        case ProjectionMethod::forest: return "forest";
    }
    return "?";
}

struct ProjectionResiduals {
    double max_row_sum_error = 0.0;  // max_i |sum_j Z_ij - 1|
    double annihilation = 0.0;       // max |(L Z)_ij|
    double idempotency = 0.0;        // max |(Z^2 - Z)_ij|
};

// A computed eigenprojection candidate together with the residuals that
// qualify it. Exact-mode results carry their rational entries as well.
struct ProjectionEstimate {
    Matrix<double> entries;
    std::optional<Matrix<Rational>> exact_entries;
    ProjectionMethod method = ProjectionMethod::recursive;
    ProjectionResiduals residuals;
    std::vector<std::pair<double, double>> convergence;  // resolvent: (alpha, step diff)
    std::vector<std::string> notes;
};

struct projection_breakdown_error : std::runtime_error {
    projection_breakdown_error(int step, const std::string& what)
        : std::runtime_error("eigenprojection recursion failed at step " + std::to_string(step) +
                             ": " + what),
          step(step) {}
    int step;
};

inline ProjectionResiduals compute_residuals(const Matrix<double>& l, const Matrix<double>& z) {
    ProjectionResiduals r;
    for (std::size_t i = 0; i < z.rows(); ++i)
        r.max_row_sum_error = std::max(r.max_row_sum_error, std::abs(z.row_sum(i) - 1.0));
    r.annihilation = max_abs(l * z);
    r.idempotency = max_abs_diff(z * z, z);
    return r;
}

inline ProjectionResiduals compute_residuals_exact(const Matrix<Rational>& l,
                                                   const Matrix<Rational>& z) {
    ProjectionResiduals r;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        Rational e = abs(Rational(z.row_sum(i) - 1));
        r.max_row_sum_error = std::max(r.max_row_sum_error, to_double(e));
    }
    Matrix<Rational> lz = l * z;
    Matrix<Rational> idem = z * z - z;
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) {
            r.annihilation = std::max(r.annihilation, to_double(Rational(abs(lz(i, j)))));
            r.idempotency = std::max(r.idempotency, to_double(Rational(abs(idem(i, j)))));
        }
    return r;
}

namespace detail {

template <typename T>
Matrix<T> projection_recursion(const Matrix<T>& l, int steps,
                               const std::function<void(int, const T&)>& check_trace) {
    const std::size_t n = l.rows();
    Matrix<T> j = Matrix<T>::identity(n);
    for (int k = 1; k <= steps; ++k) {
        Matrix<T> lj = l * j;
        T t = lj.trace();
        check_trace(k, t);
        lj *= T(k) / t;
        j = Matrix<T>::identity(n) - lj;
    }
    return j;
}

}  // namespace detail

// Recursion J_0 = I, J_k = I - k L J_{k-1} / tr(L J_{k-1}), run for n-d steps.
// Needs only the out-forest dimension d, no eigenvalues. In exact mode the
// result equals the forest matrix entry for entry; a vanishing trace before
// step n-d means d was inconsistent with the digraph.
inline ProjectionEstimate eigenprojection_recursive(const LaplacianMatrix& l, int d,
                                                    bool exact = true) {
    const int n = l.size();
    if (d < 1 || d > n) throw std::invalid_argument("out-forest dimension must be in 1..n");
    ProjectionEstimate estimate;
    estimate.method = ProjectionMethod::recursive;
    if (exact) {
        Matrix<Rational> j = detail::projection_recursion<Rational>(
            l.entries(), n - d, [](int k, const Rational& t) {
                if (t == 0)
                    throw projection_breakdown_error(
                        k, "trace vanished exactly; the supplied dimension is inconsistent");
            });
        estimate.residuals = compute_residuals_exact(l.entries(), j);
        estimate.entries = to_double(j);
        estimate.exact_entries = std::move(j);
    } else {
        const Matrix<double> lf = l.to_double();
        const double guard = 1e-12 * std::max(1.0, max_abs(lf)) * n;
        Matrix<double> j = detail::projection_recursion<double>(
            lf, n - d, [guard](int k, const double& t) {
                if (std::abs(t) < guard)
                    throw projection_breakdown_error(
                        k, "trace fell below tolerance; dimension inconsistent or rounding collapsed");
            });
        estimate.residuals = compute_residuals(lf, j);
        estimate.entries = std::move(j);
    }
    return estimate;
}

// Exact forest matrix of the Laplacian through the recursion, with d taken
// from the bicomponent structure. Unlike forest enumeration this has no size
// cap, so it backs predicted limits in the dynamics layer.
inline Matrix<Rational> exact_eigenprojection(const LaplacianMatrix& l) {
    const int d = max_forest_dimension(l.graph());
    return *eigenprojection_recursive(l, d, true).exact_entries;
}

inline std::vector<double> default_alpha_schedule() { return {1e2, 1e3, 1e4, 1e5, 1e6}; }

// Resolvent route: (I + alpha L)^{-1} tends to the eigenprojection as alpha
// grows, with O(1/alpha) entrywise error. Returns the value at the last
// schedule point; consecutive differences are reported as the convergence
// estimate.
inline ProjectionEstimate eigenprojection_resolvent(
    const LaplacianMatrix& l, const std::vector<double>& alpha_schedule = default_alpha_schedule()) {
    if (alpha_schedule.empty())
        throw std::invalid_argument("resolvent route needs a nonempty alpha schedule");
    for (std::size_t k = 0; k < alpha_schedule.size(); ++k)
        if (alpha_schedule[k] <= 0 || (k > 0 && alpha_schedule[k] <= alpha_schedule[k - 1]))
            throw std::invalid_argument("alpha schedule must be positive and increasing");

    const Matrix<double> lf = l.to_double();
    const Matrix<double> ident = Matrix<double>::identity(lf.rows());
    ProjectionEstimate estimate;
    estimate.method = ProjectionMethod::resolvent;
    Matrix<double> current;
    for (std::size_t k = 0; k < alpha_schedule.size(); ++k) {
        const double alpha = alpha_schedule[k];
        Matrix<double> next;
        try {
            next = solve(ident + alpha * lf, ident);
        } catch (const singular_matrix_error&) {
            throw std::runtime_error("resolvent solve became singular at alpha = " +
                                     std::to_string(alpha));
        }
        if (k > 0) estimate.convergence.emplace_back(alpha, max_abs_diff(next, current));
        current = std::move(next);
    }
    for (std::size_t k = 1; k < estimate.convergence.size(); ++k)
        if (estimate.convergence[k].second > estimate.convergence[k - 1].second * (1.0 + 1e-6)) {
            estimate.notes.push_back("warning: resolvent differences are not monotone at alpha = " +
                                     format_double(estimate.convergence[k].first));
        }
    if (!estimate.convergence.empty())
        estimate.notes.push_back("entries converge at rate O(1/alpha); last step difference " +
                                 format_double(estimate.convergence.back().second));
    estimate.residuals = compute_residuals(lf, current);
    estimate.entries = std::move(current);
    return estimate;
}

namespace detail {

template <typename T>
Matrix<T> polynomial_projection(const Matrix<T>& l,
                                const std::vector<std::pair<T, int>>& roots, T& denominator) {
    const std::size_t n = l.rows();
    Matrix<T> numerator = Matrix<T>::identity(n);
    denominator = T(1);
    for (const auto& [value, index] : roots) {
        if (index < 1) throw std::invalid_argument("root index must be at least 1");
        Matrix<T> shifted = l;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= value;
        for (int p = 0; p < index; ++p) {
            numerator = numerator * shifted;
            denominator *= -value;
        }
    }
    return numerator;
}

}  // namespace detail

// Minimal-polynomial route: given the nonzero roots lambda_k of the minimal
// polynomial with their indices nu_k, the eigenprojection is
// prod_k (L - lambda_k I)^{nu_k} / prod_k (-lambda_k)^{nu_k}. The roots are
// caller-supplied; this routine does not derive the minimal polynomial.
inline ProjectionEstimate eigenprojection_polynomial(
    const LaplacianMatrix& l, const std::vector<std::pair<std::complex<double>, int>>& roots) {
    const Matrix<double> lf = l.to_double();
    ProjectionEstimate estimate;
    estimate.method = ProjectionMethod::polynomial;
    if (roots.empty()) {
        if (max_abs(lf) != 0.0)
            throw std::invalid_argument("empty root list is only valid for the zero Laplacian");
        estimate.entries = Matrix<double>::identity(lf.rows());
        estimate.residuals = compute_residuals(lf, estimate.entries);
        return estimate;
    }
    using C = std::complex<double>;
    Matrix<C> lc(lf.rows(), lf.cols());
    for (std::size_t i = 0; i < lf.rows(); ++i)
        for (std::size_t j = 0; j < lf.cols(); ++j) lc(i, j) = lf(i, j);
    C denominator;
    Matrix<C> numerator = detail::polynomial_projection<C>(lc, roots, denominator);
    if (denominator == C(0.0))
        throw std::invalid_argument("zero denominator: 0 is not a valid nonzero root");
    Matrix<double> z(lf.rows(), lf.cols());
    double max_imag = 0.0;
    for (std::size_t i = 0; i < lf.rows(); ++i)
        for (std::size_t j = 0; j < lf.cols(); ++j) {
            const C value = numerator(i, j) / denominator;
            z(i, j) = value.real();
            max_imag = std::max(max_imag, std::abs(value.imag()));
        }
    if (max_imag > 1e-8 * std::max(1.0, max_abs(z)))
        estimate.notes.push_back("warning: discarded imaginary parts up to " +
                                 std::to_string(max_imag));
    estimate.residuals = compute_residuals(lf, z);
    estimate.entries = std::move(z);
    return estimate;
}

// Exact variant for rational roots (the usual case when the minimal
// polynomial factors over the rationals).
inline ProjectionEstimate eigenprojection_polynomial_exact(
    const LaplacianMatrix& l, const std::vector<std::pair<Rational, int>>& roots) {
    ProjectionEstimate estimate;
    estimate.method = ProjectionMethod::polynomial;
    const std::size_t n = l.entries().rows();
    if (roots.empty()) {
        bool zero = true;
        for (std::size_t i = 0; i < n && zero; ++i)
            for (std::size_t j = 0; j < n && zero; ++j)
                if (l.entries()(i, j) != 0) zero = false;
        if (!zero)
            throw std::invalid_argument("empty root list is only valid for the zero Laplacian");
        Matrix<Rational> ident = Matrix<Rational>::identity(n);
        estimate.residuals = compute_residuals_exact(l.entries(), ident);
        estimate.entries = to_double(ident);
        estimate.exact_entries = std::move(ident);
        return estimate;
    }
    Rational denominator;
    Matrix<Rational> numerator =
        detail::polynomial_projection<Rational>(l.entries(), roots, denominator);
    if (denominator == 0)
        throw std::invalid_argument("zero denominator: 0 is not a valid nonzero root");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) numerator(i, j) /= denominator;
    estimate.residuals = compute_residuals_exact(l.entries(), numerator);
    estimate.entries = to_double(numerator);
    estimate.exact_entries = std::move(numerator);
    return estimate;
}

// Smallest k with rank(A^{k+1}) = rank(A^k), decided in exact arithmetic.
inline int matrix_index_of_zero(const Matrix<Rational>& a) {
    a.require_square();
    const std::size_t n = a.rows();
    std::size_t previous_rank = n;  // rank of A^0
    Matrix<Rational> power = Matrix<Rational>::identity(n);
    for (int k = 1; k <= static_cast<int>(n) + 1; ++k) {
        power = power * a;
        const std::size_t r = exact_rank(power);
        if (r == previous_rank) return k - 1;
        previous_rank = r;
    }
    throw std::logic_error("matrix index did not stabilize");
}

// Float-mode rank: singular values against the threshold n * eps * sigma_max.
inline std::size_t numeric_rank(const Matrix<double>& m) {
    Eigen::MatrixXd em(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) em(i, j) = m(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(em);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0) return 0;
    const double threshold =
        static_cast<double>(std::max(m.rows(), m.cols())) *
        std::numeric_limits<double>::epsilon() * sigma(0);
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k)
        if (sigma(k) > threshold) ++rank;
    return rank;
}

// Dense eigensolve refined by exact identification of rational roots of the
// characteristic polynomial. The defective eigenvalues a raw QR sweep smears
// by ~1e-5 come back exact whenever they are rational, which covers every
// eigenvalue the zero root and integer-weight models produce.
inline SpectrumReport spectrum_report(const LaplacianMatrix& l) {
    const Matrix<double> lf = l.to_double();
    const std::size_t n = lf.rows();
    Eigen::MatrixXd em(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) em(i, j) = lf(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(em, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense eigensolver did not converge");

    std::vector<std::complex<double>> estimates(n);
    for (std::size_t k = 0; k < n; ++k) estimates[k] = solver.eigenvalues()(static_cast<Eigen::Index>(k));

    SpectrumReport report;
    if (n <= 24) {
        const auto coeffs = characteristic_polynomial(l.entries());
        const auto exact = rational_roots_near(l.entries(), coeffs, estimates);
        std::vector<bool> consumed(n, false);
        for (const auto& root : exact) {
            const std::complex<double> target(to_double(root.value), 0.0);
            for (int m = 0; m < root.multiplicity; ++m) {
                std::size_t best = n;
                double best_distance = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (consumed[k]) continue;
                    const double distance = std::abs(estimates[k] - target);
                    if (best == n || distance < best_distance) {
                        best = k;
                        best_distance = distance;
                    }
                }
                consumed[best] = true;
                estimates[best] = target;
            }
            if (root.value == 0) report.zero_multiplicity = root.multiplicity;
        }
    } else {
        // Too large for the exact pass; count near-zero estimates instead.
        const double tol = 1e-9 * std::max(1.0, max_abs(lf));
        for (const auto& z : estimates)
            if (std::abs(z) <= tol) ++report.zero_multiplicity;
    }

    std::sort(estimates.begin(), estimates.end(), [](const auto& a, const auto& b) {
        return a.real() == b.real() ? a.imag() < b.imag() : a.real() < b.real();
    });
    report.eigenvalues = std::move(estimates);

    report.index_of_zero = matrix_index_of_zero(l.entries());

    const double tol = 1e-9 * std::max(1.0, max_abs(lf));
    report.positive_real_part_ok = true;
    for (const auto& z : report.eigenvalues)
        if (std::abs(z) > tol && z.real() <= tol) report.positive_real_part_ok = false;
    return report;
}

}  // namespace outforest
