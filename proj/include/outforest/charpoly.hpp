#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "outforest/matrix.hpp"
#include "outforest/rational.hpp"

namespace outforest {

// Coefficients of the monic characteristic polynomial, constant term first:
// p(x) = coeffs[0] + coeffs[1] x + ... + coeffs[n] x^n with coeffs[n] = 1.
// Faddeev-LeVerrier in exact rational arithmetic.
inline std::vector<Rational> characteristic_polynomial(const Matrix<Rational>& a) {
    a.require_square();
    const std::size_t n = a.rows();
    std::vector<Rational> coeffs(n + 1);
    coeffs[n] = 1;
    Matrix<Rational> m = Matrix<Rational>::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        m = a * m;
        Rational c = -m.trace() / Rational(static_cast<long>(k));
        coeffs[n - k] = c;
        for (std::size_t i = 0; i < n; ++i) m(i, i) += c;
    }
    return coeffs;
}

inline Rational evaluate_polynomial(const std::vector<Rational>& coeffs, const Rational& x) {
    Rational value = 0;
    for (std::size_t k = coeffs.size(); k-- > 0;) value = value * x + coeffs[k];
    return value;
}

// Divides p(x) by (x - root) in place; the root must be exact (remainder 0).
inline void deflate_root(std::vector<Rational>& coeffs, const Rational& root) {
    std::vector<Rational> quotient(coeffs.size() - 1);
    Rational carry = coeffs.back();
    for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
        quotient[k] = carry;
        carry = Rational(coeffs[k] + root * carry);
    }
    if (carry != 0) throw std::logic_error("deflate_root: not an exact root");
    coeffs = std::move(quotient);
}

struct ExactRoot {
    Rational value;
    int multiplicity = 0;
};

// Identifies the rational roots of the characteristic polynomial among a set
// of numeric eigenvalue estimates. A rational eigenvalue of A must have the
// form k/s where s is the common denominator of A's entries, so each estimate
// yields one candidate, verified exactly and deflated for its multiplicity.
inline std::vector<ExactRoot> rational_roots_near(
    const Matrix<Rational>& a, std::vector<Rational> char_coeffs,
    const std::vector<std::complex<double>>& estimates) {
    mpz_class denom(1);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), a(i, j).get_den().get_mpz_t());

    std::vector<ExactRoot> roots;
    const double scale = denom.get_d();
    for (const auto& z : estimates) {
        if (std::abs(z.imag()) * scale > 0.4) continue;
        const double scaled = z.real() * scale;
        if (std::abs(scaled) > 9e15) continue;  // beyond exact double integers
        mpz_class numer(static_cast<long>(std::llround(scaled)));
        Rational candidate{numer, denom};
        candidate.canonicalize();
        bool known = false;
        for (const auto& r : roots)
            if (r.value == candidate) known = true;
        if (known) continue;
        int multiplicity = 0;
        while (!char_coeffs.empty() && char_coeffs.size() > 1 &&
               evaluate_polynomial(char_coeffs, candidate) == 0) {
            deflate_root(char_coeffs, candidate);
            ++multiplicity;
        }
        if (multiplicity > 0) roots.push_back(ExactRoot{candidate, multiplicity});
    }
    return roots;
}

}  // namespace outforest
