#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace outforest {

// Exact rational scalar. All graph weights and every exact-mode matrix entry
// use this type; floating point enters only through explicit conversions.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Every finite double is a dyadic rational; the conversion is exact.
inline Rational rational_from_double(double x) {
    Rational q(x);
    q.canonicalize();
    return q;
}

// mpq_get_d truncates; one exact correction step lands on the nearest double.
inline double to_double(const Rational& q) {
    double d = q.get_d();
    if (!std::isfinite(d)) return d;
    d += Rational(q - rational_from_double(d)).get_d();
    return d;
}

// Renders canonically as "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& q) {
    return q.get_str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

// Accepts "p", "p/q" (integers, q > 0) and decimal literals such as "0.5" or
// "2.5e-3"; decimals convert exactly (0.5 -> 1/2). Throws std::invalid_argument
// on anything else.
inline Rational rational_from_string(std::string_view text) {
    const std::string original(text);
    const auto fail = [&]() -> Rational {
        throw std::invalid_argument("not a rational literal: '" + original + "'");
    };

    bool negative = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return fail();

    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        if (!detail::all_digits(num) || !detail::all_digits(den)) return fail();
        mpz_class numerator{std::string(num)};
        mpz_class denominator{std::string(den)};
        if (denominator == 0)
            throw std::invalid_argument("zero denominator: '" + original + "'");
        Rational q{numerator, denominator};
        q.canonicalize();
        if (negative) q = -q;
        return q;
    }

    // Decimal literal with optional fraction and exponent.
    std::string_view mantissa = text;
    long exponent = 0;
    const auto epos = text.find_first_of("eE");
    if (epos != std::string_view::npos) {
        mantissa = text.substr(0, epos);
        std::string_view exp = text.substr(epos + 1);
        bool exp_neg = false;
        if (!exp.empty() && (exp.front() == '+' || exp.front() == '-')) {
            exp_neg = exp.front() == '-';
            exp.remove_prefix(1);
        }
        if (!detail::all_digits(exp) || exp.size() > 6) return fail();
        exponent = std::stol(std::string(exp));
        if (exp_neg) exponent = -exponent;
    }

    std::string digits;
    long frac_digits = 0;
    const auto dot = mantissa.find('.');
    if (dot != std::string_view::npos) {
        std::string_view ip = mantissa.substr(0, dot);
        std::string_view fp = mantissa.substr(dot + 1);
        if (ip.empty() && fp.empty()) return fail();
        if (!ip.empty() && !detail::all_digits(ip)) return fail();
        if (!fp.empty() && !detail::all_digits(fp)) return fail();
        digits = std::string(ip) + std::string(fp);
        frac_digits = static_cast<long>(fp.size());
    } else {
        if (!detail::all_digits(mantissa)) return fail();
        digits = std::string(mantissa);
    }
    if (digits.empty()) return fail();

    mpz_class num(digits);
    mpz_class den(1);
    const long shift = exponent - frac_digits;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    if (shift >= 0)
        num *= pow10;
    else
        den = pow10;
    Rational q(num, den);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

}  // namespace outforest
