#pragma once

#include <cmath>
#include <stdexcept>

#include "outforest/matrix.hpp"

namespace outforest {

struct expm_overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense matrix exponential by scaling and squaring with a fixed [13/13] Pade
// approximant. Backward stable at desk scale; inputs whose norm overflows the
// scaling bound are rejected rather than silently degraded.
inline Matrix<double> expm(const Matrix<double>& a) {
    a.require_square();
    const std::size_t n = a.rows();
    const double norm = one_norm(a);
    if (!std::isfinite(norm))
        throw expm_overflow_error("expm: input matrix has non-finite 1-norm");

    // theta_13 from the standard [13/13] backward-error analysis.
    constexpr double theta = 5.371920351148152;
    int squarings = 0;
    if (norm > theta) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta)));
        if (squarings > 1024) throw expm_overflow_error("expm: norm too large to scale");
    }
    const double scale = std::ldexp(1.0, -squarings);
    Matrix<double> m = a * scale;

    static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0,
                                     7771770303897600.0,  1187353796428800.0,
                                     129060195264000.0,   10559470521600.0,
                                     670442572800.0,      33522128640.0,
                                     1323241920.0,        40840800.0,
                                     960960.0,            16380.0,
                                     182.0,               1.0};

    const Matrix<double> ident = Matrix<double>::identity(n);
    const Matrix<double> m2 = m * m;
    const Matrix<double> m4 = m2 * m2;
    const Matrix<double> m6 = m2 * m4;

    Matrix<double> u = m * (m6 * (b[13] * m6 + b[11] * m4 + b[9] * m2) + b[7] * m6 + b[5] * m4 +
                            b[3] * m2 + b[1] * ident);
    Matrix<double> v = m6 * (b[12] * m6 + b[10] * m4 + b[8] * m2) + b[6] * m6 + b[4] * m4 +
                       b[2] * m2 + b[0] * ident;

    Matrix<double> result = solve(v - u, v + u);
    for (int s = 0; s < squarings; ++s) result = result * result;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(result(i, j)))
                throw expm_overflow_error("expm: overflow during squaring");
    return result;
}

}  // namespace outforest
