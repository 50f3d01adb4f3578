#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "outforest/rational.hpp"

namespace outforest {

// Dense row-major matrix over an arbitrary field scalar (Rational, double,
// std::complex<double>). Sized for the desk-scale problems this library
// targets; no sparsity, no views.
template <typename T>
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& value = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const Matrix&) const = default;

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(const T& s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
    friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& x) {
        if (a.cols_ != x.size()) throw std::invalid_argument("matrix-vector product: shape mismatch");
        std::vector<T> y(a.rows_, T{});
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
        return y;
    }

    T trace() const {
        require_square();
        T t{};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    T row_sum(std::size_t i) const {
        T s{};
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
        return s;
    }

    void require_square() const {
        if (!square()) throw std::invalid_argument("operation requires a square matrix");
    }

  private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix op: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <typename T>
Matrix<T> matrix_power(const Matrix<T>& a, unsigned k) {
    a.require_square();
    Matrix<T> result = Matrix<T>::identity(a.rows());
    Matrix<T> base = a;
    while (k > 0) {
        if (k & 1u) result = result * base;
        base = base * base;
        k >>= 1u;
    }
    return result;
}

inline Matrix<double> to_double(const Matrix<Rational>& m) {
    Matrix<double> d(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = to_double(m(i, j));
    return d;
}

inline std::vector<double> to_double(const std::vector<Rational>& v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = to_double(v[i]);
    return d;
}

inline double max_abs(const Matrix<double>& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
    return r;
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double r = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r = std::max(r, std::abs(a(i, j) - b(i, j)));
    return r;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

// Largest column sum of absolute values (the induced 1-norm).
inline double one_norm(const Matrix<double>& m) {
    double r = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        r = std::max(r, s);
    }
    return r;
}

// Rank over the rationals by Gaussian elimination; exact, no thresholds.
inline std::size_t exact_rank(Matrix<Rational> m) {
    std::size_t rank = 0;
    const std::size_t rows = m.rows(), cols = m.cols();
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && m(pivot, col) == 0) ++pivot;
        if (pivot == rows) continue;
        if (pivot != rank)
            for (std::size_t j = col; j < cols; ++j) std::swap(m(pivot, j), m(rank, j));
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (m(i, col) == 0) continue;
            Rational factor = m(i, col) / m(rank, col);
            for (std::size_t j = col; j < cols; ++j) m(i, j) -= factor * m(rank, j);
        }
        ++rank;
    }
    return rank;
}

struct singular_matrix_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solves A X = B by LU with partial pivoting. Throws singular_matrix_error
// when a pivot vanishes to machine scale.
inline Matrix<double> solve(Matrix<double> a, Matrix<double> b) {
    a.require_square();
    const std::size_t n = a.rows();
    if (b.rows() != n) throw std::invalid_argument("solve: shape mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
        if (std::abs(a(pivot, col)) < 1e-300)
            throw singular_matrix_error("solve: numerically singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(pivot, j), b(col, j));
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double factor = a(i, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(i, j) -= factor * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= factor * b(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = b(col, j);
            for (std::size_t k = col + 1; k < n; ++k) s -= a(col, k) * b(k, j);
            b(col, j) = s / a(col, col);
        }
    }
    return b;
}

inline Matrix<double> inverse(const Matrix<double>& a) {
    return solve(a, Matrix<double>::identity(a.rows()));
}

}  // namespace outforest
