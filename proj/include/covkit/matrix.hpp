#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace covkit {

/// @brief Dense real matrix, row-major storage.
///
/// The universal numeric carrier of the library. Dimensions of 0 are legal
/// so that static-gain state-space models (n_x = 0) compose without special
/// cases; operations that need data simply see empty loops.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Build from nested brace lists; rows must be equally long and every
    /// entry finite.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(rows.size(), rows.size() == 0 ? 0 : rows.begin()->size());
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != m.cols_)
                throw ShapeError("from_rows: ragged row " + std::to_string(i) + " has " +
                                 std::to_string(row.size()) + " entries, expected " +
                                 std::to_string(m.cols_));
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        m.ensure_finite("from_rows input");
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    static Matrix diagonal(const std::vector<double>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Copy of the sub-block starting at (r0, c0) with shape (r, c).
    Matrix block(std::size_t r0, std::size_t c0, std::size_t r, std::size_t c) const {
        if (r0 + r > rows_ || c0 + c > cols_)
            throw ShapeError("block: window (" + std::to_string(r0) + "," + std::to_string(c0) +
                             ")+" + std::to_string(r) + "x" + std::to_string(c) +
                             " exceeds " + shape_string());
        Matrix b(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }

    /// Overwrite the sub-block starting at (r0, c0) with `sub`.
    void set_block(std::size_t r0, std::size_t c0, const Matrix& sub) {
        if (r0 + sub.rows_ > rows_ || c0 + sub.cols_ > cols_)
            throw ShapeError("set_block: target window exceeds " + shape_string());
        for (std::size_t i = 0; i < sub.rows_; ++i)
            for (std::size_t j = 0; j < sub.cols_; ++j) (*this)(r0 + i, c0 + j) = sub(i, j);
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    /// Induced 1-norm (maximum absolute column sum); the scaling measure
    /// used by the matrix exponential.
    double one_norm() const {
        double best = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double best = 0.0;
        for (double v : data_) best = std::max(best, std::abs(v));
        return best;
    }

    /// Throws NumericError naming the first non-finite entry, if any.
    void ensure_finite(const std::string& label) const {
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!std::isfinite((*this)(i, j)))
                    throw NumericError(label + ": non-finite entry at (" + std::to_string(i) +
                                       "," + std::to_string(j) + ")");
    }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    Matrix& operator+=(const Matrix& rhs) {
        require_same_shape(rhs, "+");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& rhs) {
        require_same_shape(rhs, "-");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator-(const Matrix& a) { return a * -1.0; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw ShapeError("matrix product: " + a.shape_string() + " times " +
                             b.shape_string());
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

private:
    void require_same_shape(const Matrix& rhs, const char* op) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
            throw ShapeError(std::string("matrix ") + op + ": " + shape_string() +
                             " vs " + rhs.shape_string());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// (X + X^T)/2; the canonical repair for symmetric quantities that picked up
/// asymmetric rounding.
inline Matrix symmetrize(const Matrix& x) {
    if (!x.is_square()) throw ShapeError("symmetrize: " + x.shape_string() + " is not square");
    Matrix s(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s(i, j) = 0.5 * (x(i, j) + x(j, i));
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
    double best = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        best = std::max(best, std::abs(a.data()[k] - b.data()[k]));
    return best;
}

/// Horizontal concatenation [a b]. Empty operands pass through so 0-state
/// blocks compose silently.
inline Matrix hcat(const Matrix& a, const Matrix& b) {
    if (a.cols() == 0 && a.rows() == 0) return b;
    if (b.cols() == 0 && b.rows() == 0) return a;
    if (a.rows() != b.rows())
        throw ShapeError("hcat: row mismatch " + a.shape_string() + " vs " + b.shape_string());
    Matrix c(a.rows(), a.cols() + b.cols());
    c.set_block(0, 0, a);
    c.set_block(0, a.cols(), b);
    return c;
}

/// Vertical concatenation [a; b].
inline Matrix vcat(const Matrix& a, const Matrix& b) {
    if (a.cols() == 0 && a.rows() == 0) return b;
    if (b.cols() == 0 && b.rows() == 0) return a;
    if (a.cols() != b.cols())
        throw ShapeError("vcat: column mismatch " + a.shape_string() + " vs " + b.shape_string());
    Matrix c(a.rows() + b.rows(), a.cols());
    c.set_block(0, 0, a);
    c.set_block(a.rows(), 0, b);
    return c;
}

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

/// @brief Dense complex matrix; plumbing for frequency-response solves.
class ComplexMatrix {
public:
    using value_type = std::complex<double>;

    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols, value_type fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix from_real(const Matrix& r) {
        ComplexMatrix m(r.rows(), r.cols());
        for (std::size_t i = 0; i < r.rows(); ++i)
            for (std::size_t j = 0; j < r.cols(); ++j) m(i, j) = r(i, j);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    value_type& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    value_type operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<value_type>& data() const { return data_; }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    ComplexMatrix& operator+=(const ComplexMatrix& rhs) {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
            throw ShapeError("complex +: " + shape_string() + " vs " + rhs.shape_string());
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& rhs) {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
            throw ShapeError("complex -: " + shape_string() + " vs " + rhs.shape_string());
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw ShapeError("complex product: " + a.shape_string() + " times " +
                             b.shape_string());
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const value_type aik = a(i, k);
                if (aik == value_type{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend ComplexMatrix operator*(ComplexMatrix a, value_type s) {
        for (auto& v : a.data_) v *= s;
        return a;
    }

    double max_abs() const {
        double best = 0.0;
        for (const auto& v : data_) best = std::max(best, std::abs(v));
        return best;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<value_type> data_;
};

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
    double best = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        best = std::max(best, std::abs(a.data()[k] - b.data()[k]));
    return best;
}

} // namespace covkit
