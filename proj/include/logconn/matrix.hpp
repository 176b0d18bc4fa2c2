#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "logconn/error.hpp"

namespace logconn {

/// Dense row-major matrix over an exact field-like type. T{} must be the zero
/// element and T(1) the unit; is_zero() and the four operations are required
/// by the elimination routines below.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, const T& fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw MathError(ErrorCode::invalid_argument, "ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(size_t n)
    {
        Matrix m(n, n);
        for (size_t i = 0; i < n; ++i)
            m(i, i) = T(1);
        return m;
    }

    static Matrix diagonal(const std::vector<T>& d)
    {
        Matrix m(d.size(), d.size());
        for (size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    /// Entrywise map to another entry type.
    template <typename F>
    auto map(F&& f) const -> Matrix<decltype(f(std::declval<const T&>()))>
    {
        Matrix<decltype(f(std::declval<const T&>()))> out(rows_, cols_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j)
                out(i, j) = f((*this)(i, j));
        return out;
    }

    bool is_zero() const
    {
        for (const auto& x : data_)
            if (!x.is_zero())
                return false;
        return true;
    }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix column(size_t j) const
    {
        Matrix c(rows_, 1);
        for (size_t i = 0; i < rows_; ++i)
            c(i, 0) = (*this)(i, j);
        return c;
    }

    Matrix block(size_t r0, size_t c0, size_t nr, size_t nc) const
    {
        Matrix b(nr, nc);
        for (size_t i = 0; i < nr; ++i)
            for (size_t j = 0; j < nc; ++j)
                b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }

    void set_block(size_t r0, size_t c0, const Matrix& b)
    {
        for (size_t i = 0; i < b.rows(); ++i)
            for (size_t j = 0; j < b.cols(); ++j)
                (*this)(r0 + i, c0 + j) = b(i, j);
    }

    Matrix& operator+=(const Matrix& o)
    {
        check_shape(o);
        for (size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o)
    {
        check_shape(o);
        for (size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(const T& s)
    {
        for (auto& x : data_)
            x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
    friend Matrix operator*(const T& s, Matrix a)
    {
        for (auto& x : a.data_)
            x = s * x;
        return a;
    }
    Matrix operator-() const
    {
        Matrix r = *this;
        for (auto& x : r.data_)
            x = -x;
        return r;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw MathError(ErrorCode::invalid_argument, "matrix product shape mismatch");
        Matrix r(a.rows_, b.cols_);
        for (size_t i = 0; i < a.rows_; ++i)
            for (size_t k = 0; k < a.cols_; ++k) {
                const T& x = a(i, k);
                if (x.is_zero())
                    continue;
                for (size_t j = 0; j < b.cols_; ++j)
                    if (!b(k, j).is_zero())
                        r(i, j) += x * b(k, j);
            }
        return r;
    }

    friend bool operator==(const Matrix& a, const Matrix& b)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            return false;
        for (size_t k = 0; k < a.data_.size(); ++k)
            if (!(a.data_[k] == b.data_[k]))
                return false;
        return true;
    }

    T trace() const
    {
        T t{};
        for (size_t i = 0; i < std::min(rows_, cols_); ++i)
            t += (*this)(i, i);
        return t;
    }

    Matrix pow(unsigned e) const
    {
        Matrix result = identity(rows_);
        Matrix base = *this;
        while (e) {
            if (e & 1)
                result = result * base;
            e >>= 1;
            if (e)
                base = base * base;
        }
        return result;
    }

    friend std::ostream& operator<<(std::ostream& os, const Matrix& m)
    {
        os << "[";
        for (size_t i = 0; i < m.rows_; ++i) {
            os << (i ? "; " : "");
            for (size_t j = 0; j < m.cols_; ++j)
                os << (j ? ", " : "") << m(i, j);
        }
        return os << "]";
    }

private:
    void check_shape(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw MathError(ErrorCode::invalid_argument, "matrix shape mismatch");
    }

    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<T> data_;
};

/// Reduced row echelon form in place; returns pivot columns.
template <typename T>
std::vector<size_t> rref(Matrix<T>& m)
{
    std::vector<size_t> pivots;
    size_t row = 0;
    for (size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        size_t sel = row;
        while (sel < m.rows() && m(sel, col).is_zero())
            ++sel;
        if (sel == m.rows())
            continue;
        if (sel != row)
            for (size_t j = 0; j < m.cols(); ++j)
                std::swap(m(sel, j), m(row, j));
        T inv = T(1) / m(row, col);
        for (size_t j = col; j < m.cols(); ++j)
            m(row, j) = m(row, j) * inv;
        for (size_t i = 0; i < m.rows(); ++i) {
            if (i == row || m(i, col).is_zero())
                continue;
            T f = m(i, col);
            for (size_t j = col; j < m.cols(); ++j)
                if (!m(row, j).is_zero())
                    m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <typename T>
size_t rank(Matrix<T> m)
{
    return rref(m).size();
}

/// Basis of the right nullspace {x : m x = 0}, one column per vector.
template <typename T>
std::vector<Matrix<T>> nullspace(Matrix<T> m)
{
    std::vector<size_t> pivots = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (size_t p : pivots)
        is_pivot[p] = true;
    std::vector<Matrix<T>> basis;
    for (size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free])
            continue;
        Matrix<T> v(m.cols(), 1);
        v(free, 0) = T(1);
        for (size_t r = 0; r < pivots.size(); ++r)
            v(pivots[r], 0) = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Columns side by side.
template <typename T>
Matrix<T> hstack(const std::vector<Matrix<T>>& cols, size_t rows)
{
    size_t total = 0;
    for (const auto& c : cols)
        total += c.cols();
    Matrix<T> out(rows, total);
    size_t at = 0;
    for (const auto& c : cols) {
        out.set_block(0, at, c);
        at += c.cols();
    }
    return out;
}

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& m)
{
    if (!m.square())
        throw MathError(ErrorCode::invalid_argument, "inverse of non-square matrix");
    size_t n = m.rows();
    Matrix<T> aug(n, 2 * n);
    aug.set_block(0, 0, m);
    aug.set_block(0, n, Matrix<T>::identity(n));
    std::vector<size_t> pivots = rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1)
        return std::nullopt;
    return aug.block(0, n, n, n);
}

template <typename T>
Matrix<T> inverse_or_throw(const Matrix<T>& m)
{
    auto inv = inverse(m);
    if (!inv)
        throw MathError(ErrorCode::division_by_zero, "singular matrix");
    return *inv;
}

/// Determinant by fraction-producing elimination.
template <typename T>
T determinant(Matrix<T> m)
{
    if (!m.square())
        throw MathError(ErrorCode::invalid_argument, "determinant of non-square matrix");
    size_t n = m.rows();
    T det(1);
    for (size_t col = 0; col < n; ++col) {
        size_t sel = col;
        while (sel < n && m(sel, col).is_zero())
            ++sel;
        if (sel == n)
            return T{};
        if (sel != col) {
            for (size_t j = 0; j < n; ++j)
                std::swap(m(sel, j), m(col, j));
            det = -det;
        }
        det *= m(col, col);
        T inv = T(1) / m(col, col);
        for (size_t i = col + 1; i < n; ++i) {
            if (m(i, col).is_zero())
                continue;
            T f = m(i, col) * inv;
            for (size_t j = col; j < n; ++j)
                m(i, j) -= f * m(col, j);
        }
    }
    return det;
}

/// Solve X with A X = B (A square invertible).
template <typename T>
Matrix<T> solve(const Matrix<T>& a, const Matrix<T>& b)
{
    return inverse_or_throw(a) * b;
}

}  // namespace logconn
