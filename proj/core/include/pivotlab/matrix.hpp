// Dense row-major matrices over a single scalar field, index sets, and
// Hilbert-Schmidt norms.
#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pivotlab/field.hpp"

namespace pivotlab {

class IndexOutOfBounds : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <class T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, T{}) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw DimensionMismatch("entry count does not match shape");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionMismatch("ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    /// n x n identity; `one` fixes the field (and precision).
    static Matrix identity(std::size_t n, const T& one) {
        Matrix m(n, n, zero_like(one));
        for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool is_square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    T& at(std::size_t i, std::size_t j) {
        check(i, j);
        return data_[i * cols_ + j];
    }
    const T& at(std::size_t i, std::size_t j) const {
        check(i, j);
        return data_[i * cols_ + j];
    }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                         data_.begin() + b * cols_);
    }

    [[nodiscard]] const std::vector<T>& data() const { return data_; }

    [[nodiscard]] Matrix transpose() const {
        Matrix t;
        t.rows_ = cols_;
        t.cols_ = rows_;
        t.data_.reserve(data_.size());
        for (std::size_t j = 0; j < cols_; ++j)
            for (std::size_t i = 0; i < rows_; ++i) t.data_.push_back((*this)(i, j));
        return t;
    }

    template <class F>
    [[nodiscard]] auto map(F&& f) const -> Matrix<decltype(f(std::declval<const T&>()))> {
        using U = decltype(f(std::declval<const T&>()));
        std::vector<U> out;
        out.reserve(data_.size());
        for (const auto& x : data_) out.push_back(f(x));
        return Matrix<U>(rows_, cols_, std::move(out));
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void check(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) {
            throw IndexOutOfBounds("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") outside " + std::to_string(rows_) + "x" +
                                   std::to_string(cols_));
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Ordered set of 0-based indices. Keeps insertion order (pivot order for
/// pivot sets); duplicates are rejected.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(std::initializer_list<std::size_t> idx) {
        for (auto i : idx) push_back(i);
    }
    explicit IndexSet(const std::vector<std::size_t>& idx) {
        for (auto i : idx) push_back(i);
    }
    /// {begin, ..., end-1}
    static IndexSet range(std::size_t begin, std::size_t end) {
        IndexSet s;
        for (auto i = begin; i < end; ++i) s.order_.push_back(i);
        return s;
    }

    void push_back(std::size_t i) {
        if (contains(i)) throw std::invalid_argument("duplicate index " + std::to_string(i));
        order_.push_back(i);
    }
    [[nodiscard]] bool contains(std::size_t i) const {
        return std::find(order_.begin(), order_.end(), i) != order_.end();
    }
    [[nodiscard]] std::size_t size() const { return order_.size(); }
    [[nodiscard]] bool empty() const { return order_.empty(); }
    std::size_t operator[](std::size_t k) const { return order_[k]; }
    [[nodiscard]] auto begin() const { return order_.begin(); }
    [[nodiscard]] auto end() const { return order_.end(); }
    [[nodiscard]] const std::vector<std::size_t>& insertion_order() const { return order_; }
    [[nodiscard]] std::vector<std::size_t> sorted() const {
        auto s = order_;
        std::sort(s.begin(), s.end());
        return s;
    }
    /// Indices of [0, n) not in this set, increasing.
    [[nodiscard]] IndexSet complement(std::size_t n) const {
        IndexSet c;
        for (std::size_t i = 0; i < n; ++i)
            if (!contains(i)) c.order_.push_back(i);
        return c;
    }
    [[nodiscard]] bool is_subset_of(const IndexSet& other) const {
        return std::all_of(order_.begin(), order_.end(), [&](auto i) { return other.contains(i); });
    }
    /// Same members regardless of order.
    [[nodiscard]] bool same_members(const IndexSet& other) const { return sorted() == other.sorted(); }

    friend bool operator==(const IndexSet& a, const IndexSet& b) { return a.order_ == b.order_; }

private:
    std::vector<std::size_t> order_;
};

/// M_{rows, cols}, entries in the index sets' stored order.
template <class T>
Matrix<T> submatrix(const Matrix<T>& m, const IndexSet& rows, const IndexSet& cols) {
    for (auto i : rows)
        if (i >= m.rows()) throw IndexOutOfBounds("row index " + std::to_string(i) + " out of range");
    for (auto j : cols)
        if (j >= m.cols()) throw IndexOutOfBounds("column index " + std::to_string(j) + " out of range");
    std::vector<T> out;
    out.reserve(rows.size() * cols.size());
    for (auto i : rows)
        for (auto j : cols) out.push_back(m(i, j));
    return Matrix<T>(rows.size(), cols.size(), std::move(out));
}

template <class T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("inner dimensions differ");
    const T zero = a.rows() * a.cols() > 0 ? zero_like(a(0, 0)) : T{};
    Matrix<T> c(a.rows(), b.cols(), zero);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            if (is_zero(a(i, k))) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
        }
    return c;
}

template <class T>
Matrix<T> subtract(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("shapes differ");
    Matrix<T> c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

/// max_{i,j} |M_ij| in the matrix's own field.
template <class T>
T max_abs(const Matrix<T>& m) {
    T best = m.data().empty() ? T{} : zero_like(m(0, 0));
    for (const auto& x : m.data())
        if (cmp_abs(x, best) > 0) best = x;
    return abs_value(best);
}

template <class T>
Matrix<Rational> to_rational(const Matrix<T>& m) {
    return m.map([](const T& x) { return to_rational(x); });
}

template <class T>
Matrix<double> to_double(const Matrix<T>& m) {
    return m.map([](const T& x) { return to_double(x); });
}

/// fl(M) entrywise.
Matrix<EmulatedFloat> round_matrix(const Matrix<Rational>& m, FpConfig cfg);

/// Exact squared HS norm plus a floating approximation of its square root.
struct ExactHsNorm {
    Rational squared;
    double approx = 0.0;
};

ExactHsNorm hs_norm(const Matrix<Rational>& m);
EmulatedFloat hs_norm(const Matrix<EmulatedFloat>& m);
double hs_norm(const Matrix<double>& m);

}  // namespace pivotlab
