// Gaussian elimination without pivoting (GENP) and with partial pivoting
// (GEPP) over any scalar field, with full traces.
//
// Conventions: rows, columns and steps are 0-based. Step k eliminates column
// k and produces A^(k+1) from A^(k), where A^(k+1) = (Id - tau e_k^T) P_k A^(k)
// keeps rows 0..k and zeroes column k below the diagonal. A^(0) = A and
// U = A^(n-1).
#pragma once

#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pivotlab/matrix.hpp"

namespace pivotlab {

enum class Variant { no_pivoting, partial_pivoting };

inline const char* to_string(Variant v) {
    return v == Variant::no_pivoting ? "no_pivoting" : "partial_pivoting";
}

/// Pivot candidate column is zero (GEPP) or the diagonal pivot is zero (GENP).
class ZeroPivot : public std::runtime_error {
public:
    explicit ZeroPivot(std::size_t step)
        : std::runtime_error("zero pivot at step " + std::to_string(step)), step_(step) {}
    [[nodiscard]] std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

class MissingIntermediates : public std::logic_error {
public:
    MissingIntermediates() : std::logic_error("trace was recorded without intermediates") {}
};

class SingularBlock : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SingularU : public std::domain_error {
public:
    explicit SingularU(std::size_t i)
        : std::domain_error("U has a zero diagonal entry at " + std::to_string(i)) {}
};

/// Rows `step` and `row` were exchanged before eliminating column `step`.
struct Transposition {
    std::size_t step = 0;
    std::size_t row = 0;
    bool operator==(const Transposition&) const = default;
};

struct FactorOptions {
    bool record_intermediates = false;
    /// Intermediates are kept only for n <= cap.
    std::size_t intermediate_cap = 256;
};

template <class T>
struct EliminationTrace {
    Variant variant = Variant::partial_pivoting;
    std::size_t n = 0;
    /// Original row label of the pivot used at each of the n-1 steps.
    std::vector<std::size_t> pivot_indices;
    std::vector<Transposition> transpositions;
    /// multipliers[k][i - k - 1] = tau^(k)_i for permuted positions i > k.
    std::vector<std::vector<T>> multipliers;
    /// A^(0), ..., A^(n-1) when recorded.
    std::vector<Matrix<T>> intermediates;
    Matrix<T> L;
    Matrix<T> U;
    /// Row q of PA is row row_order[q] of A.
    std::vector<std::size_t> row_order;
    /// max over k, i, j of |A^(k)_ij|, and max |A_ij|.
    T max_abs_intermediate{};
    T max_abs_input{};
    /// step_max[k] = max_ij |A^(k)_ij| for k = 0, ..., n-1.
    std::vector<T> step_max;
    /// U(n-1, n-1) == 0; the algorithm itself does not flag this.
    bool last_pivot_zero = false;
    std::string field;

    [[nodiscard]] bool has_intermediates() const { return !intermediates.empty(); }

    [[nodiscard]] Matrix<T> permutation_matrix() const {
        const T one = one_like(U(0, 0));
        Matrix<T> p(n, n, zero_like(one));
        for (std::size_t q = 0; q < n; ++q) p(q, row_order[q]) = one;
        return p;
    }

    /// Row order after the first k transpositions.
    [[nodiscard]] std::vector<std::size_t> row_order_after(std::size_t k) const {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t s = 0; s < k && s < transpositions.size(); ++s)
            std::swap(order[transpositions[s].step], order[transpositions[s].row]);
        return order;
    }
};

/// Runs GENP or GEPP. GEPP picks the largest |entry| in the pivot column,
/// smallest row index on ties. Throws ZeroPivot.
template <class T>
EliminationTrace<T> factor(const Matrix<T>& a, Variant variant, const FactorOptions& opts = {}) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("factorization needs a square matrix");
    const std::size_t n = a.rows();
    EliminationTrace<T> tr;
    tr.variant = variant;
    tr.n = n;
    tr.field = field_tag(a(0, 0));
    const T zero = zero_like(a(0, 0));
    const T one = one_like(a(0, 0));
    const bool record = opts.record_intermediates && n <= opts.intermediate_cap;

    Matrix<T> w = a;
    Matrix<T> l = Matrix<T>::identity(n, one);
    tr.row_order.resize(n);
    std::iota(tr.row_order.begin(), tr.row_order.end(), std::size_t{0});
    tr.max_abs_input = max_abs(a);
    T running_max = tr.max_abs_input;
    tr.step_max.push_back(tr.max_abs_input);
    if (record) tr.intermediates.push_back(w);

    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t y = k;
        if (variant == Variant::partial_pivoting) {
            for (std::size_t i = k + 1; i < n; ++i)
                if (cmp_abs(w(i, k), w(y, k)) > 0) y = i;
        }
        if (is_zero(w(y, k))) throw ZeroPivot(k);
        tr.pivot_indices.push_back(tr.row_order[y]);
        tr.transpositions.push_back({k, y});
        if (y != k) {
            w.swap_rows(k, y);
            // Multipliers already stored in L move with their rows.
            for (std::size_t j = 0; j < k; ++j) std::swap(l(k, j), l(y, j));
            std::swap(tr.row_order[k], tr.row_order[y]);
        }
        std::vector<T> tau;
        tau.reserve(n - k - 1);
        for (std::size_t i = k + 1; i < n; ++i) {
            T t = w(i, k);
            t /= w(k, k);
            for (std::size_t j = k + 1; j < n; ++j) {
                sub_mul(w(i, j), w(k, j), t);
                if (cmp_abs(w(i, j), running_max) > 0) running_max = abs_value(w(i, j));
            }
            w(i, k) = zero;
            l(i, k) = t;
            tau.push_back(std::move(t));
        }
        tr.multipliers.push_back(std::move(tau));
        tr.step_max.push_back(max_abs(w));
        if (record) tr.intermediates.push_back(w);
    }
    tr.last_pivot_zero = is_zero(w(n - 1, n - 1));
    tr.max_abs_intermediate = running_max;
    tr.L = std::move(l);
    tr.U = std::move(w);
    return tr;
}

template <class T>
EliminationTrace<T> genp_factor(const Matrix<T>& a, bool record_intermediates = false) {
    return factor(a, Variant::no_pivoting, FactorOptions{record_intermediates});
}

template <class T>
EliminationTrace<T> gepp_factor(const Matrix<T>& a, bool record_intermediates = false) {
    return factor(a, Variant::partial_pivoting, FactorOptions{record_intermediates});
}

/// M^(k) = P_1^-1 ... P_k^-1 A^(k): A^(k) with rows returned to their
/// original labels.
template <class T>
Matrix<T> unpermuted_intermediate(const EliminationTrace<T>& tr, std::size_t k) {
    if (!tr.has_intermediates()) throw MissingIntermediates();
    if (k >= tr.intermediates.size()) throw IndexOutOfBounds("no intermediate " + std::to_string(k));
    const auto order = tr.row_order_after(k);
    const Matrix<T>& ak = tr.intermediates[k];
    Matrix<T> m = ak;
    for (std::size_t q = 0; q < tr.n; ++q)
        for (std::size_t j = 0; j < tr.n; ++j) m(order[q], j) = ak(q, j);
    return m;
}

/// I_1, ..., I_{n-1}; I_r holds the first r pivot rows in pivot order.
template <class T>
std::vector<IndexSet> pivot_index_sets(const EliminationTrace<T>& tr) {
    std::vector<IndexSet> sets;
    IndexSet cur;
    for (auto i : tr.pivot_indices) {
        cur.push_back(i);
        sets.push_back(cur);
    }
    return sets;
}

/// x with PAx = Pb: y = L^-1 (P b), x = U^-1 y, in the trace's field.
template <class T>
std::vector<T> solve_with_trace(const EliminationTrace<T>& tr, const std::vector<T>& b) {
    const std::size_t n = tr.n;
    if (b.size() != n) throw DimensionMismatch("right-hand side length differs from n");
    std::vector<T> y;
    y.reserve(n);
    for (std::size_t q = 0; q < n; ++q) y.push_back(b[tr.row_order[q]]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) sub_mul(y[i], tr.L(i, j), y[j]);
    for (std::size_t ii = n; ii-- > 0;) {
        if (is_zero(tr.U(ii, ii))) throw SingularU(ii);
        for (std::size_t j = ii + 1; j < n; ++j) sub_mul(y[ii], tr.U(ii, j), y[j]);
        y[ii] /= tr.U(ii, ii);
    }
    return y;
}

/// Rows `rows` of A_{[n],[k,n)} - A_{[n],[0,k)} (A_{I,[0,k)})^-1 A_{I,[k,n)}
/// with |I| = k. Throws SingularBlock when A_{I,[0,k)} is singular.
Matrix<Rational> schur_complement_rows(const Matrix<Rational>& a, const IndexSet& pivots, std::size_t k,
                                       const IndexSet& rows);

/// Solves A X = B exactly by GEPP. Throws SingularBlock.
Matrix<Rational> solve_exact(const Matrix<Rational>& a, const Matrix<Rational>& b);

/// Evaluates both sides of
///   [-X B^-1, 1] = [-X' B'^-1, 1] [-[B_l; X] B_u^+, Id]
/// for B split after `split` rows and columns, X a row vector, B_u^+ the
/// right pseudoinverse B_u^T (B_u B_u^T)^-1. Returns the max abs difference.
Rational verify_recursion_identity(const Matrix<Rational>& b, const std::vector<Rational>& x,
                                   std::size_t split);

}  // namespace pivotlab
