#include "pivotlab/elimination.hpp"

namespace pivotlab {

namespace {

Matrix<Rational> block(const Matrix<Rational>& m, std::size_t r0, std::size_t r1, std::size_t c0,
                       std::size_t c1) {
    return submatrix(m, IndexSet::range(r0, r1), IndexSet::range(c0, c1));
}

Matrix<Rational> row_vector(const std::vector<Rational>& v) {
    return Matrix<Rational>(1, v.size(), v);
}

}  // namespace

Matrix<Rational> solve_exact(const Matrix<Rational>& a, const Matrix<Rational>& b) {
    if (!a.is_square()) throw DimensionMismatch("solve_exact needs a square matrix");
    if (b.rows() != a.rows()) throw DimensionMismatch("right-hand side row count differs");
    EliminationTrace<Rational> tr;
    try {
        tr = gepp_factor(a);
    } catch (const ZeroPivot& e) {
        throw SingularBlock(std::string("singular block: ") + e.what());
    }
    if (tr.last_pivot_zero) throw SingularBlock("singular block: last pivot is zero");
    Matrix<Rational> x(a.cols(), b.cols());
    std::vector<Rational> col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        const auto sol = solve_with_trace(tr, col);
        for (std::size_t i = 0; i < sol.size(); ++i) x(i, j) = sol[i];
    }
    return x;
}

Matrix<Rational> schur_complement_rows(const Matrix<Rational>& a, const IndexSet& pivots, std::size_t k,
                                       const IndexSet& rows) {
    const std::size_t n = a.rows();
    if (!a.is_square()) throw DimensionMismatch("schur_complement_rows needs a square matrix");
    if (pivots.size() != k) throw std::invalid_argument("pivot set size must equal k");
    if (k >= n) throw std::invalid_argument("k must be < n");
    for (auto j : rows) {
        if (j >= n) throw IndexOutOfBounds("row " + std::to_string(j) + " out of range");
        if (pivots.contains(j)) throw std::invalid_argument("requested row is a pivot row");
    }
    const IndexSet lead = IndexSet::range(0, k);
    const IndexSet trail = IndexSet::range(k, n);
    Matrix<Rational> out = submatrix(a, rows, trail);
    if (k == 0) return out;
    const Matrix<Rational> coeff = solve_exact(submatrix(a, pivots, lead), submatrix(a, pivots, trail));
    std::size_t q = 0;
    for (auto j : rows) {
        for (std::size_t c = 0; c < k; ++c) {
            const Rational& ajc = a(j, c);
            if (is_zero(ajc)) continue;
            for (std::size_t t = 0; t < n - k; ++t) sub_mul(out(q, t), ajc, coeff(c, t));
        }
        ++q;
    }
    return out;
}

Rational verify_recursion_identity(const Matrix<Rational>& b, const std::vector<Rational>& x,
                                   std::size_t split) {
    const std::size_t t = b.rows();
    if (!b.is_square() || x.size() != t) throw DimensionMismatch("B must be square and X of matching length");
    if (split == 0 || split >= t) throw std::invalid_argument("split must lie in [1, t-1]");
    const std::size_t s = split;

    // Left side: [-X B^-1, 1].
    const Matrix<Rational> y = solve_exact(b.transpose(), row_vector(x).transpose());
    std::vector<Rational> lhs(t + 1);
    for (std::size_t i = 0; i < t; ++i) lhs[i] = -y(i, 0);
    lhs[t] = 1;

    const auto b_ul = block(b, 0, s, 0, s);
    const auto b_ur = block(b, 0, s, s, t);
    const auto b_ll = block(b, s, t, 0, s);
    const auto b_lr = block(b, s, t, s, t);
    const auto b_u = block(b, 0, s, 0, t);
    const auto b_l = block(b, s, t, 0, t);

    const auto z = solve_exact(b_ul, b_ur);  // B_ul^-1 B_ur
    const auto b_prime = subtract(b_lr, multiply(b_ll, z));
    const auto xm = row_vector(x);
    const auto x_prime = subtract(block(xm, 0, 1, s, t), multiply(block(xm, 0, 1, 0, s), z));
    const auto y_prime = solve_exact(b_prime.transpose(), x_prime.transpose());  // (X' B'^-1)^T

    // Right pseudoinverse of B_u.
    const auto gram = multiply(b_u, b_u.transpose());
    const auto b_u_pinv =
        multiply(b_u.transpose(), solve_exact(gram, Matrix<Rational>::identity(s, Rational(1))));

    // [B_l; X]
    Matrix<Rational> stacked(t - s + 1, t);
    for (std::size_t i = 0; i < t - s; ++i)
        for (std::size_t j = 0; j < t; ++j) stacked(i, j) = b_l(i, j);
    for (std::size_t j = 0; j < t; ++j) stacked(t - s, j) = x[j];
    const auto sv = multiply(stacked, b_u_pinv);  // (t-s+1) x s

    std::vector<Rational> left(t - s + 1);
    for (std::size_t i = 0; i < t - s; ++i) left[i] = -y_prime(i, 0);
    left[t - s] = 1;

    std::vector<Rational> rhs(t + 1);
    for (std::size_t c = 0; c < s; ++c) {
        Rational acc = 0;
        for (std::size_t i = 0; i < t - s + 1; ++i) acc -= left[i] * sv(i, c);
        rhs[c] = acc;
    }
    for (std::size_t i = 0; i < t - s + 1; ++i) rhs[s + i] = left[i];

    Rational worst = 0;
    for (std::size_t i = 0; i <= t; ++i) {
        const Rational d = abs(lhs[i] - rhs[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace pivotlab
