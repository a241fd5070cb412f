#include "pivotlab/exact.hpp"

#include <numeric>

namespace pivotlab {

namespace {

struct IntegerSystem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<mpz_class> m;
    mpz_class& operator()(std::size_t i, std::size_t j) { return m[i * cols + j]; }
};

/// Scales [A | extra columns] by the lcm of all denominators.
IntegerSystem clear_denominators(const Matrix<Rational>& a, const std::vector<Rational>* rhs) {
    mpz_class l = 1;
    for (const auto& x : a.data()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    if (rhs)
        for (const auto& x : *rhs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    IntegerSystem s;
    s.rows = a.rows();
    s.cols = a.cols() + (rhs ? 1 : 0);
    s.m.resize(s.rows * s.cols);
    auto scaled = [&](const Rational& x) {
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
        return mpz_class(x.get_num() * q);
    };
    for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = scaled(a(i, j));
        if (rhs) s(i, a.cols()) = scaled((*rhs)[i]);
    }
    return s;
}

/// One Bareiss step on columns > k: M_ij <- (p M_ij - M_ik M_kj) / d.
void bareiss_step(IntegerSystem& s, std::size_t k, const mpz_class& d, mpz_class& tmp) {
    const mpz_class& p = s(k, k);
    for (std::size_t i = k + 1; i < s.rows; ++i) {
        mpz_class& mik = s(i, k);
        for (std::size_t j = k + 1; j < s.cols; ++j) {
            mpz_mul(tmp.get_mpz_t(), p.get_mpz_t(), s(i, j).get_mpz_t());
            mpz_submul(tmp.get_mpz_t(), mik.get_mpz_t(), s(k, j).get_mpz_t());
            mpz_divexact(s(i, j).get_mpz_t(), tmp.get_mpz_t(), d.get_mpz_t());
        }
        mik = 0;
    }
}

std::size_t pick_pivot(IntegerSystem& s, std::size_t k) {
    std::size_t y = k;
    for (std::size_t i = k + 1; i < s.rows; ++i)
        if (mpz_cmpabs(s(i, k).get_mpz_t(), s(y, k).get_mpz_t()) > 0) y = i;
    return y;
}

void swap_rows(IntegerSystem& s, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < s.cols; ++j) mpz_swap(s(a, j).get_mpz_t(), s(b, j).get_mpz_t());
}

}  // namespace

ExactGeppSummary exact_gepp_summary(const Matrix<Rational>& a) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("exact GEPP needs a square matrix");
    const std::size_t n = a.rows();
    IntegerSystem s = clear_denominators(a, nullptr);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Largest entry of step k as the fraction best_num / best_den (den > 0).
    mpz_class best_num = 0;
    for (const auto& x : s.m)
        if (mpz_cmpabs(x.get_mpz_t(), best_num.get_mpz_t()) > 0) best_num = abs(x);
    const mpz_class input_num = best_num;
    mpz_class best_den = 1;

    ExactGeppSummary out;
    mpz_class d = 1;
    mpz_class tmp;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t y = pick_pivot(s, k);
        if (sgn(s(y, k)) == 0) throw ZeroPivot(k);
        out.pivot_indices.push_back(order[y]);
        swap_rows(s, k, y);
        std::swap(order[k], order[y]);
        bareiss_step(s, k, d, tmp);
        d = s(k, k);
        mpz_class step_max = 0;
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                if (mpz_cmpabs(s(i, j).get_mpz_t(), step_max.get_mpz_t()) > 0) step_max = abs(s(i, j));
        // step_max / |d| > best_num / best_den ?
        const mpz_class abs_d = abs(d);
        if (step_max * best_den > best_num * abs_d) {
            best_num = step_max;
            best_den = abs_d;
        }
    }
    out.last_pivot_zero = sgn(s(n - 1, n - 1)) == 0;

    mpz_class l = 1;
    for (const auto& x : a.data()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    out.max_abs_input = Rational(input_num, l);
    out.max_abs_input.canonicalize();
    out.max_abs_intermediate = Rational(best_num, best_den * l);
    out.max_abs_intermediate.canonicalize();
    if (sgn(input_num) == 0) throw ZeroPivot(0);
    out.growth = Rational(best_num, best_den * input_num);
    out.growth.canonicalize();
    return out;
}

Rational determinant(const Matrix<Rational>& a) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("determinant needs a square matrix");
    const std::size_t n = a.rows();
    IntegerSystem s = clear_denominators(a, nullptr);
    mpz_class d = 1;
    mpz_class tmp;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t y = pick_pivot(s, k);
        if (sgn(s(y, k)) == 0) return Rational(0);
        if (y != k) sign = -sign;
        swap_rows(s, k, y);
        bareiss_step(s, k, d, tmp);
        d = s(k, k);
    }
    mpz_class l = 1;
    for (const auto& x : a.data()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    mpz_class ln;
    mpz_pow_ui(ln.get_mpz_t(), l.get_mpz_t(), static_cast<unsigned long>(n));
    Rational out(s(n - 1, n - 1) * sign, ln);
    out.canonicalize();
    return out;
}

std::vector<Rational> exact_solve(const Matrix<Rational>& a, const std::vector<Rational>& b) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("exact_solve needs a square matrix");
    if (b.size() != a.rows()) throw DimensionMismatch("right-hand side length differs from n");
    const std::size_t n = a.rows();
    IntegerSystem s = clear_denominators(a, &b);
    mpz_class d = 1;
    mpz_class tmp;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t y = pick_pivot(s, k);
        if (sgn(s(y, k)) == 0) throw SingularBlock("matrix is singular");
        swap_rows(s, k, y);
        bareiss_step(s, k, d, tmp);
        d = s(k, k);
    }
    if (sgn(s(n - 1, n - 1)) == 0) throw SingularBlock("matrix is singular");
    std::vector<Rational> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        Rational acc(s(ii, n));
        for (std::size_t j = ii + 1; j < n; ++j) acc -= Rational(s(ii, j)) * x[j];
        x[ii] = acc / Rational(s(ii, ii));
    }
    return x;
}

}  // namespace pivotlab
