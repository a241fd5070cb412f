#include "pivotlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "pivotlab/exact.hpp"

namespace pivotlab {

namespace {

double abs_of(double x) { return std::fabs(x); }
EmulatedFloat abs_of(const EmulatedFloat& x) { return abs(x); }
double sqrt_of(double x) { return std::sqrt(x); }
EmulatedFloat sqrt_of(const EmulatedFloat& x) { return sqrt(x); }

/// One-sided Jacobi on the columns of W (given column by column). Returns
/// the column norms after convergence, descending.
template <class T>
std::vector<T> hestenes(std::vector<std::vector<T>> w, const T& tol, const T& zero, const T& one) {
    const std::size_t k = w.size();
    const std::size_t m = k ? w[0].size() : 0;
    const T two = one + one;
    auto dot = [&](const std::vector<T>& x, const std::vector<T>& y) {
        T acc = zero;
        for (std::size_t i = 0; i < m; ++i) acc += x[i] * y[i];
        return acc;
    };
    bool converged = k < 2;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const T alpha = dot(w[p], w[p]);
                const T beta = dot(w[q], w[q]);
                const T gamma = dot(w[p], w[q]);
                if (is_zero(gamma) || is_zero(alpha) || is_zero(beta)) continue;
                if (abs_of(gamma) <= tol * sqrt_of(alpha * beta)) continue;
                converged = false;
                const T zeta = (beta - alpha) / (two * gamma);
                T t = one / (abs_of(zeta) + sqrt_of(one + zeta * zeta));
                if (zeta < zero) t = -t;
                const T c = one / sqrt_of(one + t * t);
                const T s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const T x = w[p][i];
                    const T y = w[q][i];
                    w[p][i] = c * x - s * y;
                    w[q][i] = s * x + c * y;
                }
            }
        }
    }
    if (!converged) throw NoConvergence(kJacobiMaxSweeps);
    std::vector<T> out;
    out.reserve(k);
    for (const auto& col : w) out.push_back(sqrt_of(dot(col, col)));
    std::sort(out.begin(), out.end(), [](const T& a, const T& b) { return a > b; });
    return out;
}

/// Columns of M when rows >= cols, else columns of M^T.
template <class T>
std::vector<std::vector<T>> tall_columns(const Matrix<T>& m) {
    const bool tall = m.rows() >= m.cols();
    const std::size_t k = tall ? m.cols() : m.rows();
    const std::size_t len = tall ? m.rows() : m.cols();
    std::vector<std::vector<T>> w(k);
    for (std::size_t c = 0; c < k; ++c) {
        w[c].reserve(len);
        for (std::size_t i = 0; i < len; ++i) w[c].push_back(tall ? m(i, c) : m(c, i));
    }
    return w;
}

std::vector<double> to_doubles(const std::vector<EmulatedFloat>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x.to_double());
    return out;
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<Rational> row_of(const Matrix<Rational>& m, std::size_t i) {
    std::vector<Rational> out(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] = m(i, j);
    return out;
}

Rational gram_schmidt_residual_squared(const std::vector<Rational>& v, const Matrix<Rational>& rows) {
    std::vector<std::vector<Rational>> basis;
    std::vector<Rational> norms;
    auto reduce = [&](std::vector<Rational> x) {
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const Rational c = dot(x, basis[b]) / norms[b];
            if (is_zero(c)) continue;
            for (std::size_t j = 0; j < x.size(); ++j) x[j] -= c * basis[b][j];
        }
        return x;
    };
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto u = reduce(row_of(rows, i));
        Rational nn = dot(u, u);
        if (is_zero(nn)) continue;
        basis.push_back(std::move(u));
        norms.push_back(std::move(nn));
    }
    const auto r = reduce(v);
    return dot(r, r);
}

double sqrt_rational(const Rational& x) {
    // Through MPFR so huge or tiny values do not overflow binary64 early.
    EmulatedFloat f = round_to_precision(x, FpConfig{64});
    return sqrt(f).to_double();
}

double min_dist_double(const Matrix<double>& q) {
    double best = INFINITY;
    for (std::size_t i = 0; i < q.rows(); ++i) {
        Matrix<double> others(q.rows() - 1, q.cols());
        std::vector<double> v(q.cols());
        for (std::size_t j = 0; j < q.cols(); ++j) v[j] = q(i, j);
        std::size_t r = 0;
        for (std::size_t s = 0; s < q.rows(); ++s) {
            if (s == i) continue;
            for (std::size_t j = 0; j < q.cols(); ++j) others(r, j) = q(s, j);
            ++r;
        }
        best = std::min(best, dist_to_rowspan(v, others));
    }
    return best;
}

SandwichReport sandwich(double min_dist, double smin, std::size_t m, double slack) {
    SandwichReport rep;
    rep.min_dist = min_dist;
    rep.smin = smin;
    rep.ok = min_dist * (1 + slack) >= smin &&
             smin * (1 + slack) >= min_dist / std::sqrt(static_cast<double>(m));
    return rep;
}

void check_profile_args(std::size_t rows, std::size_t cols, std::size_t npiv, std::size_t r, std::size_t widen) {
    if (r == 0 || r > npiv) throw IndexOutOfBounds("profile step r out of range");
    if (r + widen > cols) throw IndexOutOfBounds("r + widen exceeds the column count");
    (void)rows;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    for (std::size_t ii = k; ii-- > 0;) {
        if (idx[ii] < n - k + ii) {
            ++idx[ii];
            for (std::size_t j = ii + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<double> singular_values(const Matrix<double>& m) {
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * 0x1p-53;
    return hestenes<double>(tall_columns(m), tol, 0.0, 1.0);
}

std::vector<EmulatedFloat> singular_values(const Matrix<Rational>& m, int carrier_bits) {
    ensure_wide_exponent_range();
    const FpConfig cfg{carrier_bits};
    validate(cfg);
    return singular_values(round_matrix(m, cfg));
}

std::vector<EmulatedFloat> singular_values(const Matrix<EmulatedFloat>& m) {
    ensure_wide_exponent_range();
    int p = kRationalCarrierBits;
    for (const auto& x : m.data()) p = std::max(p, x.precision());
    const FpConfig cfg{p};
    // Lifting to a wider precision is exact.
    const Matrix<EmulatedFloat> lifted = m.map([&](const EmulatedFloat& x) {
        EmulatedFloat y(cfg);
        mpfr_set(y.raw(), x.raw(), MPFR_RNDN);
        return y;
    });
    const EmulatedFloat tol = EmulatedFloat::from_double(1e-30, cfg);
    return hestenes<EmulatedFloat>(tall_columns(lifted), tol, EmulatedFloat(cfg), EmulatedFloat::from_int(1, cfg));
}

Rational dist_to_rowspan_squared(const std::vector<Rational>& v, const Matrix<Rational>& rows) {
    if (rows.rows() > 0 && rows.cols() != v.size()) throw DimensionMismatch("vector length differs from row length");
    const std::size_t k = rows.rows();
    if (k == 0) return dot(v, v);
    Matrix<Rational> g(k + 1, k + 1);
    std::vector<std::vector<Rational>> r;
    r.reserve(k + 1);
    for (std::size_t i = 0; i < k; ++i) r.push_back(row_of(rows, i));
    r.push_back(v);
    for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = i; j <= k; ++j) g(i, j) = g(j, i) = dot(r[i], r[j]);
    const Rational small = determinant(submatrix(g, IndexSet::range(0, k), IndexSet::range(0, k)));
    if (is_zero(small)) return gram_schmidt_residual_squared(v, rows);
    return determinant(g) / small;
}

double dist_to_rowspan(const std::vector<Rational>& v, const Matrix<Rational>& rows) {
    return sqrt_rational(dist_to_rowspan_squared(v, rows));
}

double dist_to_rowspan(const std::vector<double>& v, const Matrix<double>& rows) {
    if (rows.rows() > 0 && rows.cols() != v.size()) throw DimensionMismatch("vector length differs from row length");
    const std::size_t len = v.size();
    std::vector<std::vector<double>> basis;
    auto project_out = [&](std::vector<double>& x) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                double c = 0.0;
                for (std::size_t j = 0; j < len; ++j) c += x[j] * b[j];
                for (std::size_t j = 0; j < len; ++j) x[j] -= c * b[j];
            }
        }
    };
    auto norm = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += e * e;
        return std::sqrt(s);
    };
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        std::vector<double> u(len);
        for (std::size_t j = 0; j < len; ++j) u[j] = rows(i, j);
        const double before = norm(u);
        project_out(u);
        const double after = norm(u);
        if (after <= 1e-13 * before || after == 0.0) continue;
        for (double& e : u) e /= after;
        basis.push_back(std::move(u));
    }
    std::vector<double> x = v;
    project_out(x);
    return norm(x);
}

SandwichReport smin_dist_sandwich_check(const Matrix<double>& q, double slack) {
    if (q.rows() > q.cols()) throw DimensionMismatch("sandwich check needs rows <= cols");
    const auto sv = singular_values(q);
    return sandwich(min_dist_double(q), sv.back(), q.rows(), slack);
}

SandwichReport smin_dist_sandwich_check(const Matrix<Rational>& q, double slack) {
    if (q.rows() > q.cols()) throw DimensionMismatch("sandwich check needs rows <= cols");
    double best = INFINITY;
    for (std::size_t i = 0; i < q.rows(); ++i) {
        IndexSet others;
        for (std::size_t s = 0; s < q.rows(); ++s)
            if (s != i) others.push_back(s);
        best = std::min(best, dist_to_rowspan(row_of(q, i), submatrix(q, others, IndexSet::range(0, q.cols()))));
    }
    const auto sv = singular_values(q);
    return sandwich(best, sv.back().to_double(), q.rows(), slack);
}

SpectrumProfile pivot_spectrum_profile(const Matrix<Rational>& a, const std::vector<std::size_t>& pivots,
                                       std::size_t r, std::size_t widen) {
    check_profile_args(a.rows(), a.cols(), pivots.size(), r, widen);
    IndexSet rows;
    for (std::size_t s = 0; s < r; ++s) rows.push_back(pivots[s]);
    SpectrumProfile out;
    out.r = r;
    out.widen = widen;
    out.sigma = to_doubles(singular_values(submatrix(a, rows, IndexSet::range(0, r))));
    if (widen > 0) out.smin_rect = singular_values(submatrix(a, rows, IndexSet::range(0, r + widen))).back().to_double();
    return out;
}

SpectrumProfile pivot_spectrum_profile(const Matrix<double>& a, const std::vector<std::size_t>& pivots,
                                       std::size_t r, std::size_t widen) {
    check_profile_args(a.rows(), a.cols(), pivots.size(), r, widen);
    IndexSet rows;
    for (std::size_t s = 0; s < r; ++s) rows.push_back(pivots[s]);
    SpectrumProfile out;
    out.r = r;
    out.widen = widen;
    out.sigma = singular_values(submatrix(a, rows, IndexSet::range(0, r)));
    if (widen > 0) out.smin_rect = singular_values(submatrix(a, rows, IndexSet::range(0, r + widen))).back();
    return out;
}

double spectral_norm(const Matrix<double>& m) {
    return singular_values(m).front();
}

double promised_witness_size(const Matrix<double>& b, double eps) {
    double hs2 = 0.0;
    for (double x : b.data()) hs2 += x * x;
    const double top = spectral_norm(b);
    return std::floor(eps * eps * hs2 / (top * top));
}

IndexSet invertible_subset_search(const Matrix<double>& b, double eps, std::size_t min_size) {
    const std::size_t u = b.rows();
    const std::size_t t = b.cols();
    if (t > 12) throw std::invalid_argument("exhaustive witness search is capped at 12 columns");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    if (min_size < 1) throw std::invalid_argument("subset size must be at least 1");
    double hs2 = 0.0;
    for (double x : b.data()) hs2 += x * x;
    const double target = (1.0 - eps) * std::sqrt(hs2) / std::sqrt(static_cast<double>(t));
    const IndexSet all_rows = IndexSet::range(0, u);
    for (std::size_t size = min_size; size <= std::min(t, u); ++size) {
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        do {
            IndexSet cols;
            for (auto c : idx) cols.push_back(c);
            const auto sv = singular_values(submatrix(b, all_rows, cols));
            if (sv[size - 1] >= target) return cols;
        } while (next_combination(idx, t));
    }
    throw NoWitness("no column subset satisfies the restricted invertibility bound");
}

IndexSet restricted_invertibility_witness(const Matrix<double>& b, double eps) {
    if (b.cols() > 12) throw std::invalid_argument("exhaustive witness search is capped at 12 columns");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    const double k = promised_witness_size(b, eps);
    if (k < 1) throw std::invalid_argument("eps^2 |B|_HS^2 / |B|^2 < 1: no subset size is promised");
    return invertible_subset_search(b, eps, static_cast<std::size_t>(k));
}

}  // namespace pivotlab
