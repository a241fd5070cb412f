#include "pivotlab/polytope.hpp"

#include <cmath>
#include <stdexcept>

#include "pivotlab/exact.hpp"

namespace pivotlab {

namespace {

Rational partial_dot(const std::vector<Rational>& v, const Matrix<Rational>& a, std::size_t row, std::size_t len) {
    Rational acc = 0;
    for (std::size_t j = 0; j < len; ++j)
        if (!is_zero(v[j])) acc += v[j] * a(row, j);
    return acc;
}

/// Normal of step s from the rows in `chosen` (pivot order).
std::vector<Rational> normal_from_rows(const Matrix<Rational>& a, std::size_t s,
                                       const std::vector<std::size_t>& chosen) {
    std::vector<Rational> v(a.cols(), Rational(0));
    v[s] = 1;
    if (s == 0) return v;
    IndexSet rows;
    for (std::size_t q = 0; q < s; ++q) rows.push_back(chosen[q]);
    const auto y = solve_exact(submatrix(a, rows, IndexSet::range(0, s)), submatrix(a, rows, IndexSet({s})));
    for (std::size_t j = 0; j < s; ++j) v[j] = -y(j, 0);
    for (auto i : rows)
        if (!is_zero(partial_dot(v, a, i, s + 1))) throw std::logic_error("pivot normal is not a null vector");
    return v;
}

double round_up_widened(const Rational& x) {
    mpfr_t t;
    mpfr_init2(t, 53);
    mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDU);
    const double d = mpfr_get_d(t, MPFR_RNDU);
    mpfr_clear(t);
    return std::nextafter(d, INFINITY);
}

}  // namespace

std::vector<Rational> pivot_normal_vector(const Matrix<Rational>& a, std::size_t s,
                                          const std::vector<std::size_t>& pivots) {
    if (s >= a.cols()) throw IndexOutOfBounds("normal index exceeds the column count");
    if (s > pivots.size()) throw IndexOutOfBounds("not enough pivots for this normal");
    return normal_from_rows(a, s, pivots);
}

PivotPolytope build_polytope(const Matrix<Rational>& a, std::size_t r, const std::vector<std::size_t>& pivots) {
    if (r > pivots.size() || r > a.cols()) throw IndexOutOfBounds("polytope step r out of range");
    PivotPolytope k;
    k.r = r;
    k.ambient_dim = a.cols();
    for (std::size_t s = 0; s < r; ++s) {
        if (pivots[s] >= a.rows()) throw IndexOutOfBounds("pivot row out of range");
        auto v = normal_from_rows(a, s, pivots);
        k.thresholds.push_back(abs(partial_dot(v, a, pivots[s], s + 1)));
        k.normals.push_back(std::move(v));
        k.pivot_rows.push_back(pivots[s]);
    }
    return k;
}

bool contains(const PivotPolytope& k, const std::vector<Rational>& x) {
    if (x.size() != k.ambient_dim) throw DimensionMismatch("point dimension differs from the polytope's");
    for (std::size_t s = 0; s < k.r; ++s) {
        Rational acc = 0;
        for (std::size_t j = 0; j <= s; ++j) acc += k.normals[s][j] * x[j];
        if (abs(acc) > k.thresholds[s]) return false;
    }
    return true;
}

bool contains(const PivotPolytope& k, const std::vector<double>& x) {
    if (x.size() != k.ambient_dim) throw DimensionMismatch("point dimension differs from the polytope's");
    std::vector<Rational> q;
    q.reserve(x.size());
    for (double e : x) q.push_back(rational_from_double(e));
    return contains(k, q);
}

double pivot_row_distance(const PivotPolytope& k) {
    if (k.r == 0) throw std::invalid_argument("empty polytope has no pivot row");
    const auto& v = k.normals[k.r - 1];
    Rational n2 = 0;
    for (std::size_t j = 0; j < k.r; ++j) n2 += v[j] * v[j];
    const Rational d2 = k.thresholds[k.r - 1] * k.thresholds[k.r - 1] / n2;
    EmulatedFloat f = round_to_precision(d2, FpConfig{64});
    return sqrt(f).to_double();
}

MeasureEstimate gaussian_measure_mc(const PivotPolytope& k, std::uint64_t samples, const RngStream& stream) {
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    MeasureEstimate out;
    out.samples = samples;
    const std::size_t r = k.r;
    for (const auto& b : k.thresholds)
        if (is_zero(b)) return out;  // a zero-width slab has measure zero

    std::vector<std::vector<double>> normals(r);
    std::vector<double> bound(r);
    for (std::size_t s = 0; s < r; ++s) {
        for (std::size_t j = 0; j <= s; ++j) normals[s].push_back(k.normals[s][j].get_d());
        bound[s] = round_up_widened(k.thresholds[s]);
    }
    std::vector<double> x(r);
    const std::uint64_t blocks = (samples + kMeasureBlock - 1) / kMeasureBlock;
    for (std::uint64_t blk = 0; blk < blocks; ++blk) {
        RngStream rs = stream.substream(blk);
        const std::uint64_t count = std::min<std::uint64_t>(kMeasureBlock, samples - blk * kMeasureBlock);
        for (std::uint64_t t = 0; t < count; ++t) {
            for (auto& e : x) e = rs.next_gaussian();
            bool inside = true;
            for (std::size_t s = 0; s < r && inside; ++s) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= s; ++j) acc += normals[s][j] * x[j];
                inside = std::fabs(acc) <= bound[s];
            }
            out.hits += inside ? 1 : 0;
        }
    }
    const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
    out.estimate = p;
    out.std_error = std::sqrt(p * (1 - p) / static_cast<double>(samples));
    return out;
}

PivotRecursion pivot_recursion(const Matrix<Rational>& b, std::size_t r) {
    const std::size_t n = b.rows();
    if (r > n || r > b.cols()) throw IndexOutOfBounds("recursion length out of range");
    PivotRecursion out;
    std::vector<bool> used(n, false);
    for (std::size_t s = 0; s < r; ++s) {
        auto v = normal_from_rows(b, s, out.indices);
        std::optional<std::size_t> best;
        Rational best_val = 0;
        bool tie = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            Rational val = abs(partial_dot(v, b, i, s + 1));
            if (!best || val > best_val) {
                best = i;
                best_val = std::move(val);
                tie = false;
            } else if (val == best_val) {
                tie = true;
            }
        }
        if (tie) out.ties.push_back(s);
        used[*best] = true;
        out.indices.push_back(*best);
        out.normals.push_back(std::move(v));
        out.thresholds.push_back(best_val);
    }
    return out;
}

PivotConsistency pivot_consistency(const Matrix<Rational>& a, std::size_t r) {
    const std::size_t n = a.rows();
    if (!a.is_square()) throw DimensionMismatch("consistency check needs a square matrix");
    if (r == 0 || r >= n) throw IndexOutOfBounds("r must lie in [1, n-1]");
    PivotConsistency out;

    const auto gepp = exact_gepp_summary(a);
    const auto full = pivot_recursion(a, r);
    out.ties = full.ties;
    out.gepp_matches =
        std::equal(full.indices.begin(), full.indices.end(), gepp.pivot_indices.begin(), gepp.pivot_indices.begin() + r);

    // Rows of A_{I_r,[n]} in increasing label order.
    IndexSet chosen;
    for (auto i : full.indices) chosen.push_back(i);
    const IndexSet sorted(chosen.sorted());
    const Matrix<Rational> sub = submatrix(a, sorted, IndexSet::range(0, a.cols()));
    const auto restricted = pivot_recursion(sub, r);
    out.restricted_matches = true;
    for (std::size_t s = 0; s < r; ++s) {
        if (sorted[restricted.indices[s]] != full.indices[s] || restricted.normals[s] != full.normals[s]) {
            out.restricted_matches = false;
            break;
        }
    }

    PivotPolytope k;
    k.r = r;
    k.ambient_dim = a.cols();
    k.normals = restricted.normals;
    k.thresholds = restricted.thresholds;
    for (auto i : restricted.indices) k.pivot_rows.push_back(sorted[i]);
    out.outside_rows_inside = true;
    std::vector<Rational> row(a.cols());
    for (std::size_t i = 0; i < n && out.outside_rows_inside; ++i) {
        if (chosen.contains(i)) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) row[j] = a(i, j);
        out.outside_rows_inside = contains(k, row);
    }
    return out;
}

bool consistency_check_pivots(const Matrix<Rational>& a, std::size_t r) {
    return pivot_consistency(a, r).ok();
}

}  // namespace pivotlab
