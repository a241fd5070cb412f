#include <cmath>

#include "audit.hpp"
#include "catch_amalgamated.hpp"
#include "pivotlab/elimination.hpp"
#include "pivotlab/polytope.hpp"
#include "pivotlab/rng.hpp"
#include "pivotlab/spectral.hpp"

using namespace pivotlab;
using pivotlab::testing::audited;

namespace {

Matrix<Rational> gaussian(std::size_t n, std::uint64_t seed, std::uint64_t t) {
    RngStream s = RngStream(seed, t).substream(n);
    return exact_shadow(sample_gaussian_matrix(n, n, s, FpConfig{53}));
}

std::vector<Rational> row(const Matrix<Rational>& a, std::size_t i) { return {a.row(i).begin(), a.row(i).end()}; }

}  // namespace

TEST_CASE("normals annihilate the earlier pivot rows") {
    const auto a = gaussian(7, 1, 0);
    const auto tr = audited(gepp_factor(a));
    for (std::size_t s = 0; s < 6; ++s) {
        const auto v = pivot_normal_vector(a, s, tr);
        CHECK(v[s] == 1);
        for (std::size_t j = s + 1; j < 7; ++j) CHECK(v[j] == 0);
        for (std::size_t q = 0; q < s; ++q) {
            Rational acc = 0;
            for (std::size_t j = 0; j <= s; ++j) acc += v[j] * a(tr.pivot_indices[q], j);
            CHECK(acc == 0);
        }
    }
    CHECK_THROWS_AS(pivot_normal_vector(a, 7, tr), IndexOutOfBounds);
}

TEST_CASE("thresholds are the pivot magnitudes") {
    const auto a = gaussian(6, 2, 0);
    const auto tr = audited(gepp_factor(a));
    const auto k = build_polytope(a, 5, tr);
    // b_s = |U(s, s)|: the pivot of step s.
    for (std::size_t s = 0; s < 5; ++s) CHECK(k.thresholds[s] == abs(tr.U(s, s)));
    CHECK(k.pivot_rows == std::vector<std::size_t>(tr.pivot_indices.begin(), tr.pivot_indices.begin() + 5));
}

TEST_CASE("every row of A lies in K_r") {
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto a = gaussian(8, 3, t);
        const auto tr = audited(gepp_factor(a));
        for (std::size_t r = 1; r < 8; ++r) {
            const auto k = build_polytope(a, r, tr);
            for (std::size_t i = 0; i < 8; ++i) CHECK(contains(k, row(a, i)));
        }
    }
}

TEST_CASE("containment rejects far points and bad dimensions") {
    const auto a = gaussian(5, 4, 0);
    const auto k = build_polytope(a, 3, audited(gepp_factor(a)));
    CHECK_FALSE(contains(k, std::vector<double>{100, 0, 0, 0, 0}));
    CHECK(contains(k, std::vector<double>{0, 0, 0, 0, 0}));
    CHECK_THROWS_AS(contains(k, std::vector<double>{0, 0}), DimensionMismatch);
}

TEST_CASE("r = 1 slab measure matches 2 Phi(b) - 1") {
    const auto a = gaussian(6, 5, 0);
    const auto k = build_polytope(a, 1, audited(gepp_factor(a)));
    const double b = k.thresholds[0].get_d();
    const double exact = std::erf(b / std::sqrt(2.0));
    const auto m = gaussian_measure_mc(k, 50000, RngStream(5, 77));
    CHECK(m.samples == 50000);
    CHECK(std::fabs(m.estimate - exact) <= 4 * std::max(m.std_error, 1e-4));
    // Same stream, same answer.
    CHECK(gaussian_measure_mc(k, 50000, RngStream(5, 77)).hits == m.hits);
}

TEST_CASE("a zero threshold gives measure zero") {
    PivotPolytope k;
    k.r = 1;
    k.ambient_dim = 2;
    k.normals = {{1, 0}};
    k.thresholds = {0};
    CHECK(gaussian_measure_mc(k, 100, RngStream(1, 1)).estimate == 0.0);
}

TEST_CASE("distance equals the Gram-determinant distance") {
    for (std::uint64_t t = 0; t < 5; ++t) {
        const auto a = gaussian(7, 6, t);
        const auto tr = audited(gepp_factor(a));
        for (std::size_t r = 1; r < 7; ++r) {
            const auto k = build_polytope(a, r, tr);
            std::vector<Rational> v;
            Matrix<Rational> prev(r - 1, r);
            for (std::size_t j = 0; j < r; ++j) v.push_back(a(tr.pivot_indices[r - 1], j));
            for (std::size_t s = 0; s + 1 < r; ++s)
                for (std::size_t j = 0; j < r; ++j) prev(s, j) = a(tr.pivot_indices[s], j);
            CHECK(pivot_row_distance(k) == Catch::Approx(dist_to_rowspan(v, prev)).epsilon(1e-15));
        }
    }
}

TEST_CASE("pivot recursion reproduces GEPP and the restriction property") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto a = gaussian(10, 7, t);
        const std::size_t r = 1 + t % 9;
        const auto c = pivot_consistency(a, r);
        CHECK(c.gepp_matches);
        CHECK(c.restricted_matches);
        CHECK(c.outside_rows_inside);
        CHECK(consistency_check_pivots(a, r));
    }
    CHECK_THROWS_AS(pivot_consistency(gaussian(4, 1, 1), 4), IndexOutOfBounds);
}

TEST_CASE("ties in the recursion are logged and broken by smallest index") {
    const Matrix<Rational> b{{2, 1}, {-2, 3}, {1, 0}};
    const auto rec = pivot_recursion(b, 2);
    CHECK(rec.indices.front() == 0);
    CHECK(rec.ties == std::vector<std::size_t>{0});
}
