#include <cmath>

#include "catch_amalgamated.hpp"
#include "pivotlab/elimination.hpp"
#include "pivotlab/rng.hpp"
#include "pivotlab/spectral.hpp"
#include "pivotlab/stability.hpp"

using namespace pivotlab;
using Catch::Matchers::WithinRel;

TEST_CASE("singular values of simple matrices") {
    const Matrix<double> d{{0, 2, 0}, {0, 0, -1}, {3, 0, 0}};
    const auto s = singular_values(d);
    REQUIRE(s.size() == 3);
    CHECK_THAT(s[0], WithinRel(3.0, 1e-15));
    CHECK_THAT(s[1], WithinRel(2.0, 1e-15));
    CHECK_THAT(s[2], WithinRel(1.0, 1e-15));

    // [[1,1],[0,1]] has singular values phi and 1/phi.
    const double phi = (1 + std::sqrt(5.0)) / 2;
    const auto q = singular_values(Matrix<Rational>{{1, 1}, {0, 1}});
    CHECK_THAT(q[0].to_double(), WithinRel(phi, 1e-15));
    CHECK_THAT(q[1].to_double(), WithinRel(1 / phi, 1e-15));
    // The 106-bit carrier resolves phi - 1/phi = 1 far below binary64 ulp.
    const auto diff = q[0] - q[1] - EmulatedFloat::from_int(1, q[0].config());
    CHECK(std::fabs(diff.to_double()) < 1e-28);
}

TEST_CASE("rectangular inputs give min(rows, cols) values") {
    RngStream s(3, 1);
    const auto m = sample_gaussian_doubles(4, 7, s);
    const auto a = singular_values(m);
    const auto b = singular_values(m.transpose());
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(a[i], WithinRel(b[i], 1e-12));
    // Sum of squares equals the squared HS norm.
    double ss = 0;
    for (double x : a) ss += x * x;
    CHECK_THAT(ss, WithinRel(hs_norm(m) * hs_norm(m), 1e-12));
}

TEST_CASE("Jacobi agrees with the 2x2 closed form") {
    RngStream s(8, 2);
    for (int k = 0; k < 50; ++k) {
        const auto m = sample_gaussian_doubles(2, 2, s);
        const auto [big, small] = singular_values_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
        const auto sv = singular_values(m);
        CHECK_THAT(sv[0], WithinRel(big, 1e-12));
        CHECK_THAT(sv[1], WithinRel(small, 1e-9));
    }
}

TEST_CASE("distance to a row span") {
    const Matrix<Rational> rows{{1, 0, 0}, {1, 1, 0}};
    CHECK(dist_to_rowspan_squared({3, 4, 5}, rows) == 25);
    CHECK(dist_to_rowspan(std::vector<Rational>{3, 4, 5}, rows) == 5.0);
    // Dependent rows still give the right answer.
    const Matrix<Rational> dep{{1, 1, 0}, {2, 2, 0}};
    CHECK(dist_to_rowspan_squared({1, 0, 0}, dep) == Rational(1, 2));
    CHECK(dist_to_rowspan(std::vector<double>{1, 0, 0}, to_double(dep)) == Catch::Approx(std::sqrt(0.5)));
    CHECK(dist_to_rowspan_squared({1, 2}, Matrix<Rational>(0, 2)) == 5);
}

TEST_CASE("s_min is sandwiched by row distances") {
    RngStream s(12, 0);
    for (int k = 0; k < 50; ++k) {
        const auto q = sample_gaussian_doubles(8, 12, s);
        const auto rep = smin_dist_sandwich_check(q);
        CHECK(rep.ok);
        CHECK(rep.min_dist >= rep.smin * (1 - 1e-9));
    }
    const auto rq = smin_dist_sandwich_check(Matrix<Rational>{{1, 0, 0}, {1, 1, 0}});
    CHECK(rq.ok);
}

TEST_CASE("pivot spectrum profile") {
    RngStream s(4, 4);
    const auto a = exact_shadow(sample_gaussian_matrix(6, 6, s, FpConfig{53}));
    const auto tr = gepp_factor(a);
    const auto p = pivot_spectrum_profile(a, tr, 3, 2);
    CHECK(p.sigma.size() == 3);
    CHECK(p.sigma[0] >= p.sigma[2]);
    REQUIRE(p.smin_rect);
    // Adding columns cannot decrease the smallest singular value of the rows.
    CHECK(*p.smin_rect >= p.sigma[2] * (1 - 1e-12));
    CHECK_THROWS_AS(pivot_spectrum_profile(a, tr.pivot_indices, 0), IndexOutOfBounds);
    CHECK_THROWS_AS(pivot_spectrum_profile(a, tr.pivot_indices, 5, 2), IndexOutOfBounds);
    const auto g = genp_factor(a);
    CHECK_THROWS_AS(pivot_spectrum_profile(a, g, 2), std::invalid_argument);
}

TEST_CASE("restricted invertibility witness") {
    // Orthogonal columns: every subset is perfectly conditioned.
    const Matrix<double> id{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    const auto j = restricted_invertibility_witness(id, 0.9);
    CHECK(j.size() >= 3);
    RngStream s(6, 0);
    int strict = 0;
    for (int k = 0; k < 20; ++k) {
        const auto b = sample_gaussian_doubles(4, 6, s);
        const double promised = promised_witness_size(b, 0.6);
        IndexSet w;
        if (promised >= 1) {
            w = restricted_invertibility_witness(b, 0.6);
            CHECK(double(w.size()) >= promised);
            ++strict;
        } else {
            CHECK_THROWS_AS(restricted_invertibility_witness(b, 0.6), std::invalid_argument);
            w = invertible_subset_search(b, 0.6, 1);
        }
        const auto sub = submatrix(b, IndexSet::range(0, 4), w);
        const auto sv = singular_values(sub);
        CHECK(sv.back() >= (1 - 0.6) * hs_norm(b) / std::sqrt(6.0) * (1 - 1e-12));
    }
    // Stable rank 5/4: one column is promised at eps = 0.95, and the first one works.
    const Matrix<double> big{{2, 0}, {0, 1}};
    CHECK(promised_witness_size(big, 0.95) == 1);
    CHECK(restricted_invertibility_witness(big, 0.95) == IndexSet{0});
    CHECK_THROWS_AS(restricted_invertibility_witness(Matrix<double>(2, 13, 1.0), 0.5), std::invalid_argument);
}

TEST_CASE("spectral norm") {
    CHECK_THAT(spectral_norm(Matrix<double>{{3, 0}, {4, 0}}), WithinRel(5.0, 1e-15));
}
