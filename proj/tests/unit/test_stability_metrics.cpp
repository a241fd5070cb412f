#include <cmath>

#include "audit.hpp"
#include "catch_amalgamated.hpp"
#include "pivotlab/rng.hpp"
#include "pivotlab/stability.hpp"

using namespace pivotlab;
using pivotlab::testing::audited;

namespace {

Matrix<Rational> gaussian(std::size_t n, std::uint64_t t, int p = 53) {
    RngStream s = RngStream(31, t).substream(n);
    return exact_shadow(sample_gaussian_matrix(n, n, s, FpConfig{p}));
}

Matrix<Rational> wilkinson(std::size_t n) {
    Matrix<Rational> a(n, n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = 1;
        a(i, n - 1) = 1;
        for (std::size_t j = 0; j < i; ++j) a(i, j) = -1;
    }
    return a;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("fp growth tracks exact growth at high precision") {
    for (std::size_t n : {5, 12, 20}) {
        const auto a = gaussian(n, n);
        const Rational gx = growth_factor_exact(a);
        const Rational gf = growth_factor_fp(a, FpConfig{106});
        CHECK(std::fabs(Rational((gf - gx) / gx).get_d()) < 1e-20);
        audited(fp_gepp(a, FpConfig{106}));
    }
}

TEST_CASE("fp growth includes the input, so it is at least one") {
    const Matrix<Rational> id{{1, 0}, {0, 1}};
    CHECK(growth_factor_fp(id, FpConfig{8}) == 1);
    CHECK(growth_factor_exact(id) == 1);
    CHECK_THROWS_AS(growth_factor_exact(Matrix<Rational>{{1, 1}, {1, 1}}), SingularInput);
}

TEST_CASE("backward error vanishes when every intermediate is representable") {
    // Wilkinson intermediates are small integers.
    const auto a = wilkinson(8);
    const auto be = backward_error(a, FpConfig{24});
    CHECK(be.h_hs == 0.0);
    CHECK(be.e_is_applicable);
    const auto tr = audited(gepp_factor(a));
    CHECK(backward_error_of(a, tr).h_hs == 0.0);
}

TEST_CASE("backward error is of order u |L||U|") {
    const auto a = gaussian(20, 1);
    const auto be = backward_error(a, FpConfig{24});
    CHECK(be.h_hs > 0.0);
    CHECK(be.h_spectral_lower <= be.h_hs * (1 + 1e-12));
    CHECK(be.h_spectral_lower > 0.0);
    // Loose envelope: n * u * |L|_HS |U|_HS with |L|_HS <= n.
    const auto tr = fp_gepp(a, FpConfig{24});
    const double bound = 20.0 * std::ldexp(1.0, -24) * 20.0 * to_double(hs_norm(tr.U));
    CHECK(be.h_hs < bound);
    CHECK(be.norm_bracket == "hs_upper");
}

TEST_CASE("GENP backward error from the same helper") {
    const Matrix<Rational> a{{Rational(1, 1024), 1}, {1, 1}};
    const auto genp = backward_error(a, FpConfig{8}, Variant::no_pivoting);
    const auto gepp = backward_error(a, FpConfig{8});
    CHECK(genp.h_hs > gepp.h_hs);
    CHECK_THROWS_AS(backward_error(Matrix<Rational>{{0, 1}, {1, 1}}, FpConfig{8}, Variant::no_pivoting),
                    FpEliminationFailed);
}

TEST_CASE("forward error against the exact solution") {
    const auto a = gaussian(10, 2);
    const std::vector<Rational> b(10, Rational(1));
    const double f53 = forward_error(a, b, FpConfig{53});
    const double f24 = forward_error(a, b, FpConfig{24});
    CHECK(f53 < 1e-10);
    CHECK(f24 > f53);
    CHECK_THROWS_AS(forward_error(Matrix<Rational>{{1, 2}, {2, 4}}, {1, 1}, FpConfig{53}), std::exception);
}

TEST_CASE("condition numbers") {
    CHECK(condition_number(Matrix<Rational>{{2, 0}, {0, 1}}) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(condition_number(Matrix<double>{{4, 0}, {0, 1}}) == Catch::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(condition_number(Matrix<Rational>{{1, 1}, {1, 1}}), SingularInput);
}

TEST_CASE("pivot agreement") {
    const Matrix<Rational> id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(pivot_agreement(id, FpConfig{53}).agree);
    const auto sing = pivot_agreement(Matrix<Rational>{{1, 1}, {1, 1}}, FpConfig{53});
    CHECK_FALSE(sing.agree);
    // Monotone in p in aggregate: low precision disagrees at least as often.
    int lo = 0, hi = 0;
    for (std::uint64_t t = 0; t < 40; ++t) {
        const auto a = gaussian(20, t);
        lo += pivot_agreement(a, FpConfig{3}).agree ? 0 : 1;
        hi += pivot_agreement(a, FpConfig{53}).agree ? 0 : 1;
    }
    CHECK(hi == 0);
    CHECK(lo > hi);
}

TEST_CASE("2x2 probe: exact field has no backward error") {
    const auto r = genp_2x2_instability_probe(0.1, 20000, std::nullopt, RngStream(4, 0));
    CHECK(r.small_pivot > 0);
    CHECK(r.freq_large_backward_error == 0.0);
}

TEST_CASE("2x2 probe: near eps = 1 the frequency matches the Gaussian product") {
    const double eps = 0.999;
    const std::uint64_t trials = 200000;
    const auto r = genp_2x2_instability_probe(eps, trials, FpConfig{53}, RngStream(4, 1), 1e300);
    const double slab = 2 * normal_cdf(eps) - 1;
    const double band = 2 * (normal_cdf(2.0) - normal_cdf(0.5));
    const double p = slab * band * band * band;
    const double se = std::sqrt(p * (1 - p) / double(trials));
    CHECK(std::fabs(r.freq_small_pivot - p) < 4 * se);
}

TEST_CASE("2x2 probe: events are nested across eps") {
    const auto rs = genp_2x2_instability_probe({0.2, 0.1, 0.05}, 50000, FpConfig{24}, RngStream(4, 2));
    CHECK(rs[0].small_pivot >= rs[1].small_pivot);
    CHECK(rs[1].small_pivot >= rs[2].small_pivot);
    // Chunking by first_trial reproduces the single run.
    const auto a = genp_2x2_instability_probe({0.1}, 20000, FpConfig{24}, RngStream(4, 2), 100.0, 0);
    const auto b = genp_2x2_instability_probe({0.1}, 30000, FpConfig{24}, RngStream(4, 2), 100.0, 20000);
    CHECK(a[0].small_pivot + b[0].small_pivot == rs[1].small_pivot);
    CHECK_THROWS_AS(genp_2x2_instability_probe(1.5, 10, FpConfig{24}, RngStream(1, 1)), std::invalid_argument);
}

TEST_CASE("stability report fields") {
    const auto a = gaussian(12, 5);
    const std::vector<Rational> b(12, Rational(1));
    const auto rep = stability_report(a, b, FpConfig{53});
    CHECK(rep.fp_succeeded);
    CHECK(rep.pivot_match);
    CHECK(rep.g_exact >= 1.0);
    CHECK(rep.g_exact_lower <= rep.g_exact);
    CHECK(rep.g_exact <= rep.g_exact_upper);
    CHECK(rep.g_exact <= std::ldexp(1.0, 11));
    REQUIRE(rep.g_fp);
    CHECK(std::fabs(*rep.g_fp - rep.g_exact) / rep.g_exact < 1e-10);
    CHECK(rep.g_exact_method == "bareiss");
    REQUIRE(rep.forward_rel);
    REQUIRE(rep.kappa);
    CHECK(rep.kappa_carrier == "emulated(106)");
    ReportOptions o;
    o.bareiss_max_n = 4;
    const auto r2 = stability_report(a, b, FpConfig{53}, o);
    CHECK(r2.g_exact_method.rfind("ball", 0) == 0);
    CHECK(r2.g_exact_lower <= rep.g_exact);
    CHECK(rep.g_exact <= r2.g_exact_upper);
}

TEST_CASE("audit saw no violations") {
    auto& log = pivotlab::testing::audit_log();
    CHECK(log.traces > 0);
    CHECK(log.multiplier_violations == 0);
    CHECK(log.doubling_violations == 0);
}
