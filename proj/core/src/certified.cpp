#include "pivotlab/certified.hpp"

#include <cmath>
#include <numeric>

#include "pivotlab/exact.hpp"

namespace pivotlab {

namespace {

constexpr mpfr_prec_t kRadiusPrec = 32;

/// Owning array of mpfr_t with a fixed precision.
class MpfrArray {
public:
    MpfrArray(std::size_t count, mpfr_prec_t prec) : v_(count) {
        for (auto& x : v_) {
            mpfr_init2(&x, prec);
            mpfr_set_zero(&x, 1);
        }
    }
    MpfrArray(const MpfrArray&) = delete;
    MpfrArray& operator=(const MpfrArray&) = delete;
    ~MpfrArray() {
        for (auto& x : v_) mpfr_clear(&x);
    }
    mpfr_ptr operator[](std::size_t i) { return &v_[i]; }

private:
    std::vector<__mpfr_struct> v_;
};

struct Scratch {
    mpfr_t lo, hi, t, u, best_lo, best_hi, amax_lo, amax_hi;
    explicit Scratch(mpfr_prec_t mid_prec) {
        for (mpfr_ptr p : {lo, hi, best_lo, best_hi, amax_lo, amax_hi}) mpfr_init2(p, mid_prec + 8);
        for (mpfr_ptr p : {t, u}) mpfr_init2(p, kRadiusPrec);
    }
    ~Scratch() {
        for (mpfr_ptr p : {lo, hi, t, u, best_lo, best_hi, amax_lo, amax_hi}) mpfr_clear(p);
    }
};

/// rad += 2^-prec * |mid|, rounded up.
void add_rounding_error(mpfr_ptr rad, mpfr_srcptr mid, mpfr_prec_t prec, mpfr_ptr tmp) {
    if (mpfr_zero_p(mid)) return;
    mpfr_abs(tmp, mid, MPFR_RNDU);
    mpfr_div_2ui(tmp, tmp, static_cast<unsigned long>(prec), MPFR_RNDU);
    mpfr_add(rad, rad, tmp, MPFR_RNDU);
}

/// lo = |mid| - rad (down, may be negative), hi = |mid| + rad (up).
void bounds(mpfr_ptr lo, mpfr_ptr hi, mpfr_srcptr mid, mpfr_srcptr rad) {
    mpfr_abs(hi, mid, MPFR_RNDN);
    mpfr_sub(lo, hi, rad, MPFR_RNDD);
    mpfr_add(hi, hi, rad, MPFR_RNDU);
}

std::optional<CertifiedGepp> attempt(const Matrix<Rational>& a, mpfr_prec_t prec) {
    const std::size_t n = a.rows();
    MpfrArray mid(n * n, prec);
    MpfrArray rad(n * n, kRadiusPrec);
    Scratch s(prec);
    for (std::size_t k = 0; k < n * n; ++k) {
        const int inexact = mpfr_set_q(mid[k], a.data()[k].get_mpq_t(), MPFR_RNDN);
        if (inexact) add_rounding_error(rad[k], mid[k], prec, s.t);
    }
    auto at = [n](std::size_t i, std::size_t j) { return i * n + j; };

    // Enclosure of max |A_ij| and the running max over all intermediates.
    mpfr_set_zero(s.amax_lo, 1);
    mpfr_set_zero(s.amax_hi, 1);
    for (std::size_t k = 0; k < n * n; ++k) {
        bounds(s.lo, s.hi, mid[k], rad[k]);
        if (mpfr_cmp(s.lo, s.amax_lo) > 0) mpfr_set(s.amax_lo, s.lo, MPFR_RNDD);
        if (mpfr_cmp(s.hi, s.amax_hi) > 0) mpfr_set(s.amax_hi, s.hi, MPFR_RNDU);
    }
    if (mpfr_sgn(s.amax_lo) <= 0) return std::nullopt;
    mpfr_set(s.best_lo, s.amax_lo, MPFR_RNDD);
    mpfr_set(s.best_hi, s.amax_hi, MPFR_RNDU);

    CertifiedGepp out;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    MpfrArray tau(1, prec);
    MpfrArray abs_row(n, kRadiusPrec);  // |mid| of the pivot row, rounded up
    MpfrArray r_tau(1, kRadiusPrec), abs_tau(1, kRadiusPrec), denom(1, kRadiusPrec);
    mpfr_t clo, chi;
    mpfr_init2(clo, prec + 8);
    mpfr_init2(chi, prec + 8);
    struct Guard {
        mpfr_ptr a, b;
        ~Guard() {
            mpfr_clear(a);
            mpfr_clear(b);
        }
    } guard{clo, chi};

    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t y = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (mpfr_cmpabs(mid[at(i, k)], mid[at(y, k)]) > 0) y = i;
        bounds(clo, chi, mid[at(y, k)], rad[at(y, k)]);
        if (mpfr_sgn(clo) <= 0) return std::nullopt;
        for (std::size_t i = k; i < n; ++i) {
            if (i == y) continue;
            bounds(s.lo, s.hi, mid[at(i, k)], rad[at(i, k)]);
            if (mpfr_cmp(s.hi, clo) >= 0) return std::nullopt;
        }
        out.pivot_indices.push_back(order[y]);
        if (y != k) {
            for (std::size_t j = 0; j < n; ++j) {
                mpfr_swap(mid[at(k, j)], mid[at(y, j)]);
                mpfr_swap(rad[at(k, j)], rad[at(y, j)]);
            }
            std::swap(order[k], order[y]);
        }
        mpfr_srcptr p = mid[at(k, k)];
        mpfr_srcptr rp = rad[at(k, k)];
        // |p| - r_p > 0 was certified above.
        mpfr_abs(denom[0], p, MPFR_RNDD);
        mpfr_sub(denom[0], denom[0], rp, MPFR_RNDD);
        for (std::size_t j = k + 1; j < n; ++j) mpfr_abs(abs_row[j], mid[at(k, j)], MPFR_RNDU);

        for (std::size_t i = k + 1; i < n; ++i) {
            // tau = a_ik / p with |a/p - tau_mid| <= (r_a + |a_mid/p_mid| r_p) / (|p| - r_p) + rounding.
            mpfr_div(tau[0], mid[at(i, k)], p, MPFR_RNDN);
            mpfr_abs(abs_tau[0], tau[0], MPFR_RNDU);
            mpfr_mul_2si(s.t, abs_tau[0], 1 - static_cast<long>(prec), MPFR_RNDU);
            mpfr_add(abs_tau[0], abs_tau[0], s.t, MPFR_RNDU);  // >= |a_mid / p_mid|
            mpfr_mul(r_tau[0], abs_tau[0], rp, MPFR_RNDU);
            mpfr_add(r_tau[0], r_tau[0], rad[at(i, k)], MPFR_RNDU);
            mpfr_div(r_tau[0], r_tau[0], denom[0], MPFR_RNDU);
            add_rounding_error(r_tau[0], tau[0], prec, s.t);
            mpfr_abs(abs_tau[0], tau[0], MPFR_RNDU);

            for (std::size_t j = k + 1; j < n; ++j) {
                mpfr_ptr c = mid[at(i, j)];
                mpfr_ptr rc = rad[at(i, j)];
                mpfr_srcptr rb = rad[at(k, j)];
                // c - b * tau, one rounding.
                mpfr_fms(c, mid[at(k, j)], tau[0], c, MPFR_RNDN);
                mpfr_neg(c, c, MPFR_RNDN);
                // rc += |b| r_tau + |tau| r_b + r_b r_tau + 2^-prec |c|
                mpfr_mul(s.t, abs_row[j], r_tau[0], MPFR_RNDU);
                mpfr_add(rc, rc, s.t, MPFR_RNDU);
                if (!mpfr_zero_p(rb)) {
                    mpfr_mul(s.t, abs_tau[0], rb, MPFR_RNDU);
                    mpfr_add(rc, rc, s.t, MPFR_RNDU);
                    mpfr_mul(s.t, rb, r_tau[0], MPFR_RNDU);
                    mpfr_add(rc, rc, s.t, MPFR_RNDU);
                }
                add_rounding_error(rc, c, prec, s.t);

                bounds(s.lo, s.hi, c, rc);
                if (mpfr_cmp(s.lo, s.best_lo) > 0) mpfr_set(s.best_lo, s.lo, MPFR_RNDD);
                if (mpfr_cmp(s.hi, s.best_hi) > 0) mpfr_set(s.best_hi, s.hi, MPFR_RNDU);
            }
            mpfr_set_zero(mid[at(i, k)], 1);
            mpfr_set_zero(rad[at(i, k)], 1);
        }
    }
    // A nonsingular matrix needs a certified nonzero last pivot too.
    bounds(clo, chi, mid[at(n - 1, n - 1)], rad[at(n - 1, n - 1)]);
    if (mpfr_sgn(clo) <= 0) return std::nullopt;
    if (!std::isfinite(mpfr_get_d(s.best_hi, MPFR_RNDU))) return std::nullopt;

    mpfr_div(s.lo, s.best_lo, s.amax_hi, MPFR_RNDD);
    mpfr_div(s.hi, s.best_hi, s.amax_lo, MPFR_RNDU);
    out.growth_lower = mpfr_get_d(s.lo, MPFR_RNDD);
    out.growth_upper = mpfr_get_d(s.hi, MPFR_RNDU);
    out.growth_estimate = 0.5 * (out.growth_lower + out.growth_upper);
    out.precision_used = static_cast<int>(prec);
    return out;
}

/// Same scheme with binary64 midpoints and radii. Every radius expression is
/// a sum of at most five nonnegative rounded terms, so inflating it by
/// (1 + 2^-49) and a tiny absolute floor keeps it an upper bound.
std::optional<CertifiedGepp> attempt_binary64(const Matrix<Rational>& a) {
    constexpr double kU = 0x1p-52;
    constexpr double kInflate = 1.0 + 0x1p-49;
    constexpr double kFloor = 0x1p-1000;
    const std::size_t n = a.rows();
    std::vector<double> mid(n * n), rad(n * n, 0.0);
    for (std::size_t k = 0; k < n * n; ++k) {
        const Rational& x = a.data()[k];
        const double d = x.get_d();
        if (!std::isfinite(d) || std::fabs(d) > 0x1p500 || (d != 0.0 && std::fabs(d) < 0x1p-500)) return std::nullopt;
        mid[k] = d;
        if (Rational(d) != x) rad[k] = 2 * kU * std::fabs(d) + kFloor;
    }
    auto at = [n](std::size_t i, std::size_t j) { return i * n + j; };
    double amax_lo = 0.0, amax_hi = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        amax_lo = std::max(amax_lo, (std::fabs(mid[k]) - rad[k]) * (1 - 4 * kU));
        amax_hi = std::max(amax_hi, (std::fabs(mid[k]) + rad[k]) * kInflate);
    }
    if (amax_lo <= 0.0) return std::nullopt;
    double best_lo = amax_lo, best_hi = amax_hi;

    CertifiedGepp out;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t y = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(mid[at(i, k)]) > std::fabs(mid[at(y, k)])) y = i;
        const double chosen_lo = (std::fabs(mid[at(y, k)]) - rad[at(y, k)]) * (1 - 4 * kU);
        if (!(chosen_lo > 0.0)) return std::nullopt;
        for (std::size_t i = k; i < n; ++i) {
            if (i == y) continue;
            if ((std::fabs(mid[at(i, k)]) + rad[at(i, k)]) * kInflate >= chosen_lo) return std::nullopt;
        }
        out.pivot_indices.push_back(order[y]);
        if (y != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(mid[at(k, j)], mid[at(y, j)]);
                std::swap(rad[at(k, j)], rad[at(y, j)]);
            }
            std::swap(order[k], order[y]);
        }
        const double p = mid[at(k, k)];
        const double rp = rad[at(k, k)];
        const double denom = (std::fabs(p) - rp) * (1 - 4 * kU);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double tau = mid[at(i, k)] / p;
            const double at_ = std::fabs(tau);
            const double r_tau =
                ((rad[at(i, k)] + at_ * (1 + 2 * kU) * rp) / denom + kU * at_) * kInflate + kFloor;
            double* ci = &mid[at(i, 0)];
            double* ri = &rad[at(i, 0)];
            const double* bk = &mid[at(k, 0)];
            const double* rk = &rad[at(k, 0)];
            for (std::size_t j = k + 1; j < n; ++j) {
                const double c = ci[j] - bk[j] * tau;
                // Two roundings in the midpoint: |b tau| and the difference.
                const double rounding = kU * (std::fabs(bk[j] * tau) + std::fabs(c));
                const double rc =
                    (ri[j] + std::fabs(bk[j]) * r_tau + at_ * rk[j] + rk[j] * r_tau + rounding) * kInflate + kFloor;
                ci[j] = c;
                ri[j] = rc;
                const double ac = std::fabs(c);
                best_lo = std::max(best_lo, (ac - rc) * (1 - 4 * kU));
                best_hi = std::max(best_hi, (ac + rc) * kInflate);
            }
            mid[at(i, k)] = 0.0;
            rad[at(i, k)] = 0.0;
        }
    }
    if (!((std::fabs(mid[at(n - 1, n - 1)]) - rad[at(n - 1, n - 1)]) * (1 - 4 * kU) > 0.0)) return std::nullopt;
    if (!std::isfinite(best_hi)) return std::nullopt;
    out.growth_lower = best_lo / amax_hi * (1 - 4 * kU);
    out.growth_upper = best_hi / amax_lo * kInflate;
    out.growth_estimate = 0.5 * (out.growth_lower + out.growth_upper);
    out.precision_used = 53;
    return out;
}

}  // namespace

CertifiedGepp certified_gepp(const Matrix<Rational>& a, int start_precision, int max_precision) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("certified GEPP needs a square matrix");
    ensure_wide_exponent_range();
    if (start_precision <= 53) {
        if (auto r = attempt_binary64(a)) return *r;
        start_precision = 128;
    }
    for (int prec = std::max(start_precision, 16); prec <= max_precision; prec *= 2) {
        if (auto r = attempt(a, prec)) return *r;
    }
    const auto exact = exact_gepp_summary(a);
    if (exact.last_pivot_zero) throw ZeroPivot(a.rows() - 1);
    CertifiedGepp out;
    out.pivot_indices = exact.pivot_indices;
    EmulatedFloat g = round_to_precision(exact.growth, FpConfig{64});
    mpfr_t lo;
    mpfr_init2(lo, 53);
    mpfr_set_q(lo, exact.growth.get_mpq_t(), MPFR_RNDD);
    out.growth_lower = mpfr_get_d(lo, MPFR_RNDD);
    mpfr_set_q(lo, exact.growth.get_mpq_t(), MPFR_RNDU);
    out.growth_upper = mpfr_get_d(lo, MPFR_RNDU);
    mpfr_clear(lo);
    out.growth_estimate = g.to_double();
    out.exact_growth = exact.growth;
    return out;
}

}  // namespace pivotlab
