#include "pivotlab/stability.hpp"

#include <algorithm>
#include <cmath>

#include "pivotlab/certified.hpp"
#include "pivotlab/exact.hpp"
#include "pivotlab/spectral.hpp"

namespace pivotlab {

namespace {

constexpr int kResidualPrec = 128;

/// Norm summaries of a residual given entrywise at kResidualPrec bits.
BackwardError summarize(const std::vector<EmulatedFloat>& h, std::size_t n) {
    BackwardError out;
    const FpConfig wide{kResidualPrec};
    EmulatedFloat sum(wide);
    long top = 0;
    bool any = false;
    for (const auto& x : h) {
        if (x.is_zero()) continue;
        sum += x * x;
        const long e = mpfr_get_exp(x.raw());
        if (!any || e > top) top = e;
        any = true;
    }
    if (!any) return out;
    out.h_hs = sqrt(sum).to_double();

    // Power iteration on H^T H, scaled by 2^-top so binary64 neither
    // overflows nor underflows.
    std::vector<double> hs(n * n);
    for (std::size_t k = 0; k < n * n; ++k) {
        EmulatedFloat t = h[k];
        mpfr_mul_2si(t.raw(), t.raw(), -top, MPFR_RNDN);
        hs[k] = t.to_double();
    }
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n), z(n);
    double best = 0.0;
    for (int it = 0; it < 50; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += hs[i * n + j] * x[j];
            y[i] = acc;
        }
        double ny = 0.0;
        for (double e : y) ny += e * e;
        ny = std::sqrt(ny);
        best = std::max(best, ny);
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += hs[i * n + j] * y[i];
            z[j] = acc;
        }
        double nz = 0.0;
        for (double e : z) nz += e * e;
        nz = std::sqrt(nz);
        if (nz == 0.0) break;
        for (std::size_t j = 0; j < n; ++j) x[j] = z[j] / nz;
    }
    // The last iterate's |Hx| can only undershoot |H|_2, by rounding aside.
    out.h_spectral_lower = std::ldexp(best, static_cast<int>(top));
    return out;
}

Rational exact_residual_entry(const Matrix<EmulatedFloat>& fla, const EliminationTrace<EmulatedFloat>& tr,
                              std::size_t i, std::size_t j) {
    Rational acc = fla(tr.row_order[i], j).to_rational();
    const std::size_t kmax = std::min(i, j);
    for (std::size_t k = 0; k <= kmax; ++k) {
        const Rational u = tr.U(k, j).to_rational();
        if (k == i)
            acc -= u;
        else
            acc -= tr.L(i, k).to_rational() * u;
    }
    return acc;
}

std::vector<std::size_t> fp_pivots_or_throw(const EliminationTrace<EmulatedFloat>& tr) {
    if (tr.last_pivot_zero) throw FpEliminationFailed(tr.n - 1);
    return tr.pivot_indices;
}

Rational sum_squares(const std::vector<Rational>& v) {
    Rational s = 0;
    for (const auto& x : v) s += x * x;
    return s;
}

double sqrt_ratio(const Rational& num, const Rational& den) {
    EmulatedFloat f = round_to_precision(num / den, FpConfig{64});
    return sqrt(f).to_double();
}

}  // namespace

EliminationTrace<EmulatedFloat> fp_gepp(const Matrix<Rational>& a, FpConfig cfg) {
    ensure_wide_exponent_range();
    validate(cfg);
    try {
        return gepp_factor(round_matrix(a, cfg));
    } catch (const ZeroPivot& e) {
        throw FpEliminationFailed(e.step());
    }
}

Rational growth_factor_fp(const Matrix<Rational>& a, FpConfig cfg) {
    const auto tr = fp_gepp(a, cfg);
    if (tr.max_abs_input.is_zero()) throw FpEliminationFailed(0);
    return tr.max_abs_intermediate.to_rational() / tr.max_abs_input.to_rational();
}

Rational growth_factor_exact(const Matrix<Rational>& a) {
    try {
        const auto s = exact_gepp_summary(a);
        if (s.last_pivot_zero) throw SingularInput("matrix is singular");
        return s.growth;
    } catch (const ZeroPivot&) {
        throw SingularInput("matrix is singular");
    }
}

BackwardError backward_error_of(const Matrix<Rational>& a, const EliminationTrace<Rational>& tr) {
    const std::size_t n = tr.n;
    std::vector<EmulatedFloat> h;
    h.reserve(n * n);
    const FpConfig wide{kResidualPrec};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Rational acc = a(tr.row_order[i], j);
            for (std::size_t k = 0; k <= std::min(i, j); ++k) acc -= (k == i ? Rational(1) : tr.L(i, k)) * tr.U(k, j);
            h.push_back(round_to_precision(acc, wide));
        }
    }
    auto out = summarize(h, n);
    out.e_is_applicable = !tr.last_pivot_zero;
    return out;
}

BackwardError backward_error_of(const Matrix<EmulatedFloat>& fla, const EliminationTrace<EmulatedFloat>& tr) {
    ensure_wide_exponent_range();
    const std::size_t n = tr.n;
    const int p = fla(0, 0).precision();
    // Wide enough for most sums of p-bit products to be exact; the ternary
    // flags tell when they were not, and those entries are redone exactly.
    const FpConfig acc_cfg{4 * p + 128};
    const FpConfig wide{kResidualPrec};
    EmulatedFloat acc(acc_cfg);
    std::vector<EmulatedFloat> h;
    h.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // acc = L U - P A, accumulated with fused operations.
            int inexact = mpfr_neg(acc.raw(), fla(tr.row_order[i], j).raw(), MPFR_RNDN);
            const std::size_t kmax = std::min(i, j);
            for (std::size_t k = 0; k <= kmax && !inexact; ++k) {
                if (k == i)
                    inexact |= mpfr_add(acc.raw(), acc.raw(), tr.U(k, j).raw(), MPFR_RNDN);
                else
                    inexact |= mpfr_fma(acc.raw(), tr.L(i, k).raw(), tr.U(k, j).raw(), acc.raw(), MPFR_RNDN);
            }
            EmulatedFloat entry(wide);
            if (inexact)
                entry = round_to_precision(exact_residual_entry(fla, tr, i, j), wide);
            else
                mpfr_neg(entry.raw(), acc.raw(), MPFR_RNDN);
            h.push_back(std::move(entry));
        }
    }
    auto out = summarize(h, n);
    out.e_is_applicable = !tr.last_pivot_zero;
    return out;
}

BackwardError backward_error(const Matrix<Rational>& a, FpConfig cfg, Variant variant) {
    ensure_wide_exponent_range();
    validate(cfg);
    const auto fla = round_matrix(a, cfg);
    try {
        const auto tr = factor(fla, variant);
        return backward_error_of(fla, tr);
    } catch (const ZeroPivot& e) {
        throw FpEliminationFailed(e.step());
    }
}

double forward_error_against(const EliminationTrace<EmulatedFloat>& tr, const std::vector<Rational>& b,
                             const std::vector<Rational>& exact, FpConfig cfg) {
    if (b.size() != tr.n || exact.size() != tr.n) throw DimensionMismatch("vector length differs from n");
    std::vector<EmulatedFloat> flb;
    flb.reserve(b.size());
    for (const auto& x : b) flb.push_back(round_to_precision(x, cfg));
    std::vector<EmulatedFloat> xhat;
    try {
        xhat = solve_with_trace(tr, flb);
    } catch (const SingularU& e) {
        throw FpEliminationFailed(tr.n - 1);
    }
    std::vector<Rational> xr, diff;
    for (std::size_t i = 0; i < tr.n; ++i) {
        xr.push_back(xhat[i].to_rational());
        diff.push_back(xr.back() - exact[i]);
    }
    const Rational den = sum_squares(xr);
    const Rational num = sum_squares(diff);
    if (is_zero(num)) return 0.0;
    if (is_zero(den)) return INFINITY;
    return sqrt_ratio(num, den);
}

double forward_error(const Matrix<Rational>& a, const std::vector<Rational>& b, FpConfig cfg) {
    std::vector<Rational> x;
    try {
        x = exact_solve(a, b);
    } catch (const SingularBlock&) {
        throw SingularInput("matrix is singular");
    }
    return forward_error_against(fp_gepp(a, cfg), b, x, cfg);
}

double condition_number(const Matrix<Rational>& a) {
    if (!a.is_square()) throw DimensionMismatch("condition number needs a square matrix");
    if (a.rows() <= 64 && is_zero(determinant(a))) throw SingularInput("matrix is singular");
    const auto sv = singular_values(a);
    if (sv.back().is_zero()) throw SingularInput("matrix is singular");
    EmulatedFloat k = sv.front();
    k /= sv.back();
    return k.to_double();
}

double condition_number(const Matrix<double>& a) {
    if (!a.is_square()) throw DimensionMismatch("condition number needs a square matrix");
    const auto sv = singular_values(a);
    if (sv.back() == 0.0) throw SingularInput("matrix is singular");
    return sv.front() / sv.back();
}

const char* to_string(AgreementReason r) {
    switch (r) {
        case AgreementReason::agree: return "agree";
        case AgreementReason::fp_elimination_failed: return "fp_elimination_failed";
        case AgreementReason::exact_singular: return "exact_singular";
        case AgreementReason::pivots_differ: return "pivots_differ";
    }
    return "unknown";
}

PivotAgreement pivot_agreement(const Matrix<Rational>& a, FpConfig cfg) {
    PivotAgreement out;
    std::vector<std::size_t> fp;
    try {
        fp = fp_pivots_or_throw(fp_gepp(a, cfg));
    } catch (const FpEliminationFailed& e) {
        out.reason = AgreementReason::fp_elimination_failed;
        out.first_mismatch = e.step();
        return out;
    }
    const Matrix<Rational> shadow = to_rational(round_matrix(a, cfg));
    CertifiedGepp ex;
    try {
        ex = certified_gepp(shadow);
    } catch (const ZeroPivot&) {
        out.reason = AgreementReason::exact_singular;
        return out;
    }
    for (std::size_t k = 0; k < fp.size(); ++k) {
        if (fp[k] != ex.pivot_indices[k]) {
            out.reason = AgreementReason::pivots_differ;
            out.first_mismatch = k;
            return out;
        }
    }
    out.agree = true;
    out.reason = AgreementReason::agree;
    return out;
}

std::pair<double, double> singular_values_2x2(double a, double b, double c, double d) {
    const double s = a * a + b * b + c * c + d * d;
    const double det = std::fabs(a * d - b * c);
    const double disc = std::sqrt(std::max(0.0, s * s - 4 * det * det));
    const double smax = std::sqrt((s + disc) / 2);
    const double smin = smax > 0 ? det / smax : 0.0;
    return {smax, smin};
}

std::vector<Probe2x2Result> genp_2x2_instability_probe(const std::vector<double>& eps_values, std::uint64_t trials,
                                                       std::optional<FpConfig> cfg, const RngStream& stream,
                                                       double kappa_max, std::uint64_t first_trial) {
    ensure_wide_exponent_range();
    const Rational u = cfg ? unit_roundoff(*cfg) : Rational(0);
    const double u_d = u.get_d();
    for (double eps : eps_values)
        if (!(eps > u_d && eps < 1.0)) throw std::invalid_argument("eps must lie in (u, 1)");
    std::vector<Probe2x2Result> out(eps_values.size());
    for (std::size_t e = 0; e < eps_values.size(); ++e) {
        out[e].eps = eps_values[e];
        out[e].trials = trials;
    }
    const double eps_max = eps_values.empty() ? 0.0 : *std::max_element(eps_values.begin(), eps_values.end());
    for (std::uint64_t t = first_trial; t < first_trial + trials; ++t) {
        RngStream rs = stream.substream(t);
        double g[4];
        for (double& x : g) x = rs.next_gaussian();
        std::vector<EmulatedFloat> fl;
        if (cfg) {
            for (double& x : g) {
                fl.push_back(round_to_precision(rational_from_double(x), *cfg));
                x = fl.back().to_double();  // exact: fl(g) of a binary64 g fits binary64 for any p
            }
        }
        if (std::fabs(g[0]) > eps_max) continue;
        bool others = true;
        for (int q = 1; q < 4; ++q) others = others && std::fabs(g[q]) >= 0.5 && std::fabs(g[q]) <= 2.0;
        if (!others) continue;
        const auto [smax, smin] = singular_values_2x2(g[0], g[1], g[2], g[3]);
        if (!(smin > 0.0) || smax / smin > kappa_max) continue;

        double h = 0.0;
        bool failed = false;
        if (cfg) {
            const Matrix<EmulatedFloat> m(2, 2, fl);
            try {
                const auto tr = genp_factor(m);
                h = backward_error_of(m, tr).h_hs;
            } catch (const ZeroPivot&) {
                failed = true;
            }
        } else {
            Matrix<Rational> m(2, 2);
            for (int q = 0; q < 4; ++q) m(q / 2, q % 2) = rational_from_double(g[q]);
            try {
                const auto tr = genp_factor(m);
                h = backward_error_of(m, tr).h_hs;
            } catch (const ZeroPivot&) {
                failed = true;
            }
        }
        for (auto& r : out) {
            if (std::fabs(g[0]) > r.eps) continue;
            ++r.small_pivot;
            if (failed || h > u_d * smax / (100.0 * r.eps)) ++r.large_backward;
        }
    }
    for (auto& r : out) {
        r.freq_small_pivot = trials ? static_cast<double>(r.small_pivot) / static_cast<double>(trials) : 0.0;
        r.freq_large_backward_error =
            r.small_pivot ? static_cast<double>(r.large_backward) / static_cast<double>(r.small_pivot) : 0.0;
    }
    return out;
}

Probe2x2Result genp_2x2_instability_probe(double eps, std::uint64_t trials, std::optional<FpConfig> cfg,
                                          const RngStream& stream, double kappa_max) {
    return genp_2x2_instability_probe(std::vector<double>{eps}, trials, cfg, stream, kappa_max).front();
}

StabilityReport stability_report(const Matrix<Rational>& a, const std::vector<Rational>& b, FpConfig cfg,
                                 const ReportOptions& opts) {
    ensure_wide_exponent_range();
    validate(cfg);
    if (!a.is_square()) throw DimensionMismatch("report needs a square matrix");
    StabilityReport rep;
    rep.n = a.rows();
    rep.precision_bits = cfg.precision_bits;

    std::vector<std::size_t> exact_pivots;
    if (rep.n <= opts.bareiss_max_n) {
        ExactGeppSummary summary;
        try {
            summary = exact_gepp_summary(a);
        } catch (const ZeroPivot&) {
            throw SingularInput("matrix is singular");
        }
        if (summary.last_pivot_zero) throw SingularInput("matrix is singular");
        const Rational& g = summary.growth;
        exact_pivots = summary.pivot_indices;
        rep.g_exact = g.get_d();
        mpfr_t t;
        mpfr_init2(t, 53);
        mpfr_set_q(t, g.get_mpq_t(), MPFR_RNDD);
        rep.g_exact_lower = mpfr_get_d(t, MPFR_RNDD);
        mpfr_set_q(t, g.get_mpq_t(), MPFR_RNDU);
        rep.g_exact_upper = mpfr_get_d(t, MPFR_RNDU);
        mpfr_clear(t);
        rep.g_exact_method = "bareiss";
    } else {
        CertifiedGepp c;
        try {
            c = certified_gepp(a);
        } catch (const ZeroPivot&) {
            throw SingularInput("matrix is singular");
        }
        exact_pivots = c.pivot_indices;
        rep.g_exact = c.exact_growth ? c.exact_growth->get_d() : c.growth_estimate;
        rep.g_exact_lower = c.growth_lower;
        rep.g_exact_upper = c.growth_upper;
        rep.g_exact_method = c.exact_growth ? "bareiss" : "ball" + std::to_string(c.precision_used);
    }

    const auto fla = round_matrix(a, cfg);
    std::optional<EliminationTrace<EmulatedFloat>> tr;
    try {
        tr = gepp_factor(fla);
    } catch (const ZeroPivot& e) {
        rep.fp_failure_step = e.step();
    }
    if (tr && tr->last_pivot_zero) rep.fp_failure_step = rep.n - 1;
    rep.fp_succeeded = tr.has_value() && !tr->last_pivot_zero;
    if (tr) {
        rep.g_fp = Rational(tr->max_abs_intermediate.to_rational() / tr->max_abs_input.to_rational()).get_d();
        rep.backward_norm = backward_error_of(fla, *tr).h_hs;
        rep.pivot_match = rep.fp_succeeded && tr->pivot_indices == exact_pivots;
    }
    if (rep.fp_succeeded && rep.n <= opts.forward_max_n && !b.empty()) {
        const auto x = exact_solve(a, b);
        rep.forward_rel = forward_error_against(*tr, b, x, cfg);
    }
    if (opts.compute_kappa) {
        if (rep.n <= opts.kappa_wide_max_n) {
            rep.kappa = condition_number(a);
            rep.kappa_carrier = "emulated(106)";
        } else {
            rep.kappa = condition_number(to_double(a));
            rep.kappa_carrier = "binary64";
        }
    }
    return rep;
}

}  // namespace pivotlab
