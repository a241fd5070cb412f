// Growth factors, backward and forward errors, condition numbers, pivot
// agreement between the emulated and exact fields, and the 2x2 GENP probe.
//
// Floating-point quantities are computed by running the whole elimination in
// emulated arithmetic on fl(A). Residuals and ratios of computed values are
// then formed exactly.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pivotlab/elimination.hpp"
#include "pivotlab/rng.hpp"

namespace pivotlab {

class FpEliminationFailed : public std::runtime_error {
public:
    explicit FpEliminationFailed(std::size_t step)
        : std::runtime_error("floating-point elimination hit a zero pivot column at step " + std::to_string(step)),
          step_(step) {}
    [[nodiscard]] std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

class SingularInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// GEPP trace of fl(A) in p-bit arithmetic. Throws FpEliminationFailed.
EliminationTrace<EmulatedFloat> fp_gepp(const Matrix<Rational>& a, FpConfig cfg);

/// max_k max_ij |computed A^(k)_ij| / max_ij |fl(A)_ij|, k = 0 included, as
/// the exact ratio of the two computed floats. Throws FpEliminationFailed.
Rational growth_factor_fp(const Matrix<Rational>& a, FpConfig cfg);

/// Exact growth ratio. Throws SingularInput.
Rational growth_factor_exact(const Matrix<Rational>& a);

struct BackwardError {
    /// |H|_HS, an upper bound for the spectral norm of H = P fl(A) - L U.
    double h_hs = 0.0;
    /// Power-iteration lower bound for |H|_2.
    double h_spectral_lower = 0.0;
    /// The computed U is nonsingular, so the triangular solves (and their
    /// residual E) are defined.
    bool e_is_applicable = false;
    std::string norm_bracket = "hs_upper";
};

/// H from any trace, with products and differences taken exactly.
BackwardError backward_error_of(const Matrix<Rational>& a, const EliminationTrace<Rational>& tr);
BackwardError backward_error_of(const Matrix<EmulatedFloat>& fla, const EliminationTrace<EmulatedFloat>& tr);

/// Backward error of p-bit GEPP (or GENP) on fl(A). Throws FpEliminationFailed.
BackwardError backward_error(const Matrix<Rational>& a, FpConfig cfg, Variant variant = Variant::partial_pivoting);

/// |x_hat - x|_2 / |x_hat|_2 with x_hat from p-bit GEPP on fl(A), fl(b) and x
/// the exact solution of A x = b. Throws FpEliminationFailed, SingularInput.
double forward_error(const Matrix<Rational>& a, const std::vector<Rational>& b, FpConfig cfg);
/// Same with a known exact solution.
double forward_error_against(const EliminationTrace<EmulatedFloat>& tr, const std::vector<Rational>& b,
                             const std::vector<Rational>& exact, FpConfig cfg);

/// s_max / s_min. Rational input uses the 106-bit carrier. Throws SingularInput.
double condition_number(const Matrix<Rational>& a);
double condition_number(const Matrix<double>& a);

enum class AgreementReason { agree, fp_elimination_failed, exact_singular, pivots_differ };
const char* to_string(AgreementReason r);

struct PivotAgreement {
    bool agree = false;
    AgreementReason reason = AgreementReason::pivots_differ;
    std::optional<std::size_t> first_mismatch;
};

/// p-bit GEPP on fl(A) succeeds (no zero pivot, nonzero last pivot) and picks
/// the same rows as exact GEPP on fl(A).
PivotAgreement pivot_agreement(const Matrix<Rational>& a, FpConfig cfg);

struct Probe2x2Result {
    double eps = 0.0;
    std::uint64_t trials = 0;
    /// Trials with |fl(g11)| <= eps, other entries in [1/2, 2], kappa <= kappa_max.
    std::uint64_t small_pivot = 0;
    /// Among those, trials with |H|_HS > u |M| / (100 eps).
    std::uint64_t large_backward = 0;
    double freq_small_pivot = 0.0;
    /// large_backward / small_pivot (0 when the event never occurred).
    double freq_large_backward_error = 0.0;
};

/// Trial t draws four normals from stream.substream(t), for t in
/// [first_trial, first_trial + trials). Without `cfg` the entries are the
/// exact binary64 draws and GENP runs exactly. All eps values share the same
/// samples, so the events are nested.
std::vector<Probe2x2Result> genp_2x2_instability_probe(const std::vector<double>& eps_values, std::uint64_t trials,
                                                       std::optional<FpConfig> cfg, const RngStream& stream,
                                                       double kappa_max = 100.0, std::uint64_t first_trial = 0);
Probe2x2Result genp_2x2_instability_probe(double eps, std::uint64_t trials, std::optional<FpConfig> cfg,
                                          const RngStream& stream, double kappa_max = 100.0);

/// Singular values of a 2x2 matrix in closed form, larger first.
std::pair<double, double> singular_values_2x2(double a, double b, double c, double d);

struct StabilityReport {
    std::size_t n = 0;
    int precision_bits = 53;
    bool fp_succeeded = false;
    std::optional<std::size_t> fp_failure_step;
    std::optional<double> g_fp;
    double g_exact = 0.0;
    double g_exact_lower = 0.0;
    double g_exact_upper = 0.0;
    /// "bareiss" or "ball<p>" (certified enclosure at p bits).
    std::string g_exact_method;
    std::optional<double> backward_norm;
    std::optional<double> forward_rel;
    std::optional<double> kappa;
    std::string kappa_carrier;
    bool pivot_match = false;
};

struct ReportOptions {
    /// Exact growth by Bareiss up to this n, certified balls above.
    std::size_t bareiss_max_n = 64;
    /// Forward error (needs an exact solve) up to this n.
    std::size_t forward_max_n = 64;
    bool compute_kappa = true;
    /// 106-bit carrier up to this n, binary64 above.
    std::size_t kappa_wide_max_n = 32;
};

/// Report for A (already a matrix of rationals; fl(A) is formed at cfg) with
/// right-hand side b, used for the forward error.
StabilityReport stability_report(const Matrix<Rational>& a, const std::vector<Rational>& b, FpConfig cfg,
                                 const ReportOptions& opts = {});

}  // namespace pivotlab
