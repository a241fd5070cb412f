// Singular values, distances to row spans, and spectral probes of pivot
// submatrices.
//
// Singular values come from one-sided (Hestenes) Jacobi. Rational input is
// lifted to a 106-bit emulated carrier; binary64 input stays in binary64.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "pivotlab/elimination.hpp"
#include "pivotlab/matrix.hpp"

namespace pivotlab {

class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(int sweeps)
        : std::runtime_error("Jacobi SVD did not converge in " + std::to_string(sweeps) + " sweeps"),
          sweeps_(sweeps) {}
    [[nodiscard]] int sweeps() const { return sweeps_; }

private:
    int sweeps_;
};

class NoWitness : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kJacobiMaxSweeps = 30;
inline constexpr int kRationalCarrierBits = 106;

/// Descending singular values, min(rows, cols) of them.
std::vector<double> singular_values(const Matrix<double>& m);
std::vector<EmulatedFloat> singular_values(const Matrix<Rational>& m, int carrier_bits = kRationalCarrierBits);
/// Carrier precision is max(p, 106).
std::vector<EmulatedFloat> singular_values(const Matrix<EmulatedFloat>& m);

/// Squared distance from v to the span of the rows, exactly: the Gram
/// determinant ratio det G(rows, v) / det G(rows), or exact Gram-Schmidt when
/// the rows are dependent.
Rational dist_to_rowspan_squared(const std::vector<Rational>& v, const Matrix<Rational>& rows);
double dist_to_rowspan(const std::vector<Rational>& v, const Matrix<Rational>& rows);
/// Modified Gram-Schmidt with one reorthogonalisation pass.
double dist_to_rowspan(const std::vector<double>& v, const Matrix<double>& rows);

struct SandwichReport {
    double min_dist = 0.0;
    double smin = 0.0;
    bool ok = false;
};

inline constexpr double kSandwichSlack = 1e-9;

/// For Q with m <= k rows: min_i dist(Q_i, span of the other rows) >=
/// s_min(Q^T) >= m^-1/2 min_i dist, each within `slack` relative.
SandwichReport smin_dist_sandwich_check(const Matrix<double>& q, double slack = kSandwichSlack);
SandwichReport smin_dist_sandwich_check(const Matrix<Rational>& q, double slack = kSandwichSlack);

struct SpectrumProfile {
    std::size_t r = 0;
    /// s_1 >= ... >= s_r of A_{I_r,[r]}.
    std::vector<double> sigma;
    /// s_min of (A_{I_r,[r+widen]})^T when widen > 0.
    std::optional<double> smin_rect;
    std::size_t widen = 0;
};

/// Spectra of the original matrix restricted to the first r pivot rows.
/// Needs 1 <= r <= pivots.size() and r + widen <= cols.
SpectrumProfile pivot_spectrum_profile(const Matrix<Rational>& a, const std::vector<std::size_t>& pivots,
                                       std::size_t r, std::size_t widen = 0);
SpectrumProfile pivot_spectrum_profile(const Matrix<double>& a, const std::vector<std::size_t>& pivots,
                                       std::size_t r, std::size_t widen = 0);

template <class T>
SpectrumProfile pivot_spectrum_profile(const Matrix<Rational>& a, const EliminationTrace<T>& trace,
                                       std::size_t r, std::size_t widen = 0) {
    if (trace.variant != Variant::partial_pivoting)
        throw std::invalid_argument("spectrum profile needs a partial-pivoting trace");
    return pivot_spectrum_profile(a, trace.pivot_indices, r, widen);
}

/// Largest singular value, by Jacobi.
double spectral_norm(const Matrix<double>& m);

/// Column subset J of B (u x t, t <= 12) with
///   |J| >= floor(eps^2 |B|_HS^2 / |B|^2) and s_|J|(B_J) >= (1 - eps) |B|_HS / sqrt(t),
/// by exhaustive search in order of increasing size, then lexicographic.
/// Throws NoWitness when none exists and std::invalid_argument when the
/// floor is zero or t > 12.
IndexSet restricted_invertibility_witness(const Matrix<double>& b, double eps);

/// floor(eps^2 |B|_HS^2 / |B|^2), the subset size the witness must reach.
double promised_witness_size(const Matrix<double>& b, double eps);

/// The same exhaustive search with an explicit lower limit on |J| (>= 1),
/// usable when the promised size is zero. Throws NoWitness.
IndexSet invertible_subset_search(const Matrix<double>& b, double eps, std::size_t min_size);

}  // namespace pivotlab
