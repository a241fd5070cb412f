// Fraction-free (Bareiss) GEPP for rational matrices.
//
// After clearing denominators, every entry of the trailing block after step k
// is an integer minor M_ij, and the true entry of A^(k+1) is M_ij / d_k where
// d_k is the step-k pivot minor. All entries of one step share a denominator,
// so pivot choice and per-step maxima need integer comparisons only.
#pragma once

#include <vector>

#include "pivotlab/elimination.hpp"

namespace pivotlab {

struct ExactGeppSummary {
    std::vector<std::size_t> pivot_indices;
    Rational max_abs_input;
    Rational max_abs_intermediate;
    /// max_abs_intermediate / max_abs_input.
    Rational growth;
    /// U(n-1, n-1) == 0.
    bool last_pivot_zero = false;
};

/// Pivot sequence and exact growth ratio of GEPP on `a` (same tie rule as
/// gepp_factor). Throws ZeroPivot on a zero pivot column.
ExactGeppSummary exact_gepp_summary(const Matrix<Rational>& a);

/// Exact determinant by fraction-free elimination.
Rational determinant(const Matrix<Rational>& a);

/// Exact solution of A x = b. Throws SingularBlock when A is singular.
std::vector<Rational> exact_solve(const Matrix<Rational>& a, const std::vector<Rational>& b);

}  // namespace pivotlab
