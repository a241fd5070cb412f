// Certified exact-arithmetic GEPP through ball arithmetic.
//
// Every entry is carried as a midpoint (MPFR, `precision` bits, round to
// nearest) and a radius (MPFR, 32 bits, rounded up) that encloses the exact
// rational value. A pivot choice is accepted only when the chosen candidate's
// lower bound strictly exceeds every other candidate's upper bound, so the
// returned pivot sequence is the exact-arithmetic one. Ambiguous steps retry
// at twice the precision and finally fall back to fraction-free elimination.
#pragma once

#include <optional>
#include <vector>

#include "pivotlab/matrix.hpp"

namespace pivotlab {

struct CertifiedGepp {
    std::vector<std::size_t> pivot_indices;
    /// Rigorous enclosure of the exact growth ratio.
    double growth_lower = 0.0;
    double growth_upper = 0.0;
    double growth_estimate = 0.0;
    /// Midpoint precision that succeeded (53 is the binary64 pass); 0 when
    /// the exact fallback ran.
    int precision_used = 0;
    /// Set when the fraction-free fallback produced the result.
    std::optional<Rational> exact_growth;
};

/// A start precision of 53 or less tries a binary64 ball pass first.
/// Throws ZeroPivot when `a` is singular (detected by the exact fallback).
CertifiedGepp certified_gepp(const Matrix<Rational>& a, int start_precision = 53, int max_precision = 512);

}  // namespace pivotlab
