// Pivot polytopes of GEPP.
//
// With I_s the first s pivot rows (0-based steps), the normal of step s is
//   v_s = (-(A_{I_s,[0,s)})^-1 A_{I_s,s}, 1, 0, ..., 0)
// and its threshold is b_s = |<v_s, A_{i_s}>|. K_r is the intersection of the
// symmetric slabs |<v_s, x>| <= b_s for s < r. Only coordinates 0..r-1 enter,
// so the Gaussian measure of K_r is computed in R^r.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pivotlab/elimination.hpp"
#include "pivotlab/rng.hpp"

namespace pivotlab {

struct PivotPolytope {
    std::size_t r = 0;
    std::size_t ambient_dim = 0;
    /// normals[s] has length ambient_dim, entry s equal to 1, zeros after s.
    std::vector<std::vector<Rational>> normals;
    std::vector<Rational> thresholds;
    /// Original row labels i_0, ..., i_{r-1}.
    std::vector<std::size_t> pivot_rows;
    /// Seed of the sample the polytope came from, when known.
    std::optional<std::uint64_t> seed;
};

/// v_s for the pivot sequence `pivots` (needs s <= pivots.size() and
/// s < cols). Throws SingularBlock when A_{I_s,[0,s)} is singular.
std::vector<Rational> pivot_normal_vector(const Matrix<Rational>& a, std::size_t s,
                                          const std::vector<std::size_t>& pivots);

/// K_r from the first r pivots. Throws SingularBlock.
PivotPolytope build_polytope(const Matrix<Rational>& a, std::size_t r, const std::vector<std::size_t>& pivots);

template <class T>
std::vector<Rational> pivot_normal_vector(const Matrix<Rational>& a, std::size_t s, const EliminationTrace<T>& tr) {
    return pivot_normal_vector(a, s, tr.pivot_indices);
}

template <class T>
PivotPolytope build_polytope(const Matrix<Rational>& a, std::size_t r, const EliminationTrace<T>& tr) {
    return build_polytope(a, r, tr.pivot_indices);
}

/// |<v_s, x>| <= b_s for all s < r. Throws DimensionMismatch.
bool contains(const PivotPolytope& k, const std::vector<Rational>& x);
bool contains(const PivotPolytope& k, const std::vector<double>& x);

/// Distance from row i_{r-1} restricted to [0, r) to the span of the earlier
/// pivot rows restricted the same way: b_{r-1} / |v_{r-1}|.
double pivot_row_distance(const PivotPolytope& k);

struct MeasureEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
};

inline constexpr std::uint64_t kMeasureBlock = 4096;

/// Monte Carlo Gaussian measure of K in R^r. Block b of kMeasureBlock
/// samples draws from stream.substream(b). Hit tests run in binary64 against
/// thresholds rounded up and then widened by one ulp.
MeasureEstimate gaussian_measure_mc(const PivotPolytope& k, std::uint64_t samples, const RngStream& stream);

/// The greedy recursion run directly on B: i_s maximises |<v_s, B_i>| over
/// rows not yet chosen, smallest index on ties.
struct PivotRecursion {
    std::vector<std::size_t> indices;
    std::vector<std::vector<Rational>> normals;
    std::vector<Rational> thresholds;
    /// Steps at which the maximum was attained by more than one row.
    std::vector<std::size_t> ties;
};

PivotRecursion pivot_recursion(const Matrix<Rational>& b, std::size_t r);

struct PivotConsistency {
    /// GEPP's first r pivots equal the recursion's on A.
    bool gepp_matches = false;
    /// Recursion on A_{I_r,[n]} reproduces the same rows and normals.
    bool restricted_matches = false;
    /// Every row outside I_r lies in K_r(A_{I_r,[n]}).
    bool outside_rows_inside = false;
    std::vector<std::size_t> ties;
    [[nodiscard]] bool ok() const { return gepp_matches && restricted_matches && outside_rows_inside; }
};

PivotConsistency pivot_consistency(const Matrix<Rational>& a, std::size_t r);
bool consistency_check_pivots(const Matrix<Rational>& a, std::size_t r);

}  // namespace pivotlab
