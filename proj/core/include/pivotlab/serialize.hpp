// JSON export of traces, polytopes, spectrum profiles and stability reports.
//
// Scalars become objects {"decimal", "lossless", "field"}; the lossless form
// is "n/d" for rationals, a sign:significand:exponent@p triple for emulated
// floats and a hex float for binary64. Plain real-valued statistics are
// decimal strings with 17 significant digits (tag "binary64-17g").
#pragma once

#include <string>

#include "pivotlab/elimination.hpp"
#include "pivotlab/polytope.hpp"
#include "pivotlab/spectral.hpp"
#include "pivotlab/stability.hpp"

namespace pivotlab {

inline constexpr const char* kRealFormatTag = "binary64-17g";

/// Compact one-line JSON. Intermediates are included only when requested and
/// recorded.
std::string trace_to_json(const EliminationTrace<Rational>& tr, bool with_intermediates = false);
std::string trace_to_json(const EliminationTrace<EmulatedFloat>& tr, bool with_intermediates = false);
std::string trace_to_json(const EliminationTrace<double>& tr, bool with_intermediates = false);

std::string polytope_to_json(const PivotPolytope& k);
std::string profile_to_json(const SpectrumProfile& p);
std::string report_to_json(const StabilityReport& r);

/// "%.17g" text of x ("inf", "nan" for non-finite values).
std::string real_string(double x);

}  // namespace pivotlab
