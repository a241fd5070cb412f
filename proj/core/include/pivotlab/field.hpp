// Uniform per-field primitives used by the generic elimination and
// spectral kernels. Overloads exist for Rational, EmulatedFloat and double.
#pragma once

#include <cmath>
#include <string>

#include "pivotlab/scalar.hpp"

namespace pivotlab {

inline bool is_zero(const Rational& x) { return sgn(x) == 0; }
inline bool is_zero(const EmulatedFloat& x) { return x.is_zero(); }
inline bool is_zero(double x) { return x == 0.0; }

/// Sign of |a| - |b|.
inline int cmp_abs(const Rational& a, const Rational& b) {
    return mpq_cmp(abs(a).get_mpq_t(), abs(b).get_mpq_t());
}
inline int cmp_abs(const EmulatedFloat& a, const EmulatedFloat& b) {
    return mpfr_cmpabs(a.raw(), b.raw());
}
inline int cmp_abs(double a, double b) {
    const double x = std::fabs(a);
    const double y = std::fabs(b);
    return (x > y) - (x < y);
}

inline Rational zero_like(const Rational&) { return Rational(0); }
inline EmulatedFloat zero_like(const EmulatedFloat& x) { return EmulatedFloat(x.config()); }
inline double zero_like(double) { return 0.0; }

inline Rational one_like(const Rational&) { return Rational(1); }
inline EmulatedFloat one_like(const EmulatedFloat& x) { return EmulatedFloat::from_int(1, x.config()); }
inline double one_like(double) { return 1.0; }

inline Rational abs_value(const Rational& x) { return abs(x); }
inline EmulatedFloat abs_value(const EmulatedFloat& x) { return abs(x); }
inline double abs_value(double x) { return std::fabs(x); }

/// a <- a - b*c with the field's rounding: exact for rationals, two
/// roundings (product, then difference) for floats.
void sub_mul(Rational& a, const Rational& b, const Rational& c);
void sub_mul(EmulatedFloat& a, const EmulatedFloat& b, const EmulatedFloat& c);
inline void sub_mul(double& a, double b, double c) {
    const double p = b * c;
    a -= p;
}

inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(const EmulatedFloat& x) { return x.to_double(); }
inline double to_double(double x) { return x; }

inline Rational to_rational(const Rational& x) { return x; }
inline Rational to_rational(const EmulatedFloat& x) { return x.to_rational(); }
inline Rational to_rational(double x) { return rational_from_double(x); }

/// "exact", "emulated(p)" or "binary64".
inline std::string field_tag(const Rational&) { return "exact"; }
inline std::string field_tag(const EmulatedFloat& x) {
    return "emulated(" + std::to_string(x.precision()) + ")";
}
inline std::string field_tag(double) { return "binary64"; }

/// Lossless text for one scalar: "n/d", a float triple, or a hex float.
std::string lossless_string(const Rational& x);
std::string lossless_string(const EmulatedFloat& x);
std::string lossless_string(double x);

/// Human-readable decimal.
std::string decimal_string(const Rational& x);
std::string decimal_string(const EmulatedFloat& x);
std::string decimal_string(double x);

}  // namespace pivotlab
