#include "pivotlab/field.hpp"

#include <cstdio>

namespace pivotlab {

void sub_mul(Rational& a, const Rational& b, const Rational& c) {
    thread_local Rational tmp;
    mpq_mul(tmp.get_mpq_t(), b.get_mpq_t(), c.get_mpq_t());
    mpq_sub(a.get_mpq_t(), a.get_mpq_t(), tmp.get_mpq_t());
}

void sub_mul(EmulatedFloat& a, const EmulatedFloat& b, const EmulatedFloat& c) {
    thread_local EmulatedFloat tmp(FpConfig{53});
    if (tmp.precision() != a.precision()) tmp = EmulatedFloat(a.config());
    mpfr_mul(tmp.raw(), b.raw(), c.raw(), MPFR_RNDN);
    mpfr_sub(a.raw(), a.raw(), tmp.raw(), MPFR_RNDN);
}

std::string lossless_string(const Rational& x) { return x.get_str(); }
std::string lossless_string(const EmulatedFloat& x) { return format_triple(to_triple(x)); }
std::string lossless_string(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

std::string decimal_string(const Rational& x) {
    // 40 significant digits is plenty for display; exact value is lossless_string.
    return round_to_precision(x, FpConfig{136}).to_decimal();
}
std::string decimal_string(const EmulatedFloat& x) { return x.to_decimal(); }
std::string decimal_string(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace pivotlab
