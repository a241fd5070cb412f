// Scalar fields: exact rationals and round-to-nearest emulated floats.
#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pivotlab {

/// Exact rational scalar, always canonical (lowest terms, positive denominator).
using Rational = mpq_class;

class DivisionByZero : public std::domain_error {
public:
    DivisionByZero() : std::domain_error("division by zero") {}
};

/// Floating point format: `precision_bits` significand bits including the
/// leading one. Rounding is always nearest, ties to even.
struct FpConfig {
    int precision_bits = 53;

    constexpr bool operator==(const FpConfig&) const = default;
};

/// Throws std::invalid_argument unless 2 <= p <= MPFR_PREC_MAX.
void validate(FpConfig cfg);

/// Widens the MPFR exponent range of the calling thread to its maximum.
/// Every public entry point that creates EmulatedFloat values calls this,
/// so worker threads do not need to.
void ensure_wide_exponent_range();

/// Software float with a p-bit significand and an effectively unbounded
/// exponent. Value semantics; every arithmetic result is the exact result
/// rounded once to the precision of the left operand.
class EmulatedFloat {
public:
    EmulatedFloat();  // +0 at 53 bits
    explicit EmulatedFloat(FpConfig cfg);  // +0 at cfg precision
    EmulatedFloat(const EmulatedFloat& other);
    EmulatedFloat(EmulatedFloat&& other) noexcept;
    EmulatedFloat& operator=(const EmulatedFloat& other);
    EmulatedFloat& operator=(EmulatedFloat&& other) noexcept;
    ~EmulatedFloat();

    static EmulatedFloat from_double(double x, FpConfig cfg);
    static EmulatedFloat from_int(long x, FpConfig cfg);

    [[nodiscard]] FpConfig config() const { return FpConfig{static_cast<int>(mpfr_get_prec(v_))}; }
    [[nodiscard]] int precision() const { return static_cast<int>(mpfr_get_prec(v_)); }
    [[nodiscard]] bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    [[nodiscard]] int sign() const { return mpfr_sgn(v_); }

    /// Nearest double (ties to even). Only meaningful inside the binary64 range.
    [[nodiscard]] double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    [[nodiscard]] Rational to_rational() const;
    /// Shortest-ish decimal with enough digits to round-trip at this precision.
    [[nodiscard]] std::string to_decimal() const;

    EmulatedFloat& operator+=(const EmulatedFloat& b);
    EmulatedFloat& operator-=(const EmulatedFloat& b);
    EmulatedFloat& operator*=(const EmulatedFloat& b);
    EmulatedFloat& operator/=(const EmulatedFloat& b);

    friend EmulatedFloat operator+(EmulatedFloat a, const EmulatedFloat& b) { return a += b; }
    friend EmulatedFloat operator-(EmulatedFloat a, const EmulatedFloat& b) { return a -= b; }
    friend EmulatedFloat operator*(EmulatedFloat a, const EmulatedFloat& b) { return a *= b; }
    friend EmulatedFloat operator/(EmulatedFloat a, const EmulatedFloat& b) { return a /= b; }
    EmulatedFloat operator-() const;

    friend bool operator==(const EmulatedFloat& a, const EmulatedFloat& b) {
        return mpfr_equal_p(a.v_, b.v_) != 0;
    }
    friend std::partial_ordering operator<=>(const EmulatedFloat& a, const EmulatedFloat& b) {
        const int c = mpfr_cmp(a.v_, b.v_);
        return c < 0 ? std::partial_ordering::less
                     : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
    }

    [[nodiscard]] mpfr_srcptr raw() const { return v_; }
    [[nodiscard]] mpfr_ptr raw() { return v_; }

private:
    mpfr_t v_;
};

EmulatedFloat abs(const EmulatedFloat& x);
EmulatedFloat sqrt(const EmulatedFloat& x);

/// fl(x): nearest p-bit float to the rational x, ties to even significand.
EmulatedFloat round_to_precision(const Rational& x, FpConfig cfg);

enum class FpOp { add, sub, mul, div };

/// round_to_precision(a op b) computed with a single rounding.
/// Throws DivisionByZero for div with b == 0.
EmulatedFloat fp_arith(FpOp op, const EmulatedFloat& a, const EmulatedFloat& b, FpConfig cfg);

/// u = 2^-p.
Rational unit_roundoff(FpConfig cfg);

/// Lossless decomposition value = sign * significand * 2^exponent with the
/// significand in [2^(p-1), 2^p), or sign = 0 for zero.
struct FloatTriple {
    int sign = 0;
    mpz_class significand;
    std::int64_t exponent = 0;
    int precision_bits = 53;

    bool operator==(const FloatTriple&) const = default;
};

FloatTriple to_triple(const EmulatedFloat& x);
/// Inverse of to_triple. Throws std::invalid_argument if the significand is
/// not normalised for the given precision.
EmulatedFloat from_triple(const FloatTriple& t);

/// Text form "+:<hex significand>:<exponent>@<p>" or "0@<p>".
std::string format_triple(const FloatTriple& t);
FloatTriple parse_triple(const std::string& text);

// Rational helpers.
Rational abs(const Rational& x);
std::string to_string(const Rational& x);
/// Parses "a/b", integers, and finite decimals such as "-1.25e-3" exactly.
Rational parse_rational(const std::string& text);
/// The exact value of a finite double.
Rational rational_from_double(double x);

}  // namespace pivotlab
