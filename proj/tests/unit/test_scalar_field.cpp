#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "pivotlab/field.hpp"
#include "pivotlab/scalar.hpp"

using namespace pivotlab;

namespace {
EmulatedFloat fl(const Rational& x, int p) { return round_to_precision(x, FpConfig{p}); }
}  // namespace

TEST_CASE("round to nearest picks the closer neighbour") {
    // 1/3 lies between 1/4 and 3/8 at two bits and is closer to 3/8.
    CHECK(fl(Rational(1, 3), 2).to_rational() == Rational(3, 8));
    CHECK(fl(Rational(1, 3), 53).to_rational() == rational_from_double(1.0 / 3.0));
    CHECK(fl(Rational(-7, 5), 24).to_rational() == rational_from_double(static_cast<double>(-7.0f / 5.0f)));
}

TEST_CASE("ties go to the even significand") {
    CHECK(fl(Rational(5, 8), 2).to_rational() == Rational(1, 2));
    CHECK(fl(Rational(7, 8), 2).to_rational() == Rational(1));
    Rational one_plus_half_ulp = Rational(1) + Rational(1) / Rational(mpz_class(1) << 53);
    CHECK(fl(one_plus_half_ulp, 53).to_rational() == Rational(1));
}

TEST_CASE("fp_arith rounds once") {
    const FpConfig c{3};
    const auto a = fl(Rational(7, 4), 3);  // 1.11b
    const auto b = fl(Rational(1, 8), 3);
    // 7/4 + 1/8 = 15/8 = 1.111b, a tie between 7/4 and 2: even is 2.
    CHECK(fp_arith(FpOp::add, a, b, c).to_rational() == Rational(2));
    CHECK(fp_arith(FpOp::mul, a, a, c).to_rational() == Rational(3));  // 49/16 -> 3
    CHECK_THROWS_AS(fp_arith(FpOp::div, a, EmulatedFloat(c), c), DivisionByZero);
}

TEST_CASE("unit roundoff is 2^-p") {
    CHECK(unit_roundoff(FpConfig{53}) == Rational(1) / Rational(mpz_class(1) << 53));
    CHECK(unit_roundoff(FpConfig{2}) == Rational(1, 4));
    CHECK_THROWS_AS(validate(FpConfig{1}), std::invalid_argument);
}

TEST_CASE("rounding error is within u|x| on random rationals") {
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<long> num(-1000000, 1000000), den(1, 999999);
    for (int p : {2, 8, 24, 53}) {
        for (int i = 0; i < 2000; ++i) {
            const Rational x(num(gen), den(gen));
            const Rational err = abs(x - fl(x, p).to_rational());
            CHECK(err <= abs(x) * unit_roundoff(FpConfig{p}));
        }
    }
}

TEST_CASE("float triples round-trip") {
    for (int p : {2, 24, 53, 113}) {
        const auto x = fl(Rational(-22, 7), p);
        const auto t = to_triple(x);
        CHECK(t.precision_bits == p);
        CHECK(t.sign == -1);
        CHECK(from_triple(t) == x);
        CHECK(parse_triple(format_triple(t)) == t);
    }
    const auto z = EmulatedFloat(FpConfig{8});
    CHECK(to_triple(z).sign == 0);
    CHECK(from_triple(parse_triple(format_triple(to_triple(z)))).is_zero());
}

TEST_CASE("rational parsing is exact") {
    CHECK(parse_rational("-1.25e-3") == Rational(-1, 800));
    CHECK(parse_rational("6/4") == Rational(3, 2));
    CHECK(parse_rational("17") == Rational(17));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("lossless strings identify the value") {
    CHECK(lossless_string(parse_rational("-3/9")) == "-1/3");
    CHECK(lossless_string(0.5) == std::string("0x1p-1"));
    CHECK(field_tag(fl(Rational(1), 24)) == "emulated(24)");
    CHECK(field_tag(Rational(1)) == "exact");
}

TEST_CASE("the exponent range is effectively unbounded") {
    ensure_wide_exponent_range();
    auto x = EmulatedFloat::from_double(0x1p-1000, FpConfig{53});
    for (int i = 0; i < 3; ++i) x = x * x;  // 2^-8000 does not underflow
    CHECK_FALSE(x.is_zero());
    CHECK(x.to_rational() == Rational(1) / Rational(mpz_class(1) << 8000));
}

TEST_CASE("sub_mul rounds the product and then the difference") {
    const FpConfig c{4};
    auto a = fl(Rational(1), 4);
    const auto b = fl(Rational(15, 8), 4);
    const auto t = fl(Rational(15, 16), 4);
    // b*t = 225/128 rounds to 7/4 at 4 bits; 1 - 7/4 = -3/4.
    sub_mul(a, b, t);
    CHECK(a.to_rational() == Rational(-3, 4));
    CHECK(a.config() == c);
}
