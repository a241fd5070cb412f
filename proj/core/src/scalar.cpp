#include "pivotlab/scalar.hpp"

#include <cctype>
#include <cmath>
#include <string_view>

namespace pivotlab {

void validate(FpConfig cfg) {
    if (cfg.precision_bits < 2 || cfg.precision_bits > static_cast<long>(MPFR_PREC_MAX)) {
        throw std::invalid_argument("precision_bits must be >= 2, got " +
                                    std::to_string(cfg.precision_bits));
    }
}

void ensure_wide_exponent_range() {
    thread_local bool done = false;
    if (!done) {
        mpfr_set_emin(mpfr_get_emin_min());
        mpfr_set_emax(mpfr_get_emax_max());
        done = true;
    }
}

EmulatedFloat::EmulatedFloat() : EmulatedFloat(FpConfig{53}) {}

EmulatedFloat::EmulatedFloat(FpConfig cfg) {
    validate(cfg);
    ensure_wide_exponent_range();
    mpfr_init2(v_, cfg.precision_bits);
    mpfr_set_zero(v_, 1);
}

EmulatedFloat::EmulatedFloat(const EmulatedFloat& other) {
    ensure_wide_exponent_range();
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
}

EmulatedFloat::EmulatedFloat(EmulatedFloat&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
}

EmulatedFloat& EmulatedFloat::operator=(const EmulatedFloat& other) {
    if (this != &other) {
        mpfr_set_prec(v_, mpfr_get_prec(other.v_));
        mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
}

EmulatedFloat& EmulatedFloat::operator=(EmulatedFloat&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
}

EmulatedFloat::~EmulatedFloat() { mpfr_clear(v_); }

EmulatedFloat EmulatedFloat::from_double(double x, FpConfig cfg) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
    EmulatedFloat r(cfg);
    mpfr_set_d(r.v_, x, MPFR_RNDN);
    return r;
}

EmulatedFloat EmulatedFloat::from_int(long x, FpConfig cfg) {
    EmulatedFloat r(cfg);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
}

Rational EmulatedFloat::to_rational() const {
    if (is_zero()) return Rational(0);
    mpz_class z;
    const mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), v_);
    Rational q(z);
    if (e >= 0) {
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else {
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return q;
}

std::string EmulatedFloat::to_decimal() const {
    if (is_zero()) return "0";
    const auto digits = static_cast<size_t>(std::ceil(precision() * 0.30102999566398120)) + 1;
    mpfr_exp_t exp10 = 0;
    char* s = mpfr_get_str(nullptr, &exp10, 10, digits, v_, MPFR_RNDN);
    std::string_view body(s);
    std::string out;
    if (!body.empty() && body.front() == '-') {
        out.push_back('-');
        body.remove_prefix(1);
    }
    out.push_back(body.front());
    auto rest = std::string(body.substr(1));
    while (!rest.empty() && rest.back() == '0') rest.pop_back();
    if (!rest.empty()) {
        out.push_back('.');
        out += rest;
    }
    const long e = static_cast<long>(exp10) - 1;
    if (e != 0) out += "e" + std::to_string(e);
    mpfr_free_str(s);
    return out;
}

EmulatedFloat& EmulatedFloat::operator+=(const EmulatedFloat& b) {
    mpfr_add(v_, v_, b.v_, MPFR_RNDN);
    return *this;
}

EmulatedFloat& EmulatedFloat::operator-=(const EmulatedFloat& b) {
    mpfr_sub(v_, v_, b.v_, MPFR_RNDN);
    return *this;
}

EmulatedFloat& EmulatedFloat::operator*=(const EmulatedFloat& b) {
    mpfr_mul(v_, v_, b.v_, MPFR_RNDN);
    return *this;
}

EmulatedFloat& EmulatedFloat::operator/=(const EmulatedFloat& b) {
    if (b.is_zero()) throw DivisionByZero();
    mpfr_div(v_, v_, b.v_, MPFR_RNDN);
    return *this;
}

EmulatedFloat EmulatedFloat::operator-() const {
    EmulatedFloat r(*this);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
}

EmulatedFloat abs(const EmulatedFloat& x) {
    EmulatedFloat r(x);
    mpfr_abs(r.raw(), r.raw(), MPFR_RNDN);
    return r;
}

EmulatedFloat sqrt(const EmulatedFloat& x) {
    if (x.sign() < 0) throw std::domain_error("sqrt of negative value");
    EmulatedFloat r(x.config());
    mpfr_sqrt(r.raw(), x.raw(), MPFR_RNDN);
    return r;
}

EmulatedFloat round_to_precision(const Rational& x, FpConfig cfg) {
    EmulatedFloat r(cfg);
    mpfr_set_q(r.raw(), x.get_mpq_t(), MPFR_RNDN);
    return r;
}

EmulatedFloat fp_arith(FpOp op, const EmulatedFloat& a, const EmulatedFloat& b, FpConfig cfg) {
    EmulatedFloat r(cfg);
    switch (op) {
        case FpOp::add: mpfr_add(r.raw(), a.raw(), b.raw(), MPFR_RNDN); break;
        case FpOp::sub: mpfr_sub(r.raw(), a.raw(), b.raw(), MPFR_RNDN); break;
        case FpOp::mul: mpfr_mul(r.raw(), a.raw(), b.raw(), MPFR_RNDN); break;
        case FpOp::div:
            if (b.is_zero()) throw DivisionByZero();
            mpfr_div(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
            break;
    }
    return r;
}

Rational unit_roundoff(FpConfig cfg) {
    validate(cfg);
    Rational u(1);
    mpq_div_2exp(u.get_mpq_t(), u.get_mpq_t(), static_cast<mp_bitcnt_t>(cfg.precision_bits));
    return u;
}

FloatTriple to_triple(const EmulatedFloat& x) {
    FloatTriple t;
    t.precision_bits = x.precision();
    if (x.is_zero()) return t;
    mpz_class z;
    t.exponent = mpfr_get_z_2exp(z.get_mpz_t(), x.raw());
    t.sign = sgn(z);
    t.significand = ::abs(z);
    return t;
}

EmulatedFloat from_triple(const FloatTriple& t) {
    EmulatedFloat r(FpConfig{t.precision_bits});
    if (t.sign == 0) return r;
    if (t.significand <= 0 ||
        mpz_sizeinbase(t.significand.get_mpz_t(), 2) != static_cast<size_t>(t.precision_bits)) {
        throw std::invalid_argument("significand is not normalised for precision " +
                                    std::to_string(t.precision_bits));
    }
    const mpz_class signed_sig = t.sign < 0 ? mpz_class(-t.significand) : t.significand;
    mpfr_set_z_2exp(r.raw(), signed_sig.get_mpz_t(), t.exponent, MPFR_RNDN);
    return r;
}

std::string format_triple(const FloatTriple& t) {
    const std::string prec = "@" + std::to_string(t.precision_bits);
    if (t.sign == 0) return "0" + prec;
    return std::string(t.sign < 0 ? "-" : "+") + ":" + t.significand.get_str(16) + ":" +
           std::to_string(t.exponent) + prec;
}

FloatTriple parse_triple(const std::string& text) {
    const auto at = text.rfind('@');
    if (at == std::string::npos) throw std::invalid_argument("missing precision tag: " + text);
    FloatTriple t;
    t.precision_bits = std::stoi(text.substr(at + 1));
    const std::string body = text.substr(0, at);
    if (body == "0") return t;
    const auto c1 = body.find(':');
    const auto c2 = body.find(':', c1 + 1);
    if (c1 != 1 || c2 == std::string::npos || (body[0] != '+' && body[0] != '-')) {
        throw std::invalid_argument("malformed float triple: " + text);
    }
    t.sign = body[0] == '-' ? -1 : 1;
    t.significand = mpz_class(body.substr(c1 + 1, c2 - c1 - 1), 16);
    t.exponent = std::stoll(body.substr(c2 + 1));
    from_triple(t);  // validates normalisation
    return t;
}

Rational abs(const Rational& x) { return ::abs(x); }

std::string to_string(const Rational& x) { return x.get_str(); }

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) throw std::invalid_argument("empty number");
    if (s.find('/') != std::string::npos) {
        Rational q;
        if (q.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational: " + text);
        if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
        q.canonicalize();
        return q;
    }
    size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::string digits;
    long frac_len = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (; pos < s.size(); ++pos) {
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++frac_len;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed number: " + text);
    long exp10 = 0;
    if (pos < s.size()) {
        if (s[pos] != 'e' && s[pos] != 'E') throw std::invalid_argument("malformed number: " + text);
        const std::string e = s.substr(pos + 1);
        size_t used = 0;
        try {
            exp10 = std::stol(e, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent: " + text);
        }
        if (used != e.size()) throw std::invalid_argument("malformed exponent: " + text);
    }
    mpz_class num(digits, 10);
    if (negative) num = -num;
    const long scale = exp10 - frac_len;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational q = scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
    q.canonicalize();
    return q;
}

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

}  // namespace pivotlab
