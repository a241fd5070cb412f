#include "pivotlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace pivotlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t slot = words_ & 1u;
    if (slot == 0) {
        const std::uint64_t block = words_ >> 1;
        const PhiloxCounter ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = philox4x32_10(ctr, key);
        buffer_[0] = out[0] | (static_cast<std::uint64_t>(out[1]) << 32);
        buffer_[1] = out[2] | (static_cast<std::uint64_t>(out[3]) << 32);
    }
    ++words_;
    return buffer_[slot];
}

double RngStream::next_uniform() { return std::ldexp(static_cast<double>(next_u64() >> 11), -53); }

double RngStream::next_gaussian() {
    if (spare_gaussian_) {
        const double z = *spare_gaussian_;
        spare_gaussian_.reset();
        return z;
    }
    const double u1 = 1.0 - next_uniform();  // (0, 1]
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = r * std::sin(theta);
    return r * std::cos(theta);
}

RngStream RngStream::substream(std::uint64_t child) const {
    return RngStream(seed_, mix64(stream_ ^ mix64(child + 1)));
}

Matrix<EmulatedFloat> sample_gaussian_matrix(std::size_t n, std::size_t m, RngStream& stream,
                                             FpConfig cfg, Matrix<Rational>* pre_rounding) {
    if (n == 0 || m == 0) throw std::invalid_argument("matrix dimensions must be >= 1");
    validate(cfg);
    std::vector<EmulatedFloat> out;
    out.reserve(n * m);
    std::vector<Rational> raw;
    if (pre_rounding) raw.reserve(n * m);
    for (std::size_t k = 0; k < n * m; ++k) {
        const double g = stream.next_gaussian();
        out.push_back(EmulatedFloat::from_double(g, cfg));
        if (pre_rounding) raw.push_back(rational_from_double(g));
    }
    if (pre_rounding) *pre_rounding = Matrix<Rational>(n, m, std::move(raw));
    return Matrix<EmulatedFloat>(n, m, std::move(out));
}

Matrix<double> sample_gaussian_doubles(std::size_t n, std::size_t m, RngStream& stream) {
    if (n == 0 || m == 0) throw std::invalid_argument("matrix dimensions must be >= 1");
    std::vector<double> out(n * m);
    for (auto& x : out) x = stream.next_gaussian();
    return Matrix<double>(n, m, std::move(out));
}

Matrix<Rational> exact_shadow(const Matrix<EmulatedFloat>& m) { return to_rational(m); }

}  // namespace pivotlab
