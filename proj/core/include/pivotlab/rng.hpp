// Counter-based random streams and Gaussian sampling.
//
// Generator: Philox4x32-10 (Salmon et al., SC'11), multipliers 0xD2511F53 and
// 0xCD9E8D57, Weyl key increments 0x9E3779B9 and 0xBB67AE85. One block maps the
// 128-bit counter (draw_block_lo, draw_block_hi, stream_lo, stream_hi) under the
// 64-bit key (seed_lo, seed_hi) to four 32-bit words, consumed as two 64-bit
// values (w0 | w1 << 32, w2 | w3 << 32).
//
// Uniforms use the top 53 bits: (x >> 11) * 2^-53, shifted to (0, 1] for the
// logarithm. Normals come from the Box-Muller pair
//   r = sqrt(-2 ln u1), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2)
// with z0 returned first and z1 cached for the next call.
#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "pivotlab/matrix.hpp"

namespace pivotlab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// SplitMix64 finaliser; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x);

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : seed_(master_seed), stream_(stream_id) {}

    [[nodiscard]] std::uint64_t master_seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_; }
    /// Number of 64-bit words consumed so far.
    [[nodiscard]] std::uint64_t draw_counter() const { return words_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double next_uniform();
    double next_gaussian();

    /// Independent child stream with id mix64(stream_id ^ mix64(child + 1)).
    [[nodiscard]] RngStream substream(std::uint64_t child) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t words_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    std::optional<double> spare_gaussian_;
};

/// Entries fl(g) of i.i.d. standard normals drawn row-major from `stream`.
/// When `pre_rounding` is given it receives the exact binary64 draws.
Matrix<EmulatedFloat> sample_gaussian_matrix(std::size_t n, std::size_t m, RngStream& stream,
                                             FpConfig cfg, Matrix<Rational>* pre_rounding = nullptr);

/// Same draws as sample_gaussian_matrix, kept as binary64.
Matrix<double> sample_gaussian_doubles(std::size_t n, std::size_t m, RngStream& stream);

/// Exact rational values of a sampled matrix (the exact-arithmetic shadow).
Matrix<Rational> exact_shadow(const Matrix<EmulatedFloat>& m);

}  // namespace pivotlab
