#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fbmq {

/// Identifies one reproducible random stream. Identical (seed, stream_index)
/// pairs yield bit-identical output on the same build.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;

    RngSeed with_stream(std::uint64_t s) const { return {seed, s}; }
};

/// Philox4x64-10 counter-based generator. The output block is a pure
/// function of (key, counter), so any element of a stream can be produced
/// without generating its predecessors.
class Philox4x64 {
  public:
    using Block = std::array<std::uint64_t, 4>;

    Philox4x64(std::uint64_t key0, std::uint64_t key1) : k0_(key0), k1_(key1) {}
    explicit Philox4x64(RngSeed s) : Philox4x64(s.seed, s.stream_index) {}

    Block operator()(std::uint64_t c0, std::uint64_t c1 = 0,
                     std::uint64_t c2 = 0, std::uint64_t c3 = 0) const {
        std::uint64_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
        std::uint64_t k0 = k0_, k1 = k1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t hi0 = mulhi(kMul0, x0), lo0 = kMul0 * x0;
            const std::uint64_t hi1 = mulhi(kMul1, x2), lo1 = kMul1 * x2;
            x0 = hi1 ^ x1 ^ k0;
            x1 = lo1;
            x2 = hi0 ^ x3 ^ k1;
            x3 = lo0;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {x0, x1, x2, x3};
    }

  private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static std::uint64_t mulhi(std::uint64_t a, std::uint64_t b) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(a) * b) >> 64);
    }

    std::uint64_t k0_, k1_;
};

/// Sequential view over a Philox stream: uniforms in (0,1) and standard
/// normals via Box-Muller. Copyable, cheap to construct.
class RandomStream {
  public:
    explicit RandomStream(RngSeed s) : gen_(s) {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            block_ = gen_(counter_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// Uniform on the open interval (0,1).
    double next_uniform() {
        const std::uint64_t x = next_u64();
        return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    Philox4x64 gen_;
    std::uint64_t counter_ = 0;
    Philox4x64::Block block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fbmq
