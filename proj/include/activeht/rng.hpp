#pragma once

// Counter-based random streams (Philox4x32-10). A draw is a pure function of
// (seed, rep, index, purpose, position-in-stream), so results never depend on
// evaluation order or on how work is split across threads.

#include <array>
#include <cstdint>

namespace activeht {

/// Purpose tags partition the random space of one (seed, rep, index) triple.
enum class Purpose : std::uint8_t {
    Decision = 0,  // U_i for the query/no-query Bernoulli
    Subset = 1,    // Random baseline subset selection
    Mixture = 2,   // null / non-null indicator and effect size
    Primary = 3,   // noise of the primary observation Z_i
    Auxiliary = 4, // noise of the auxiliary channel
    Sampler = 5,   // Monte Carlo validity samplers
    Fixture = 6,   // synthetic data files
};

namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kM0 = 0xD2511F53u;
inline constexpr std::uint32_t kM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kW1 = 0xBB67AE85u;

constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

/// Philox4x32 with 10 rounds.
constexpr Counter block(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        c = round(c, k);
    }
    return c;
}

} // namespace philox

inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// One reproducible stream of uniforms for a (seed, rep, index, purpose) tuple.
/// Each Philox block yields two 53-bit doubles in [0, 1).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint32_t rep, std::uint64_t index, Purpose purpose)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          rep_(rep), index_(index), purpose_(static_cast<std::uint32_t>(purpose)) {}

    std::uint64_t next_bits() {
        if (cursor_ == 2) refill();
        const std::uint64_t out = (static_cast<std::uint64_t>(buf_[2 * cursor_ + 1]) << 32) | buf_[2 * cursor_];
        ++cursor_;
        return out;
    }

    /// Uniform in [0, 1).
    double uniform() { return to_unit(next_bits()); }

    /// Uniform in (0, 1], for logarithms.
    double uniform_pos() { return 1.0 - uniform(); }

private:
    void refill() {
        // 24 bits of block position, 8 bits of purpose tag.
        const philox::Counter ctr{(block_ & 0x00FFFFFFu) | (purpose_ << 24), rep_,
                                  static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
        buf_ = philox::block(ctr, key_);
        ++block_;
        cursor_ = 0;
    }

    philox::Key key_;
    std::uint32_t rep_;
    std::uint64_t index_;
    std::uint32_t purpose_;
    std::uint32_t block_ = 0;
    philox::Counter buf_{};
    int cursor_ = 2;
};

inline CounterStream rng_stream(std::uint64_t seed, std::uint32_t rep, std::uint64_t index, Purpose purpose) {
    return CounterStream(seed, rep, index, purpose);
}

/// First uniform of the stream; the per-hypothesis decision draw U_i.
inline double uniform_draw(std::uint64_t seed, std::uint32_t rep, std::uint64_t index, Purpose purpose) {
    return CounterStream(seed, rep, index, purpose).uniform();
}

} // namespace activeht
