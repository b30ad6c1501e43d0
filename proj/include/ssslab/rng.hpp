#pragma once

#include <array>
#include <concepts>
#include <cstdint>

#include "ssslab/rational.hpp"

namespace ssslab {

/// Source of uniform 64-bit words.
template <class S>
concept UniformStream = requires(S& s) {
    { s.next() } -> std::same_as<std::uint64_t>;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Philox2x64-10 block function (Salmon et al., SC'11): a keyed bijection on
/// 128-bit counters.
inline std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> ctr, std::uint64_t key) noexcept
{
    constexpr std::uint64_t multiplier = 0xD2B74407B1CE6E93ULL;
    constexpr std::uint64_t weyl = 0x9E3779B97F4A7C15ULL;
    for (int round = 0; round < 10; ++round) {
        wide_uint prod = static_cast<wide_uint>(multiplier) * ctr[0];
        auto hi = static_cast<std::uint64_t>(prod >> 64);
        auto lo = static_cast<std::uint64_t>(prod);
        ctr = {hi ^ key ^ ctr[1], lo};
        key += weyl;
    }
    return ctr;
}

/// Key for the family of trial streams at a given (master seed, n).
inline constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t n) noexcept
{
    return splitmix64(master_seed ^ splitmix64(n));
}

/// Counter-based stream for one trial. Draw number d of trial i is word
/// d % 2 of philox(key, {d / 2, i}), so distinct trials never share an input
/// block and the stream needs no state beyond its position.
class TrialStream {
public:
    TrialStream(std::uint64_t key, std::uint64_t trial) noexcept : key_(key), trial_(trial) {}

    std::uint64_t next() noexcept
    {
        if (slot_ == 2) {
            buffer_ = philox2x64({block_++, trial_}, key_);
            slot_ = 0;
        }
        return buffer_[slot_++];
    }

private:
    std::uint64_t key_;
    std::uint64_t trial_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int slot_ = 2;
};

/// Always returns the same word; used to force outcomes in tests.
struct ConstantStream {
    std::uint64_t value = 0;
    std::uint64_t next() noexcept { return value; }
};

/// Bernoulli(c) from one uniform word U: success iff U * den(c) < num(c) * 2^64.
/// Precomputes cut = ceil(num * 2^64 / den) so that test is U < cut.
class BernoulliCut {
public:
    explicit BernoulliCut(const Rational& c)
    {
        if (c < 0 || c > 1)
            throw std::invalid_argument("bernoulli probability must lie in [0, 1]");
        wide_uint scaled = static_cast<wide_uint>(c.num()) << 64;
        auto den = static_cast<wide_uint>(c.den());
        cut_ = scaled / den + (scaled % den != 0 ? 1 : 0);
    }

    bool operator()(std::uint64_t u) const noexcept { return static_cast<wide_uint>(u) < cut_; }

private:
    wide_uint cut_ = 0;
};

} // namespace ssslab
