#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace fracemb {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the k-th draw of substream (seed, stream, index)
/// is mix64(key + (k+1) * golden). Draws of one path never depend on any
/// other path, so any scheduling of paths over threads reproduces them.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept
        : key_(detail::mix64(detail::mix64(seed + detail::kGolden) ^ detail::mix64(stream * 0xD1B54A32D192ED03ULL + 1) ^
                             detail::mix64(index * 0xA0761D6478BD642FULL + 0x1234567ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0,1).
    double uniform_open() noexcept {
        // 53 random bits, offset by half an ulp so neither end is reachable
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard exponential variate.
    double exponential() noexcept { return -std::log(uniform_open()); }

    [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream tags separating independent uses of one user seed.
namespace streams {
inline constexpr std::uint64_t subordinator = 1;
inline constexpr std::uint64_t pilot = 2;
inline constexpr std::uint64_t renewal = 3;
inline constexpr std::uint64_t stable_samples = 4;
inline constexpr std::uint64_t scaling_reference = 5;
inline constexpr std::uint64_t variations = 6;
}  // namespace streams

}  // namespace fracemb
