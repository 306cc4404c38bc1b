#pragma once

// Counter-based random streams.
//
// Every random draw in the lab is a pure function of (master seed, stream
// path, counter). A stream path is a short list of integers naming the
// consumer, e.g. {tag::block, replicate, level, k}. The stream key is built
// by folding the path through the SplitMix64 finalizer, and draw i of the
// stream is finalize(key + i * golden_gamma). No generator state is shared
// between streams, so results do not depend on which thread ran what.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace wdlab {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t finalize64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Stream-path tags used across the lab. Values are part of the output
/// contract: changing one changes every downstream number.
namespace tag {
inline constexpr std::uint64_t path = 1;
inline constexpr std::uint64_t tail = 2;
inline constexpr std::uint64_t first_gaussian = 3;
inline constexpr std::uint64_t block = 4;
inline constexpr std::uint64_t replicate = 5;
inline constexpr std::uint64_t experiment = 6;
inline constexpr std::uint64_t copy = 7;
inline constexpr std::uint64_t reference = 8;
}  // namespace tag

/// Derive a 64-bit stream key from a master seed and a stream path.
inline constexpr std::uint64_t derive_key(std::uint64_t master,
                                          std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = detail::finalize64(master + detail::golden_gamma);
    for (std::uint64_t id : path) {
        key = detail::finalize64(key ^ detail::finalize64(id * detail::golden_gamma + 0x632be59bd9b4e019ULL));
    }
    return key;
}

/// A counter-based stream. Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

    constexpr Stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
        : key_(derive_key(master, path)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return detail::finalize64(key_ + (++counter_) * detail::golden_gamma);
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    constexpr double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace wdlab
