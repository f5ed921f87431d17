#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ougf {

// SplitMix64 finalizer (Steele, Lea, Flood).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Counter-based random stream.  The i-th draw is mix64(key + i*gamma), so a
// stream is fully determined by its key and can be replayed statelessly.
// Keys are derived by absorbing an Ulam-Harris address into the seed one
// component at a time; the stream of a subtree therefore does not depend on
// the order in which other subtrees were simulated.
//
// Single consumer: next_u64 mutates the counter. Copy the stream to fork a
// read position; use child() to derive an independent stream.
class RandomStream {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    RandomStream() = default;
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    static std::uint64_t absorb(std::uint64_t key, std::uint64_t v) {
        return mix64(key + (v + 1) * kGamma);
    }

    // Independent stream for sub-object `index` (appends one address component).
    RandomStream child(std::uint64_t index) const {
        return RandomStream(absorb(key_, index));
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as an argument of log.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Exponential with the given rate. Consumes one draw.
    double exponential(double rate);

    // Standard normal via Box-Muller. Always consumes exactly two draws.
    double normal();

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Root stream of a seed (empty address).
RandomStream derive_stream(std::uint64_t seed);

// Stream at an Ulam-Harris address under the seed.
RandomStream derive_stream(std::uint64_t seed, const std::vector<std::uint64_t>& path);

// Stream labelled by name (for non-genealogical consumers).
RandomStream derive_stream(std::uint64_t seed, std::string_view label);

}  // namespace ougf
