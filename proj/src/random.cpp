#include "ougf/random.hpp"

#include <cmath>

namespace ougf {

double RandomStream::exponential(double rate) {
    return -std::log(uniform_pos()) / rate;
}

double RandomStream::normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

RandomStream derive_stream(std::uint64_t seed) {
    return RandomStream(mix64(seed + RandomStream::kGamma));
}

RandomStream derive_stream(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
    RandomStream s = derive_stream(seed);
    for (std::uint64_t component : path) s = s.child(component);
    return s;
}

RandomStream derive_stream(std::uint64_t seed, std::string_view label) {
    // FNV-1a over the label, absorbed as a single component.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x00000100000001B3ULL;
    }
    return RandomStream(RandomStream::absorb(derive_stream(seed).key(), h));
}

}  // namespace ougf
