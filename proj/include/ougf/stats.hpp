#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace ougf {

// Streaming mean/variance (Welford); merge is associative so partial
// accumulators can be combined in any fixed order.
struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const Welford& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double total = static_cast<double>(n + other.n);
        const double d = other.mean - mean;
        mean += d * static_cast<double>(other.n) / total;
        m2 += other.m2 + d * d * static_cast<double>(n) * static_cast<double>(other.n) / total;
        n += other.n;
    }

    double variance() const {
        return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    }
    double std_error() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

// Locale-independent 17-significant-digit decimal formatting.
std::string format_g17(double v);

// FNV-1a, for config hashing.
std::uint64_t fnv1a(std::string_view text);

}  // namespace ougf
