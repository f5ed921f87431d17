#include "ougf/stats.hpp"

#include <charconv>
#include <cstdio>

namespace ougf {

std::string format_g17(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

}  // namespace ougf
