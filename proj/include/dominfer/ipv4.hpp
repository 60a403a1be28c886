#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dominfer {

using Ipv4 = std::uint32_t;

inline std::optional<Ipv4> parse_ipv4(std::string_view s) {
    Ipv4 value = 0;
    int octets = 0;
    std::size_t i = 0;
    while (octets < 4) {
        if (i >= s.size()) return std::nullopt;
        int octet = 0, digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            octet = octet * 10 + (s[i] - '0');
            if (octet > 255 || ++digits > 3) return std::nullopt;
            ++i;
        }
        if (digits == 0) return std::nullopt;
        value = (value << 8) | static_cast<Ipv4>(octet);
        ++octets;
        if (octets < 4) {
            if (i >= s.size() || s[i] != '.') return std::nullopt;
            ++i;
        }
    }
    if (i != s.size()) return std::nullopt;
    return value;
}

inline std::string format_ipv4(Ipv4 ip) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                  (ip >> 8) & 0xFF, ip & 0xFF);
    return buf;
}

inline Ipv4 subnet_of(Ipv4 ip, int prefix_len) {
    if (prefix_len <= 0) return 0;
    if (prefix_len >= 32) return ip;
    return ip & (~Ipv4(0) << (32 - prefix_len));
}

struct Cidr {
    Ipv4 prefix = 0;
    int len = 0;
};

// "a.b.c.d/len"; a bare address is treated as /32.
inline std::optional<Cidr> parse_cidr(std::string_view s) {
    int len = 32;
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        len = 0;
        auto tail = s.substr(slash + 1);
        if (tail.empty() || tail.size() > 2) return std::nullopt;
        for (char c : tail) {
            if (c < '0' || c > '9') return std::nullopt;
            len = len * 10 + (c - '0');
        }
        if (len > 32) return std::nullopt;
        s = s.substr(0, slash);
    }
    auto ip = parse_ipv4(s);
    if (!ip) return std::nullopt;
    return Cidr{subnet_of(*ip, len), len};
}

}  // namespace dominfer
