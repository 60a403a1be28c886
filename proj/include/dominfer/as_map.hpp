#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dominfer/ipv4.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

// AS0 marks "no covering prefix"; it never counts as AS-diversity evidence.
inline constexpr std::uint32_t kUnknownAs = 0;

// Longest-prefix-match IP -> ASN table loaded from CSV `cidr,asn`.
class AsMap {
public:
    void add(Cidr cidr, std::uint32_t asn) {
        tables_[cidr.len][cidr.prefix] = asn;
        if (cidr.len < min_len_) min_len_ = cidr.len;
        if (cidr.len > max_len_) max_len_ = cidr.len;
    }

    static AsMap from_csv(const std::string& text) {
        AsMap m;
        auto lines = split(text, '\n');
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto line = trim(lines[i]);
            if (line.empty() || line.front() == '#') continue;
            if (i == 0 && to_lower(line) == "cidr,asn") continue;
            auto f = split(line, ',');
            if (f.size() != 2) throw FormatError("bad AS map row: " + std::string(line));
            auto cidr = parse_cidr(trim(f[0]));
            if (!cidr) throw FormatError("bad CIDR in AS map: " + std::string(line));
            std::uint32_t asn = 0;
            for (char c : trim(f[1])) {
                if (c < '0' || c > '9') throw FormatError("bad ASN in AS map: " + std::string(line));
                asn = asn * 10 + static_cast<std::uint32_t>(c - '0');
            }
            m.add(*cidr, asn);
        }
        return m;
    }

    static AsMap from_file(const std::string& path) { return from_csv(read_text_file(path)); }

    std::uint32_t lookup(Ipv4 ip) const {
        for (int len = max_len_; len >= min_len_; --len) {
            auto it = tables_[len].find(subnet_of(ip, len));
            if (it != tables_[len].end()) return it->second;
        }
        return kUnknownAs;
    }

    std::string to_csv() const {
        std::string out = "cidr,asn\n";
        std::vector<std::tuple<int, Ipv4, std::uint32_t>> rows;
        for (int len = 0; len <= 32; ++len)
            for (const auto& [prefix, asn] : tables_[len]) rows.emplace_back(len, prefix, asn);
        std::sort(rows.begin(), rows.end());
        for (const auto& [len, prefix, asn] : rows)
            out += format_ipv4(prefix) + "/" + std::to_string(len) + "," + std::to_string(asn) + "\n";
        return out;
    }

    bool empty() const { return min_len_ > max_len_; }

private:
    std::unordered_map<Ipv4, std::uint32_t> tables_[33];
    int min_len_ = 33;
    int max_len_ = -1;
};

}  // namespace dominfer
