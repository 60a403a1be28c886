#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dominfer/parallel.hpp"
#include "dominfer/public_suffix.hpp"
#include "dominfer/resolution_graph.hpp"

namespace dominfer {

// The 7 per-IP attributes: distinct FQDN/2LD/3LD counts for the IP itself and
// for its whole /prefix block, plus the number of hosting IPs in the block.
struct IpFeatureVector {
    Ipv4 ip = 0;
    std::uint32_t n_fqdn = 0;
    std::uint32_t n_2ld = 0;
    std::uint32_t n_3ld = 0;
    std::uint32_t block_fqdn = 0;
    std::uint32_t block_2ld = 0;
    std::uint32_t block_3ld = 0;
    std::uint32_t block_ips = 0;

    std::array<double, 7> as_row() const {
        return {double(n_fqdn), double(n_2ld), double(n_3ld),
                double(block_fqdn), double(block_2ld), double(block_3ld), double(block_ips)};
    }
};

inline constexpr std::array<const char*, 7> kIpAttributeNames = {
    "n_fqdn", "n_2ld", "n_3ld", "block_fqdn", "block_2ld", "block_3ld", "block_ips"};

struct FeatureStats {
    std::size_t unrecognized_suffix_domains = 0;
};

// One vector per IP, aligned with g.ips order.
inline std::vector<IpFeatureVector> extract_features(const ResolutionGraph& g,
                                                     const PublicSuffixTable& psl,
                                                     int subnet_prefix_len = 24,
                                                     FeatureStats* stats = nullptr,
                                                     unsigned threads = 1) {
    if (subnet_prefix_len < 12 || subnet_prefix_len > 30)
        throw InputError("subnet prefix length must be in [12,30]");

    // Intern 2LD/3LD strings once per domain.
    const std::size_t nd = g.domains.size();
    std::vector<std::uint32_t> domain_2ld(nd), domain_3ld(nd, UINT32_MAX);
    std::size_t fallback_count = 0;
    {
        std::unordered_map<std::string, std::uint32_t> intern2, intern3;
        for (std::size_t d = 0; d < nd; ++d) {
            auto s = psl.split(g.domains[d]);
            if (s.fallback) ++fallback_count;
            auto [it2, _2] = intern2.try_emplace(s.registered, static_cast<std::uint32_t>(intern2.size()));
            domain_2ld[d] = it2->second;
            if (!s.third_level.empty()) {
                auto [it3, _3] = intern3.try_emplace(s.third_level, static_cast<std::uint32_t>(intern3.size()));
                domain_3ld[d] = it3->second;
            }
        }
    }
    if (stats) stats->unrecognized_suffix_domains = fallback_count;

    auto adj = g.adjacency();
    const std::size_t ni = g.ips.size();
    std::vector<IpFeatureVector> out(ni);

    auto distinct_count = [](std::vector<std::uint32_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return static_cast<std::uint32_t>(v.size());
    };

    parallel_for(ni, threads, [&](std::size_t i) {
        auto& fv = out[i];
        fv.ip = g.ips[i];
        std::vector<std::uint32_t> fq, l2, l3;
        for (auto e : adj.by_ip[i]) {
            auto d = g.edges[e].domain;
            fq.push_back(d);
            l2.push_back(domain_2ld[d]);
            if (domain_3ld[d] != UINT32_MAX) l3.push_back(domain_3ld[d]);
        }
        fv.n_fqdn = distinct_count(fq);
        fv.n_2ld = distinct_count(l2);
        fv.n_3ld = distinct_count(l3);
    });

    // Block attributes: group hosting IPs by subnet, take distinct counts over
    // the union of the block's domains.
    std::map<Ipv4, std::vector<std::uint32_t>> blocks;  // subnet -> ip indices
    for (std::uint32_t i = 0; i < ni; ++i) blocks[subnet_of(g.ips[i], subnet_prefix_len)].push_back(i);

    std::vector<const std::vector<std::uint32_t>*> block_list;
    block_list.reserve(blocks.size());
    for (const auto& [subnet, members] : blocks) block_list.push_back(&members);

    parallel_for(block_list.size(), threads, [&](std::size_t b) {
        const auto& members = *block_list[b];
        std::vector<std::uint32_t> fq, l2, l3;
        for (auto i : members) {
            for (auto e : adj.by_ip[i]) {
                auto d = g.edges[e].domain;
                fq.push_back(d);
                l2.push_back(domain_2ld[d]);
                if (domain_3ld[d] != UINT32_MAX) l3.push_back(domain_3ld[d]);
            }
        }
        auto bf = distinct_count(fq), b2 = distinct_count(l2), b3 = distinct_count(l3);
        for (auto i : members) {
            out[i].block_fqdn = bf;
            out[i].block_2ld = b2;
            out[i].block_3ld = b3;
            out[i].block_ips = static_cast<std::uint32_t>(members.size());
        }
    });

    return out;
}

}  // namespace dominfer
