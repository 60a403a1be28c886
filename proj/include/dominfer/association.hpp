#pragma once

#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dominfer/as_map.hpp"
#include "dominfer/ip_classifier.hpp"
#include "dominfer/parallel.hpp"
#include "dominfer/resolution_graph.hpp"

namespace dominfer {

enum class Scheme { Baseline, New, Relaxed };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Baseline: return "baseline";
        case Scheme::New: return "new";
        case Scheme::Relaxed: return "relaxed";
    }
    return "?";
}

inline std::optional<Scheme> scheme_from_string(std::string_view s) {
    if (s == "baseline") return Scheme::Baseline;
    if (s == "new") return Scheme::New;
    if (s == "relaxed") return Scheme::Relaxed;
    return std::nullopt;
}

// What a pair of domains shares, as seen through the IP classifier:
// their common dedicated/public IPs, AS diversity of the common public IPs,
// and the subnet-level overlap used by the relaxed rule.
struct SharedProfile {
    std::vector<Ipv4> shared_dedicated;
    std::vector<Ipv4> shared_public;
    std::size_t shared_public_as_count = 0;    // distinct ASs over shared_public, AS0 excluded
    std::size_t shared_subnet_count = 0;       // /prefix subnets holding dedicated IPs of both
    std::size_t d1_dedicated_in_shared = 0;    // each side's dedicated IPs inside those subnets
    std::size_t d2_dedicated_in_shared = 0;
};

inline double decay_weight(std::size_t n) {
    // Association strength 1 - 1/(n+1); n >= 1 whenever an association exists.
    invariant(n >= 1, "association strength computed with n = 0");
    return 1.0 - 1.0 / (static_cast<double>(n) + 1.0);
}

// Dedicated rule: at least one shared dedicated IP. Public rule: more than one
// shared public IP spanning more than one AS. Strength n = 2|IP_d| + |AS(IP_u)| - 1.
inline std::optional<double> pair_weight_new(const SharedProfile& p) {
    bool dedicated_rule = !p.shared_dedicated.empty();
    bool public_rule = p.shared_public.size() >= 2 && p.shared_public_as_count >= 2;
    if (!dedicated_rule && !public_rule) return std::nullopt;
    std::size_t n = 2 * p.shared_dedicated.size() + p.shared_public_as_count - 1;
    return decay_weight(n);
}

// Relaxed rule swaps the dedicated condition for shared /24 subnets and
// replaces 2|IP_d| with |IP_d1| + |IP_d2| counted inside the shared subnets.
inline std::optional<double> pair_weight_relaxed(const SharedProfile& p) {
    bool subnet_rule = p.shared_subnet_count >= 1;
    bool public_rule = p.shared_public.size() >= 2 && p.shared_public_as_count >= 2;
    if (!subnet_rule && !public_rule) return std::nullopt;
    std::size_t n = p.d1_dedicated_in_shared + p.d2_dedicated_in_shared + p.shared_public_as_count - 1;
    return decay_weight(n);
}

// AS-diversity rule over all shared IPs, ignoring the public/dedicated split.
inline std::optional<double> pair_weight_baseline(const SharedProfile& p, const AsMap& as_map) {
    std::set<std::uint32_t> ases;
    for (auto ip : p.shared_dedicated) {
        auto as = as_map.lookup(ip);
        if (as != kUnknownAs) ases.insert(as);
    }
    for (auto ip : p.shared_public) {
        auto as = as_map.lookup(ip);
        if (as != kUnknownAs) ases.insert(as);
    }
    if (ases.size() < 2) return std::nullopt;
    return decay_weight(ases.size() - 1);
}

// ---------------------------------------------------------------------------
// domain graph
// ---------------------------------------------------------------------------

struct DomainGraph {
    Scheme scheme = Scheme::New;
    std::vector<std::string> domains;  // all domains of the source graph, sorted
    struct Edge {
        std::uint32_t a = 0, b = 0;  // a < b
        double weight = 0.0;
    };
    std::vector<Edge> edges;  // sorted by (a, b)
    DateRange window;

    std::size_t covered_domains() const {
        std::vector<bool> seen(domains.size(), false);
        for (const auto& e : edges) seen[e.a] = seen[e.b] = true;
        std::size_t n = 0;
        for (bool s : seen) n += s;
        return n;
    }

    std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency() const {
        std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(domains.size());
        for (const auto& e : edges) {
            adj[e.a].emplace_back(e.b, e.weight);
            adj[e.b].emplace_back(e.a, e.weight);
        }
        return adj;
    }

    std::uint32_t domain_index(std::string_view name) const {
        auto it = std::lower_bound(domains.begin(), domains.end(), name);
        if (it == domains.end() || *it != name) throw InputError("domain not in graph: " + std::string(name));
        return static_cast<std::uint32_t>(it - domains.begin());
    }

    bool has_domain(std::string_view name) const {
        auto it = std::lower_bound(domains.begin(), domains.end(), name);
        return it != domains.end() && *it == name;
    }
};

namespace detail {

struct DomainView {
    std::vector<Ipv4> ips;              // sorted
    std::vector<Ipv4> dedicated_subnets;  // sorted distinct subnets of dedicated IPs
};

inline SharedProfile make_profile(const DomainView& a, const DomainView& b,
                                  const std::unordered_map<Ipv4, IpLabel>& labels,
                                  const AsMap& as_map, int subnet_prefix_len, bool need_labels) {
    SharedProfile p;
    std::vector<Ipv4> shared;
    std::set_intersection(a.ips.begin(), a.ips.end(), b.ips.begin(), b.ips.end(),
                          std::back_inserter(shared));
    std::set<std::uint32_t> public_ases;
    for (auto ip : shared) {
        IpLabel label = IpLabel::Public;
        auto it = labels.find(ip);
        if (it != labels.end()) {
            label = it->second;
        } else if (need_labels) {
            throw InputError("IP has no classification label: " + format_ipv4(ip));
        }
        if (label == IpLabel::Dedicated) {
            p.shared_dedicated.push_back(ip);
        } else {
            p.shared_public.push_back(ip);
            auto as = as_map.lookup(ip);
            if (as != kUnknownAs) public_ases.insert(as);
        }
    }
    p.shared_public_as_count = public_ases.size();

    std::vector<Ipv4> shared_subnets;
    std::set_intersection(a.dedicated_subnets.begin(), a.dedicated_subnets.end(),
                          b.dedicated_subnets.begin(), b.dedicated_subnets.end(),
                          std::back_inserter(shared_subnets));
    p.shared_subnet_count = shared_subnets.size();
    if (!shared_subnets.empty()) {
        auto count_in_shared = [&](const DomainView& v) {
            std::size_t n = 0;
            for (auto ip : v.ips) {
                auto it = labels.find(ip);
                bool dedicated = it != labels.end() && it->second == IpLabel::Dedicated;
                if (!dedicated) continue;
                if (std::binary_search(shared_subnets.begin(), shared_subnets.end(),
                                       subnet_of(ip, subnet_prefix_len)))
                    ++n;
            }
            return n;
        };
        p.d1_dedicated_in_shared = count_in_shared(a);
        p.d2_dedicated_in_shared = count_in_shared(b);
    }
    return p;
}

}  // namespace detail

// Shared profile for one domain pair, computed straight off the graph.
inline SharedProfile shared_profile(const ResolutionGraph& g,
                                    const std::unordered_map<Ipv4, IpClassification>& labels,
                                    const AsMap& as_map, std::string_view d1, std::string_view d2,
                                    int subnet_prefix_len = 24) {
    std::unordered_map<Ipv4, IpLabel> label_of;
    for (const auto& [ip, c] : labels) label_of[ip] = c.label;
    auto adj = g.adjacency();
    auto view_of = [&](std::string_view name) {
        detail::DomainView v;
        for (auto e : adj.by_domain[g.domain_index(name)]) v.ips.push_back(g.ips[g.edges[e].ip]);
        std::sort(v.ips.begin(), v.ips.end());
        for (auto ip : v.ips) {
            auto it = label_of.find(ip);
            if (it != label_of.end() && it->second == IpLabel::Dedicated)
                v.dedicated_subnets.push_back(subnet_of(ip, subnet_prefix_len));
        }
        std::sort(v.dedicated_subnets.begin(), v.dedicated_subnets.end());
        v.dedicated_subnets.erase(std::unique(v.dedicated_subnets.begin(), v.dedicated_subnets.end()),
                                  v.dedicated_subnets.end());
        return v;
    };
    return detail::make_profile(view_of(d1), view_of(d2), label_of, as_map, subnet_prefix_len, false);
}

// Builds the weighted domain graph for one scheme. Candidate pairs come from
// inverted indexes (IP -> domains, and dedicated subnet -> domains for the
// relaxed scheme) so only pairs that actually share something are touched.
inline DomainGraph build_domain_graph(const ResolutionGraph& g,
                                      const std::unordered_map<Ipv4, IpClassification>& labels,
                                      const AsMap& as_map, Scheme scheme, int subnet_prefix_len = 24,
                                      unsigned threads = 1) {
    const bool need_labels = scheme != Scheme::Baseline;
    std::unordered_map<Ipv4, IpLabel> label_of;
    label_of.reserve(labels.size());
    for (const auto& [ip, c] : labels) label_of[ip] = c.label;
    if (need_labels) {
        for (auto ip : g.ips)
            if (!label_of.count(ip))
                throw InputError("IP has no classification label: " + format_ipv4(ip) +
                                 " (classifier output does not cover this graph)");
    }

    DomainGraph dg;
    dg.scheme = scheme;
    dg.domains = g.domains;
    dg.window = g.window;

    const std::size_t nd = g.domains.size();
    std::vector<detail::DomainView> views(nd);
    auto adj = g.adjacency();
    for (std::size_t d = 0; d < nd; ++d) {
        auto& v = views[d];
        for (auto e : adj.by_domain[d]) v.ips.push_back(g.ips[g.edges[e].ip]);
        std::sort(v.ips.begin(), v.ips.end());
        for (auto ip : v.ips) {
            auto it = label_of.find(ip);
            if (it != label_of.end() && it->second == IpLabel::Dedicated)
                v.dedicated_subnets.push_back(subnet_of(ip, subnet_prefix_len));
        }
        std::sort(v.dedicated_subnets.begin(), v.dedicated_subnets.end());
        v.dedicated_subnets.erase(std::unique(v.dedicated_subnets.begin(), v.dedicated_subnets.end()),
                                  v.dedicated_subnets.end());
    }

    // Candidate pairs.
    std::set<std::pair<std::uint32_t, std::uint32_t>> candidates;
    {
        std::unordered_map<Ipv4, std::vector<std::uint32_t>> by_ip;
        for (const auto& e : g.edges) by_ip[g.ips[e.ip]].push_back(e.domain);
        for (auto& [ip, ds] : by_ip) {
            std::sort(ds.begin(), ds.end());
            for (std::size_t i = 0; i < ds.size(); ++i)
                for (std::size_t j = i + 1; j < ds.size(); ++j) candidates.emplace(ds[i], ds[j]);
        }
        if (scheme == Scheme::Relaxed) {
            std::unordered_map<Ipv4, std::vector<std::uint32_t>> by_subnet;
            for (std::uint32_t d = 0; d < nd; ++d)
                for (auto sn : views[d].dedicated_subnets) by_subnet[sn].push_back(d);
            for (auto& [sn, ds] : by_subnet) {
                std::sort(ds.begin(), ds.end());
                for (std::size_t i = 0; i < ds.size(); ++i)
                    for (std::size_t j = i + 1; j < ds.size(); ++j) candidates.emplace(ds[i], ds[j]);
            }
        }
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(candidates.begin(), candidates.end());
    std::vector<double> weights(pairs.size(), -1.0);
    parallel_for(pairs.size(), threads, [&](std::size_t i) {
        auto [d1, d2] = pairs[i];
        auto profile = detail::make_profile(views[d1], views[d2], label_of, as_map,
                                            subnet_prefix_len, need_labels);
        std::optional<double> w;
        switch (scheme) {
            case Scheme::Baseline: w = pair_weight_baseline(profile, as_map); break;
            case Scheme::New: w = pair_weight_new(profile); break;
            case Scheme::Relaxed: w = pair_weight_relaxed(profile); break;
        }
        if (w) {
            invariant(*w >= 0.5 && *w < 1.0, "association weight out of [0.5, 1)");
            weights[i] = *w;
        }
    });
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (weights[i] >= 0) dg.edges.push_back({pairs[i].first, pairs[i].second, weights[i]});
    return dg;
}

// Restriction of the bipartite graph to domains covered by the domain graph;
// their resolution edges are kept as-is.
inline ResolutionGraph build_induced_bipartite(const ResolutionGraph& g, const DomainGraph& dg) {
    std::vector<bool> covered(dg.domains.size(), false);
    for (const auto& e : dg.edges) covered[e.a] = covered[e.b] = true;

    std::unordered_set<std::string> keep;
    for (std::size_t d = 0; d < dg.domains.size(); ++d)
        if (covered[d]) keep.insert(dg.domains[d]);

    ResolutionGraph out;
    out.window = g.window;
    std::vector<std::uint32_t> domain_remap(g.domains.size(), UINT32_MAX);
    for (std::uint32_t d = 0; d < g.domains.size(); ++d) {
        if (!keep.count(g.domains[d])) continue;
        domain_remap[d] = static_cast<std::uint32_t>(out.domains.size());
        out.domains.push_back(g.domains[d]);
    }
    std::vector<std::uint32_t> ip_remap(g.ips.size(), UINT32_MAX);
    std::vector<bool> ip_used(g.ips.size(), false);
    for (const auto& e : g.edges)
        if (domain_remap[e.domain] != UINT32_MAX) ip_used[e.ip] = true;
    for (std::uint32_t i = 0; i < g.ips.size(); ++i) {
        if (!ip_used[i]) continue;
        ip_remap[i] = static_cast<std::uint32_t>(out.ips.size());
        out.ips.push_back(g.ips[i]);
    }
    for (const auto& e : g.edges) {
        if (domain_remap[e.domain] == UINT32_MAX) continue;
        out.edges.push_back({domain_remap[e.domain], ip_remap[e.ip], e.first_seen, e.last_seen});
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization: CSV edge list + JSON header sidecar
// ---------------------------------------------------------------------------

inline std::string domain_graph_csv(const DomainGraph& dg) {
    std::string csv = "domain1,domain2,weight\n";
    for (const auto& e : dg.edges)
        csv += dg.domains[e.a] + "," + dg.domains[e.b] + "," + format_double(e.weight) + "\n";
    return csv;
}

inline nlohmann::ordered_json domain_graph_meta(const DomainGraph& dg) {
    nlohmann::ordered_json j;
    j["type"] = "domain_graph";
    j["scheme"] = to_string(dg.scheme);
    j["window"] = {{"start", format_date(dg.window.first)}, {"end", format_date(dg.window.last)}};
    j["domain_count"] = dg.domains.size();
    j["covered_domains"] = dg.covered_domains();
    j["edge_count"] = dg.edges.size();
    j["domains"] = dg.domains;
    return j;
}

inline DomainGraph domain_graph_from_files(const std::string& csv_text, const nlohmann::json& meta) {
    if (!meta.is_object() || meta.value("type", "") != std::string("domain_graph"))
        throw FormatError("not a domain graph sidecar");
    DomainGraph dg;
    auto scheme = scheme_from_string(meta.at("scheme").get<std::string>());
    if (!scheme) throw FormatError("unknown scheme in domain graph sidecar");
    dg.scheme = *scheme;
    auto start = parse_date(meta.at("window").at("start").get<std::string>());
    auto end = parse_date(meta.at("window").at("end").get<std::string>());
    if (!start || !end) throw FormatError("domain graph sidecar has malformed window");
    dg.window = {*start, *end};
    dg.domains = meta.at("domains").get<std::vector<std::string>>();

    auto lines = split(csv_text, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 3) throw FormatError("bad domain graph row: " + std::string(line));
        DomainGraph::Edge e;
        e.a = dg.domain_index(trim(f[0]));
        e.b = dg.domain_index(trim(f[1]));
        e.weight = std::stod(std::string(trim(f[2])));
        dg.edges.push_back(e);
    }
    return dg;
}

}  // namespace dominfer
