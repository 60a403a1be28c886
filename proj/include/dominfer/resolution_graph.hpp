#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dominfer/errors.hpp"
#include "dominfer/ipv4.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

struct ResolutionRecord {
    int date = 0;  // days since 1970-01-01
    std::string domain;
    Ipv4 ip = 0;
};

struct DateRange {
    int first = 0;
    int last = 0;  // inclusive

    bool contains(int day) const { return day >= first && day <= last; }
    bool empty() const { return last < first; }
    int length_days() const { return last - first + 1; }
};

struct ResolutionEdge {
    std::uint32_t domain = 0;  // index into ResolutionGraph::domains
    std::uint32_t ip = 0;      // index into ResolutionGraph::ips
    int first_seen = 0;
    int last_seen = 0;
};

// Bipartite domain<->IP graph for one time window. Node lists are sorted and
// unique; edges are unique per (domain, ip) and sorted by (domain, ip), which
// makes the serialized form a function of the input records alone.
struct ResolutionGraph {
    std::vector<std::string> domains;
    std::vector<Ipv4> ips;
    std::vector<ResolutionEdge> edges;
    DateRange window;

    std::size_t node_count() const { return domains.size() + ips.size(); }

    // Per-node lists of incident edge indices, in edge order.
    struct Adjacency {
        std::vector<std::vector<std::uint32_t>> by_domain;
        std::vector<std::vector<std::uint32_t>> by_ip;
    };

    Adjacency adjacency() const {
        Adjacency adj;
        adj.by_domain.resize(domains.size());
        adj.by_ip.resize(ips.size());
        for (std::uint32_t e = 0; e < edges.size(); ++e) {
            adj.by_domain[edges[e].domain].push_back(e);
            adj.by_ip[edges[e].ip].push_back(e);
        }
        return adj;
    }

    std::vector<std::uint32_t> ip_degrees() const {
        std::vector<std::uint32_t> deg(ips.size(), 0);
        for (const auto& e : edges) ++deg[e.ip];
        return deg;
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

struct ComponentPartition {
    std::vector<ResolutionGraph> components;       // sorted by node count desc
    std::vector<std::uint32_t> domain_component;   // aligned with source graph
    std::vector<std::uint32_t> ip_component;
};

}  // namespace dominfer
