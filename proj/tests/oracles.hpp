// Test-only oracles and dataset generators. Everything here is independent of
// the library's algorithm implementations: brute-force enumerations and
// hand-rolled generators used to freeze expected values.
#pragma once

#include <array>
#include <random>
#include <set>
#include <vector>

#include "dominfer/belief_propagation.hpp"
#include "dominfer/ip_features.hpp"
#include "dominfer/ip_classifier.hpp"

namespace testutil {

using dominfer::BpGraph;
using dominfer::IpFeatureVector;
using dominfer::IpLabel;
using dominfer::Ipv4;

// ---------------------------------------------------------------------------
// strongest-path oracle: exhaustive simple-path enumeration (graphs <= ~10 nodes)
// ---------------------------------------------------------------------------

struct WeightedGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;

    void add_edge(std::uint32_t a, std::uint32_t b, double w) {
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }
};

inline void enumerate_paths(const WeightedGraph& g, std::uint32_t at, double strength,
                            std::vector<bool>& visited, std::vector<double>& best, double floor) {
    if (strength > best[at]) best[at] = strength;
    visited[at] = true;
    for (auto [next, w] : g.adj[at]) {
        if (visited[next]) continue;
        double s = strength * w;
        if (s < floor) continue;
        enumerate_paths(g, next, s, visited, best, floor);
    }
    visited[at] = false;
}

inline std::vector<double> strongest_paths_oracle(const WeightedGraph& g, std::uint32_t seed,
                                                  double floor) {
    std::vector<double> best(g.n, 0.0);
    std::vector<bool> visited(g.n, false);
    enumerate_paths(g, seed, 1.0, visited, best, floor);
    return best;
}

// Random connected weighted graph: a random spanning tree plus extra edges.
inline WeightedGraph random_connected_graph(std::mt19937_64& rng, std::size_t max_nodes,
                                            double min_w = 0.05, double max_w = 1.0) {
    std::uniform_int_distribution<std::size_t> size_dist(2, max_nodes);
    WeightedGraph g;
    g.n = size_dist(rng);
    g.adj.resize(g.n);
    std::uniform_real_distribution<double> weight(min_w, max_w);
    std::set<std::pair<std::uint32_t, std::uint32_t>> used;
    for (std::uint32_t v = 1; v < g.n; ++v) {
        std::uniform_int_distribution<std::uint32_t> parent(0, v - 1);
        auto p = parent(rng);
        g.add_edge(p, v, weight(rng));
        used.insert({p, v});
    }
    std::uniform_int_distribution<std::size_t> extra_dist(0, g.n);
    std::size_t extras = extra_dist(rng);
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(g.n - 1));
    for (std::size_t i = 0; i < extras; ++i) {
        auto a = node(rng), b = node(rng);
        if (a == b) continue;
        auto key = std::minmax(a, b);
        if (!used.insert({key.first, key.second}).second) continue;
        g.add_edge(a, b, weight(rng));
    }
    return g;
}

// ---------------------------------------------------------------------------
// exact-marginal oracle: sum over all joint states (graphs <= ~14 nodes)
// ---------------------------------------------------------------------------

inline std::vector<std::array<double, 2>> exact_marginals(const BpGraph& g) {
    const std::size_t n = g.names.size();
    std::vector<std::array<double, 2>> marginal(n, {0.0, 0.0});
    double total = 0.0;
    for (std::uint64_t assignment = 0; assignment < (1ull << n); ++assignment) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p *= g.priors[i][(assignment >> i) & 1];
        for (const auto& e : g.edges)
            p *= e.potential.psi[(assignment >> e.a) & 1][(assignment >> e.b) & 1];
        total += p;
        for (std::size_t i = 0; i < n; ++i) marginal[i][(assignment >> i) & 1] += p;
    }
    for (auto& m : marginal) {
        m[0] /= total;
        m[1] /= total;
    }
    return marginal;
}

// Random tree-shaped BpGraph with random priors and symmetric potentials.
inline BpGraph random_tree_bp(std::mt19937_64& rng, std::size_t max_nodes) {
    std::uniform_int_distribution<std::size_t> size_dist(1, max_nodes);
    std::size_t n = size_dist(rng);
    std::uniform_real_distribution<double> prior(0.05, 0.95);
    std::uniform_real_distribution<double> eps(-0.45, 0.45);
    BpGraph g;
    for (std::size_t i = 0; i < n; ++i) {
        double p = prior(rng);
        g.add_node("n" + std::to_string(i), true, {1.0 - p, p});
    }
    for (std::uint32_t v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::uint32_t> parent(0, v - 1);
        g.edges.push_back({parent(rng), v, dominfer::EdgePotential::homophily(eps(rng))});
    }
    return g;
}

// ---------------------------------------------------------------------------
// planted IP feature set: separable public vs dedicated statistics
// ---------------------------------------------------------------------------

struct PlantedFeatures {
    std::vector<IpFeatureVector> features;
    std::vector<IpLabel> truth;  // aligned
};

inline PlantedFeatures planted_feature_set(std::uint64_t seed, std::size_t n_ips = 200,
                                           double public_fraction = 0.5) {
    std::mt19937_64 rng(seed);
    PlantedFeatures out;
    auto u = [&](unsigned lo, unsigned hi) {
        std::uniform_int_distribution<unsigned> d(lo, hi);
        return d(rng);
    };
    std::size_t n_public = static_cast<std::size_t>(double(n_ips) * public_fraction);
    for (std::size_t i = 0; i < n_ips; ++i) {
        bool is_public = i < n_public;
        IpFeatureVector f;
        f.ip = static_cast<Ipv4>((20u << 24) + i);
        if (is_public) {
            f.n_2ld = u(50, 500);
            f.n_fqdn = f.n_2ld + u(0, f.n_2ld);
            f.n_3ld = u(0, f.n_fqdn / 2);
            f.block_ips = u(5, 50);
            f.block_2ld = f.n_2ld * u(2, 6);
            f.block_fqdn = std::max(f.n_fqdn, f.block_2ld + u(0, 100));
            f.block_3ld = std::max(f.n_3ld, f.block_fqdn / 3);
        } else {
            f.n_2ld = u(1, 5);
            f.n_fqdn = f.n_2ld + u(0, 10);
            f.n_3ld = u(0, f.n_fqdn > f.n_2ld ? f.n_fqdn - f.n_2ld : 0);
            f.block_ips = u(1, 4);
            f.block_2ld = f.n_2ld + u(0, 5);
            f.block_fqdn = f.n_fqdn + u(0, 8);
            f.block_3ld = std::max(f.n_3ld, f.n_3ld + u(0, 3));
        }
        out.features.push_back(f);
        out.truth.push_back(is_public ? IpLabel::Public : IpLabel::Dedicated);
    }
    return out;
}

}  // namespace testutil
