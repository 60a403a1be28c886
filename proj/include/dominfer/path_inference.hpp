#pragma once

#include <iostream>
#include <queue>
#include <span>
#include <unordered_map>
#include <vector>

#include "dominfer/association.hpp"
#include "dominfer/parallel.hpp"

namespace dominfer {

using ScoreTable = std::unordered_map<std::string, double>;

struct PathConfig {
    double assoc_floor = 1e-6;    // per-seed searches stop expanding below this
    double tail_epsilon = 1e-12;  // decay terms below this are dropped
    unsigned threads = 1;
};

// Single-source max-product search. Edge weights are in (0,1), so path
// strength only shrinks along a path and best-first expansion is exact
// (Dijkstra in the (max, x) semiring). Computed directly on products rather
// than -log transforms to keep values bit-comparable with small oracles.
inline std::vector<double> strongest_paths(
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& adj, std::size_t n,
    std::uint32_t seed, double assoc_floor) {
    std::vector<double> best(n, 0.0);
    best[seed] = 1.0;
    std::priority_queue<std::pair<double, std::uint32_t>> frontier;
    frontier.push({1.0, seed});
    while (!frontier.empty()) {
        auto [strength, u] = frontier.top();
        frontier.pop();
        if (strength < best[u]) continue;  // stale entry
        for (auto [v, w] : adj[u]) {
            double cand = strength * w;
            if (cand <= best[v] || cand < assoc_floor) continue;
            best[v] = cand;
            frontier.push({cand, v});
        }
    }
    return best;
}

inline std::vector<double> strongest_paths(const DomainGraph& dg, std::uint32_t seed,
                                           double assoc_floor = 1e-6) {
    invariant(seed < dg.domains.size(), "seed index out of range");
    auto adj = dg.adjacency();
    return strongest_paths(adj, dg.domains.size(), seed, assoc_floor);
}

// Exponential-decay combination of a domain's sorted seed associations:
// strongest first, then halving contributions scaled by the remaining headroom.
inline double mal_score(std::span<const double> sorted_assoc, double tail_epsilon = 1e-12) {
    if (sorted_assoc.empty()) return 0.0;
    for (std::size_t i = 1; i < sorted_assoc.size(); ++i)
        invariant(sorted_assoc[i] <= sorted_assoc[i - 1],
                  "association list must be sorted non-increasing");
    double first = sorted_assoc[0];
    double tail = 0.0;
    double coeff = 0.5;
    for (std::size_t i = 1; i < sorted_assoc.size(); ++i) {
        double term = coeff * sorted_assoc[i];
        if (term < tail_epsilon) break;  // geometric decay: the remainder is negligible
        tail += term;
        coeff *= 0.5;
    }
    return first + (1.0 - first) * tail;
}

struct SeedSet {
    std::vector<std::string> malicious;  // intersected with the graph, sorted

    static SeedSet from_domains(const std::vector<std::string>& raw, const DomainGraph& dg,
                                std::ostream* warn = nullptr) {
        SeedSet s;
        std::size_t missing = 0;
        for (const auto& d : raw) {
            if (dg.has_domain(d))
                s.malicious.push_back(d);
            else
                ++missing;
        }
        std::sort(s.malicious.begin(), s.malicious.end());
        s.malicious.erase(std::unique(s.malicious.begin(), s.malicious.end()), s.malicious.end());
        if (missing && warn)
            *warn << "warning: " << missing << " seed domains are not in the domain graph\n";
        return s;
    }
};

// Runs one strongest-path pass per seed and combines per-domain association
// lists. Association lists are capped at 64 entries; entry 65 would carry a
// coefficient of 2^-64, far below tail_epsilon.
inline ScoreTable score_all(const DomainGraph& dg, const SeedSet& seeds, PathConfig cfg = {}) {
    if (seeds.malicious.empty()) throw InputError("no effective seed domains in the graph");
    const std::size_t nd = dg.domains.size();
    auto adj = dg.adjacency();

    constexpr std::size_t kMaxAssoc = 64;
    std::vector<std::vector<double>> assoc(nd);  // per-domain, kept sorted desc

    // Seeds are processed in deterministic batches: searches run in parallel,
    // the merge is sequential in seed order.
    const std::size_t batch = 16;
    std::vector<std::vector<double>> results(std::min(batch, seeds.malicious.size()));
    for (std::size_t s0 = 0; s0 < seeds.malicious.size(); s0 += batch) {
        std::size_t count = std::min(batch, seeds.malicious.size() - s0);
        parallel_for(count, cfg.threads, [&](std::size_t k) {
            auto seed_idx = dg.domain_index(seeds.malicious[s0 + k]);
            results[k] = strongest_paths(adj, nd, seed_idx, cfg.assoc_floor);
        });
        for (std::size_t k = 0; k < count; ++k) {
            const auto& r = results[k];
            for (std::size_t d = 0; d < nd; ++d) {
                double v = r[d];
                if (v <= 0.0) continue;
                auto& list = assoc[d];
                auto pos = std::upper_bound(list.begin(), list.end(), v, std::greater<double>());
                if (static_cast<std::size_t>(pos - list.begin()) >= kMaxAssoc) continue;
                list.insert(pos, v);
                if (list.size() > kMaxAssoc) list.pop_back();
            }
        }
    }

    ScoreTable table;
    table.reserve(nd);
    for (std::size_t d = 0; d < nd; ++d) table[dg.domains[d]] = mal_score(assoc[d], cfg.tail_epsilon);
    return table;
}

// CSV `domain,score`, score descending then name ascending.
inline std::string scores_csv(const ScoreTable& table) {
    std::vector<std::pair<std::string, double>> rows(table.begin(), table.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string csv = "domain,score\n";
    for (const auto& [d, s] : rows) csv += d + "," + format_double(s) + "\n";
    return csv;
}

inline ScoreTable scores_from_csv(const std::string& text) {
    ScoreTable table;
    auto lines = split(text, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() < 2) throw FormatError("bad score row: " + std::string(line));
        table[std::string(trim(f[0]))] = std::stod(std::string(trim(f[1])));
    }
    return table;
}

}  // namespace dominfer
