#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dominfer/association.hpp"
#include "dominfer/parallel.hpp"
#include "dominfer/path_inference.hpp"
#include "dominfer/resolution_graph.hpp"

namespace dominfer {

// Two states everywhere: 0 = benign, 1 = malicious.
inline constexpr int kBenign = 0;
inline constexpr int kMalicious = 1;

struct BpConfig {
    double epsilon = 0.05;  // homophily strength
    double prior_malicious_seed = 0.99;
    double prior_benign_seed = 0.01;  // malicious-prior assigned to benign seeds
    double prior_unknown = 0.5;
    double convergence_eps = 1e-10;
    unsigned max_iters = 15;
    bool weight_coupling = true;  // scale epsilon by edge weight on domain graphs
    unsigned threads = 1;

    void validate() const {
        if (!(epsilon > 0 && epsilon < 0.5)) throw InputError("epsilon must lie in (0, 0.5)");
        for (double p : {prior_malicious_seed, prior_benign_seed, prior_unknown})
            if (!(p > 0 && p < 1)) throw InputError("priors must lie in (0,1)");
    }
};

// Symmetric 2x2 edge potential.
struct EdgePotential {
    double psi[2][2] = {{0.5, 0.5}, {0.5, 0.5}};

    static EdgePotential homophily(double eps) {
        EdgePotential p;
        p.psi[0][0] = p.psi[1][1] = 0.5 + eps;
        p.psi[0][1] = p.psi[1][0] = 0.5 - eps;
        return p;
    }
};

struct BpGraph {
    std::vector<std::string> names;
    std::vector<bool> is_domain;
    std::vector<std::array<double, 2>> priors;  // [benign, malicious], sums to 1

    struct Edge {
        std::uint32_t a = 0, b = 0;
        EdgePotential potential;
    };
    std::vector<Edge> edges;

    std::uint32_t add_node(std::string name, bool domain, std::array<double, 2> prior) {
        names.push_back(std::move(name));
        is_domain.push_back(domain);
        priors.push_back(prior);
        return static_cast<std::uint32_t>(names.size() - 1);
    }
};

// Messages are stored per directed edge: index 2e is a->b, 2e+1 is b->a.
struct MessageState {
    std::vector<std::array<double, 2>> messages;
    unsigned iteration = 0;
};

inline MessageState init_messages(const BpGraph& g) {
    MessageState ms;
    ms.messages.assign(g.edges.size() * 2, {0.5, 0.5});
    ms.iteration = 0;
    return ms;
}

namespace detail_bp {

// Per-node incidence, in edge order: directed indices of incoming and outgoing
// messages plus the owning edge index.
struct Incidence {
    std::vector<std::vector<std::uint32_t>> in_msg;
    std::vector<std::vector<std::uint32_t>> out_msg;
    std::vector<std::vector<std::uint32_t>> edge;
};

inline Incidence build_incidence(const BpGraph& g) {
    Incidence inc;
    inc.in_msg.resize(g.names.size());
    inc.out_msg.resize(g.names.size());
    inc.edge.resize(g.names.size());
    for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
        auto a = g.edges[e].a, b = g.edges[e].b;
        inc.out_msg[a].push_back(2 * e);      // a -> b
        inc.in_msg[a].push_back(2 * e + 1);   // b -> a
        inc.edge[a].push_back(e);
        inc.out_msg[b].push_back(2 * e + 1);  // b -> a
        inc.in_msg[b].push_back(2 * e);       // a -> b
        inc.edge[b].push_back(e);
    }
    return inc;
}

}  // namespace detail_bp

// One synchronous (Jacobi) sweep: every outgoing message is recomputed from
// the previous iteration's incoming messages. Neighbor products use running
// prefix/suffix vectors, renormalized at each step; the common scale factor
// cancels in the final per-message normalization, and per-iteration work stays
// linear in the number of directed edges. Returns the max per-entry change.
inline double bp_iterate(const BpGraph& g, const detail_bp::Incidence& inc,
                         const MessageState& prev, MessageState& next, unsigned threads) {
    const std::size_t n = g.names.size();
    std::vector<double> deltas(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto& in = inc.in_msg[i];
        const auto& out = inc.out_msg[i];
        const auto& eids = inc.edge[i];
        const std::size_t deg = in.size();
        if (deg == 0) return;

        // prefix[q] = product of incoming messages 0..q-1 (renormalized),
        // suffix[q] = product of q..deg-1.
        std::vector<std::array<double, 2>> prefix(deg + 1), suffix(deg + 1);
        prefix[0] = {1.0, 1.0};
        for (std::size_t q = 0; q < deg; ++q) {
            const auto& m = prev.messages[in[q]];
            std::array<double, 2> v = {prefix[q][0] * m[0], prefix[q][1] * m[1]};
            double s = v[0] + v[1];
            invariant(s > 0 && std::isfinite(s), "message product degenerated");
            prefix[q + 1] = {v[0] / s, v[1] / s};
        }
        suffix[deg] = {1.0, 1.0};
        for (std::size_t q = deg; q-- > 0;) {
            const auto& m = prev.messages[in[q]];
            std::array<double, 2> v = {suffix[q + 1][0] * m[0], suffix[q + 1][1] * m[1]};
            double s = v[0] + v[1];
            invariant(s > 0 && std::isfinite(s), "message product degenerated");
            suffix[q] = {v[0] / s, v[1] / s};
        }

        double local_delta = 0.0;
        for (std::size_t q = 0; q < deg; ++q) {
            const auto& psi = g.edges[eids[q]].potential.psi;
            std::array<double, 2> prod = {prefix[q][0] * suffix[q + 1][0],
                                          prefix[q][1] * suffix[q + 1][1]};
            std::array<double, 2> m{};
            for (int r = 0; r < 2; ++r) {
                double acc = 0.0;
                for (int p = 0; p < 2; ++p) acc += g.priors[i][p] * psi[p][r] * prod[p];
                m[r] = acc;
            }
            double s = m[0] + m[1];
            if (!(s > 0) || !std::isfinite(s))
                throw InvariantError("message update produced a non-finite value");
            m = {m[0] / s, m[1] / s};
            auto& slot = next.messages[out[q]];
            const auto& old = prev.messages[out[q]];
            local_delta = std::max(local_delta,
                                   std::max(std::abs(m[0] - old[0]), std::abs(m[1] - old[1])));
            slot = m;
        }
        deltas[i] = local_delta;
    });
    next.iteration = prev.iteration + 1;
    double delta = 0.0;
    for (double d : deltas) delta = std::max(delta, d);
    return delta;
}

inline double bp_iterate(const BpGraph& g, const MessageState& prev, MessageState& next,
                         unsigned threads = 1) {
    auto inc = detail_bp::build_incidence(g);
    if (next.messages.size() != prev.messages.size()) next = prev;
    return bp_iterate(g, inc, prev, next, threads);
}

struct BpResult {
    std::vector<std::array<double, 2>> beliefs;
    unsigned iterations = 0;
    bool converged = false;
};

// Iterates messages until convergence or the iteration budget; beliefs combine
// the node prior with all final incoming messages. Non-convergence is reported,
// not raised.
inline BpResult run_bp(const BpGraph& g, const BpConfig& cfg) {
    cfg.validate();
    auto inc = detail_bp::build_incidence(g);

    MessageState state = init_messages(g);
    MessageState scratch = state;
    BpResult result;
    result.converged = g.edges.empty();
    for (unsigned t = 0; t < cfg.max_iters; ++t) {
        double delta = bp_iterate(g, inc, state, scratch, cfg.threads);
        std::swap(state, scratch);
        result.iterations = state.iteration;
        if (delta < cfg.convergence_eps) {
            result.converged = true;
            break;
        }
    }

    result.beliefs.resize(g.names.size());
    parallel_for(g.names.size(), cfg.threads, [&](std::size_t i) {
        std::array<double, 2> b = {g.priors[i][0], g.priors[i][1]};
        for (auto mi : inc.in_msg[i]) {
            const auto& m = state.messages[mi];
            b = {b[0] * m[0], b[1] * m[1]};
            double s = b[0] + b[1];
            invariant(s > 0 && std::isfinite(s), "belief product degenerated");
            b = {b[0] / s, b[1] / s};
        }
        double s = b[0] + b[1];
        result.beliefs[i] = {b[0] / s, b[1] / s};
    });
    return result;
}

// ---------------------------------------------------------------------------
// graph builders
// ---------------------------------------------------------------------------

namespace detail_bp {

inline void assign_priors(BpGraph& g, const std::unordered_set<std::string>& malicious,
                          const std::unordered_set<std::string>& benign, const BpConfig& cfg) {
    std::vector<std::string> conflicts;
    for (const auto& d : malicious)
        if (benign.count(d)) conflicts.push_back(d);
    if (!conflicts.empty()) {
        std::sort(conflicts.begin(), conflicts.end());
        std::string msg = "domains appear in both seed sets:";
        for (const auto& d : conflicts) msg += " " + d;
        throw InputError(msg);
    }
    for (std::size_t i = 0; i < g.names.size(); ++i) {
        if (!g.is_domain[i]) continue;
        if (malicious.count(g.names[i]))
            g.priors[i] = {1.0 - cfg.prior_malicious_seed, cfg.prior_malicious_seed};
        else if (benign.count(g.names[i]))
            g.priors[i] = {1.0 - cfg.prior_benign_seed, cfg.prior_benign_seed};
    }
}

}  // namespace detail_bp

// Domain graph source: association weights can couple into the potentials
// (psi diagonal 0.5 + epsilon * w) or be ignored (uniform epsilon).
inline BpGraph bp_graph_from_domain_graph(const DomainGraph& dg,
                                          const std::vector<std::string>& malicious_seeds,
                                          const std::vector<std::string>& benign_seeds,
                                          const BpConfig& cfg) {
    cfg.validate();
    BpGraph g;
    g.names = dg.domains;
    g.is_domain.assign(dg.domains.size(), true);
    g.priors.assign(dg.domains.size(), {1.0 - cfg.prior_unknown, cfg.prior_unknown});
    g.edges.reserve(dg.edges.size());
    for (const auto& e : dg.edges) {
        double eps = cfg.weight_coupling ? cfg.epsilon * e.weight : cfg.epsilon;
        g.edges.push_back({e.a, e.b, EdgePotential::homophily(eps)});
    }
    detail_bp::assign_priors(g, {malicious_seeds.begin(), malicious_seeds.end()},
                             {benign_seeds.begin(), benign_seeds.end()}, cfg);
    return g;
}

// Bipartite source: IP nodes are always unknown; edges are unweighted, so the
// potential is uniform epsilon.
inline BpGraph bp_graph_from_bipartite(const ResolutionGraph& rg,
                                       const std::vector<std::string>& malicious_seeds,
                                       const std::vector<std::string>& benign_seeds,
                                       const BpConfig& cfg) {
    cfg.validate();
    BpGraph g;
    const auto nd = static_cast<std::uint32_t>(rg.domains.size());
    g.names = rg.domains;
    g.is_domain.assign(rg.domains.size(), true);
    for (auto ip : rg.ips) {
        g.names.push_back(format_ipv4(ip));
        g.is_domain.push_back(false);
    }
    g.priors.assign(g.names.size(), {1.0 - cfg.prior_unknown, cfg.prior_unknown});
    g.edges.reserve(rg.edges.size());
    auto psi = EdgePotential::homophily(cfg.epsilon);
    for (const auto& e : rg.edges) g.edges.push_back({e.domain, nd + e.ip, psi});
    detail_bp::assign_priors(g, {malicious_seeds.begin(), malicious_seeds.end()},
                             {benign_seeds.begin(), benign_seeds.end()}, cfg);
    return g;
}

// Domain rows only; score is the malicious belief.
inline ScoreTable beliefs_to_scores(const BpGraph& g, const BpResult& r) {
    ScoreTable table;
    for (std::size_t i = 0; i < g.names.size(); ++i)
        if (g.is_domain[i]) table[g.names[i]] = r.beliefs[i][kMalicious];
    return table;
}

// CSV `domain,score,converged,iterations`.
inline std::string bp_scores_csv(const BpGraph& g, const BpResult& r) {
    ScoreTable table = beliefs_to_scores(g, r);
    std::vector<std::pair<std::string, double>> rows(table.begin(), table.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string csv = "domain,score,converged,iterations\n";
    for (const auto& [d, s] : rows)
        csv += d + "," + format_double(s) + "," + (r.converged ? "true" : "false") + "," +
               std::to_string(r.iterations) + "\n";
    return csv;
}

}  // namespace dominfer
