#pragma once

#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include <nlohmann/json.hpp>

#include "dominfer/resolution_graph.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

// ---------------------------------------------------------------------------
// record parsing
// ---------------------------------------------------------------------------

struct ParseOptions {
    char delimiter = ',';  // '\t' for the TSV variant
};

struct ParseStats {
    std::size_t data_lines = 0;
    std::size_t parsed = 0;
    std::size_t malformed = 0;
    std::size_t out_of_window = 0;
    std::size_t ipv6_skipped = 0;
};

// Hostname per RFC-ish rules: labels 1-63 chars, total length <= 253.
// Underscores are tolerated; real DNS zones contain them.
inline bool valid_hostname(std::string_view name) {
    if (name.empty() || name.size() > 253) return false;
    std::size_t label_len = 0;
    for (char c : name) {
        if (c == '.') {
            if (label_len == 0 || label_len > 63) return false;
            label_len = 0;
            continue;
        }
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) return false;
        ++label_len;
    }
    return label_len >= 1 && label_len <= 63;
}

// Lowercase, strip one trailing dot. Returns empty string when invalid.
inline std::string normalize_domain(std::string_view raw) {
    std::string d = to_lower(trim(raw));
    if (!d.empty() && d.back() == '.') d.pop_back();
    if (!valid_hostname(d)) return {};
    return d;
}

inline std::vector<ResolutionRecord> parse_records(std::istream& in, DateRange window,
                                                   ParseStats* stats_out = nullptr,
                                                   ParseOptions opts = {}) {
    if (!in) throw IoError("record stream unreadable");
    if (window.empty()) throw InputError("record window is empty");

    std::string line;
    if (!std::getline(in, line)) {
        if (in.bad()) throw IoError("record stream unreadable");
        throw FormatError("record stream is empty (expected `date,domain,ip` header)");
    }
    {
        auto t = to_lower(trim(line));
        std::string expected = std::string("date") + opts.delimiter + "domain" + opts.delimiter + "ip";
        if (t != expected)
            throw FormatError("record stream missing `date,domain,ip` header (got: " + std::string(trim(line)) + ")");
    }

    ParseStats stats;
    std::vector<ResolutionRecord> records;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        ++stats.data_lines;
        auto fields = split(sv, opts.delimiter);
        if (fields.size() != 3) {
            ++stats.malformed;
            continue;
        }
        auto date = parse_date(trim(fields[0]));
        if (!date) {
            ++stats.malformed;
            continue;
        }
        std::string domain = normalize_domain(fields[1]);
        if (domain.empty()) {
            ++stats.malformed;
            continue;
        }
        auto ip_field = trim(fields[2]);
        if (ip_field.find(':') != std::string_view::npos) {
            ++stats.ipv6_skipped;
            continue;
        }
        auto ip = parse_ipv4(ip_field);
        if (!ip) {
            ++stats.malformed;
            continue;
        }
        if (!window.contains(*date)) {
            ++stats.out_of_window;
            continue;
        }
        records.push_back({*date, std::move(domain), *ip});
        ++stats.parsed;
    }
    if (in.bad()) throw IoError("record stream read failure");

    if (stats.data_lines > 0 && 2 * stats.malformed > stats.data_lines)
        throw FormatError("more than 50% of lines malformed (" + std::to_string(stats.malformed) + "/" +
                          std::to_string(stats.data_lines) + "); wrong input file?");
    if (stats_out) *stats_out = stats;
    return records;
}

inline std::string read_maybe_gzip(const std::string& path) {
    bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (!gz) return read_text_file(path);
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open file: " + path);
    std::string out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    bool bad = n < 0;
    gzclose(f);
    if (bad) throw IoError("gzip read failure: " + path);
    return out;
}

inline std::vector<ResolutionRecord> parse_records_file(const std::string& path, DateRange window,
                                                        ParseStats* stats = nullptr, ParseOptions opts = {}) {
    std::istringstream in(read_maybe_gzip(path));
    return parse_records(in, window, stats, opts);
}

// ---------------------------------------------------------------------------
// graph construction
// ---------------------------------------------------------------------------

inline ResolutionGraph build_resolution_graph(const std::vector<ResolutionRecord>& records) {
    if (records.empty()) throw InputError("no resolution records to build a graph from");

    ResolutionGraph g;
    g.domains.reserve(records.size());
    g.ips.reserve(records.size());
    for (const auto& r : records) {
        g.domains.push_back(r.domain);
        g.ips.push_back(r.ip);
    }
    std::sort(g.domains.begin(), g.domains.end());
    g.domains.erase(std::unique(g.domains.begin(), g.domains.end()), g.domains.end());
    std::sort(g.ips.begin(), g.ips.end());
    g.ips.erase(std::unique(g.ips.begin(), g.ips.end()), g.ips.end());

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, int>> seen;
    int lo = records.front().date, hi = records.front().date;
    for (const auto& r : records) {
        auto di = static_cast<std::uint32_t>(
            std::lower_bound(g.domains.begin(), g.domains.end(), r.domain) - g.domains.begin());
        auto ii = static_cast<std::uint32_t>(
            std::lower_bound(g.ips.begin(), g.ips.end(), r.ip) - g.ips.begin());
        auto [it, inserted] = seen.try_emplace({di, ii}, r.date, r.date);
        if (!inserted) {
            it->second.first = std::min(it->second.first, r.date);
            it->second.second = std::max(it->second.second, r.date);
        }
        lo = std::min(lo, r.date);
        hi = std::max(hi, r.date);
    }
    g.edges.reserve(seen.size());
    for (const auto& [key, dates] : seen)
        g.edges.push_back({key.first, key.second, dates.first, dates.second});
    g.window = {lo, hi};
    return g;
}

// ---------------------------------------------------------------------------
// popularity filter
// ---------------------------------------------------------------------------

struct FilterResult {
    ResolutionGraph graph;
    std::size_t removed_ips = 0;
};

// Drops IPs hosting more than t domains; orphaned domains stay as isolated
// nodes so downstream coverage statistics keep a stable denominator.
inline FilterResult filter_popular_ips(const ResolutionGraph& g, std::size_t t) {
    if (t < 1) throw InputError("popularity threshold must be >= 1");
    auto deg = g.ip_degrees();

    FilterResult out;
    out.graph.domains = g.domains;
    out.graph.window = g.window;
    std::vector<std::uint32_t> ip_remap(g.ips.size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < g.ips.size(); ++i) {
        if (deg[i] > t) {
            ++out.removed_ips;
            continue;
        }
        ip_remap[i] = static_cast<std::uint32_t>(out.graph.ips.size());
        out.graph.ips.push_back(g.ips[i]);
    }
    out.graph.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        if (ip_remap[e.ip] == UINT32_MAX) continue;
        out.graph.edges.push_back({e.domain, ip_remap[e.ip], e.first_seen, e.last_seen});
    }
    return out;
}

// ---------------------------------------------------------------------------
// connected components
// ---------------------------------------------------------------------------

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace detail

// Fragments are ordered by node count descending, ties by smallest node label,
// so component ids are reproducible.
inline ComponentPartition connected_components(const ResolutionGraph& g) {
    const std::size_t nd = g.domains.size(), ni = g.ips.size();
    detail::UnionFind uf(nd + ni);
    for (const auto& e : g.edges) uf.unite(e.domain, static_cast<std::uint32_t>(nd + e.ip));

    // roots -> provisional component index
    std::map<std::uint32_t, std::uint32_t> root_to_comp;
    std::vector<std::uint32_t> node_comp(nd + ni);
    for (std::uint32_t v = 0; v < nd + ni; ++v) {
        auto r = uf.find(v);
        auto [it, inserted] = root_to_comp.try_emplace(r, static_cast<std::uint32_t>(root_to_comp.size()));
        node_comp[v] = it->second;
    }
    const std::size_t ncomp = root_to_comp.size();

    std::vector<std::size_t> sizes(ncomp, 0);
    std::vector<std::string> min_label(ncomp);
    for (std::uint32_t v = 0; v < nd + ni; ++v) {
        auto c = node_comp[v];
        ++sizes[c];
        std::string label = v < nd ? g.domains[v] : format_ipv4(g.ips[v - nd]);
        if (min_label[c].empty() || label < min_label[c]) min_label[c] = std::move(label);
    }

    std::vector<std::uint32_t> order(ncomp);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return min_label[a] < min_label[b];
    });
    std::vector<std::uint32_t> rank(ncomp);
    for (std::uint32_t i = 0; i < ncomp; ++i) rank[order[i]] = i;

    ComponentPartition part;
    part.components.resize(ncomp);
    part.domain_component.resize(nd);
    part.ip_component.resize(ni);

    std::vector<std::uint32_t> domain_remap(nd), ip_remap(ni);
    for (std::uint32_t d = 0; d < nd; ++d) {
        auto c = rank[node_comp[d]];
        part.domain_component[d] = c;
        auto& frag = part.components[c];
        domain_remap[d] = static_cast<std::uint32_t>(frag.domains.size());
        frag.domains.push_back(g.domains[d]);
    }
    for (std::uint32_t i = 0; i < ni; ++i) {
        auto c = rank[node_comp[nd + i]];
        part.ip_component[i] = c;
        auto& frag = part.components[c];
        ip_remap[i] = static_cast<std::uint32_t>(frag.ips.size());
        frag.ips.push_back(g.ips[i]);
    }
    for (const auto& e : g.edges) {
        auto c = rank[node_comp[e.domain]];
        part.components[c].edges.push_back({domain_remap[e.domain], ip_remap[e.ip], e.first_seen, e.last_seen});
    }
    for (auto& frag : part.components) frag.window = g.window;
    return part;
}

// ---------------------------------------------------------------------------
// degree histogram (IP side), plot-ready
// ---------------------------------------------------------------------------

inline std::vector<std::pair<std::size_t, std::size_t>> degree_histogram(const ResolutionGraph& g) {
    std::map<std::size_t, std::size_t> counts;
    for (auto d : g.ip_degrees()) ++counts[d];
    std::vector<std::pair<std::size_t, std::size_t>> out(counts.rbegin(), counts.rend());
    return out;
}

inline std::string degree_histogram_csv(const ResolutionGraph& g) {
    std::string csv = "degree,count\n";
    for (auto [deg, cnt] : degree_histogram(g))
        csv += std::to_string(deg) + "," + std::to_string(cnt) + "\n";
    return csv;
}

// ---------------------------------------------------------------------------
// snapshot serialization (stable field ordering)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json graph_to_json(const ResolutionGraph& g,
                                            const ComponentPartition* parts = nullptr) {
    nlohmann::ordered_json j;
    j["type"] = "resolution_graph";
    j["window"] = {{"start", format_date(g.window.first)}, {"end", format_date(g.window.last)}};
    j["domains"] = g.domains;
    nlohmann::ordered_json ips = nlohmann::ordered_json::array();
    for (auto ip : g.ips) ips.push_back(format_ipv4(ip));
    j["ips"] = std::move(ips);
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges)
        edges.push_back({e.domain, e.ip, format_date(e.first_seen), format_date(e.last_seen)});
    j["edges"] = std::move(edges);
    if (parts) {
        j["components"] = {{"count", parts->components.size()},
                           {"domain_component", parts->domain_component},
                           {"ip_component", parts->ip_component}};
    }
    return j;
}

inline ResolutionGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("type", "") != std::string("resolution_graph"))
        throw FormatError("not a resolution graph snapshot");
    ResolutionGraph g;
    auto start = parse_date(j.at("window").at("start").get<std::string>());
    auto end = parse_date(j.at("window").at("end").get<std::string>());
    if (!start || !end) throw FormatError("snapshot has malformed window dates");
    g.window = {*start, *end};
    g.domains = j.at("domains").get<std::vector<std::string>>();
    for (const auto& s : j.at("ips")) {
        auto ip = parse_ipv4(s.get<std::string>());
        if (!ip) throw FormatError("snapshot has malformed IP: " + s.get<std::string>());
        g.ips.push_back(*ip);
    }
    for (const auto& e : j.at("edges")) {
        auto fs = parse_date(e.at(2).get<std::string>());
        auto ls = parse_date(e.at(3).get<std::string>());
        if (!fs || !ls) throw FormatError("snapshot has malformed edge dates");
        g.edges.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(), *fs, *ls});
        if (g.edges.back().domain >= g.domains.size() || g.edges.back().ip >= g.ips.size())
            throw FormatError("snapshot edge endpoint out of range");
    }
    return g;
}

inline void write_graph_snapshot(const std::string& path, const ResolutionGraph& g,
                                 const ComponentPartition* parts = nullptr) {
    write_text_file(path, graph_to_json(g, parts).dump(2) + "\n");
}

inline ResolutionGraph read_graph_snapshot(const std::string& path) {
    return graph_from_json(nlohmann::json::parse(read_text_file(path)));
}

}  // namespace dominfer
