#include <catch2/catch_amalgamated.hpp>

#include "dominfer/association.hpp"
#include "dominfer/ingest.hpp"

using namespace dominfer;

namespace {

SharedProfile profile(std::size_t n_dedicated, std::size_t n_public, std::size_t public_as) {
    SharedProfile p;
    for (std::size_t i = 0; i < n_dedicated; ++i) p.shared_dedicated.push_back(Ipv4(i + 1));
    for (std::size_t i = 0; i < n_public; ++i) p.shared_public.push_back(Ipv4(100 + i));
    p.shared_public_as_count = public_as;
    return p;
}

struct Fixture {
    ResolutionGraph graph;
    std::unordered_map<Ipv4, IpClassification> labels;
    AsMap as_map;
};

// 6 domains / 5 IPs, 2 dedicated + 3 public across 2 public ASs.
Fixture fig2_fixture() {
    Fixture fx;
    auto add = [&](std::vector<ResolutionRecord>& r, const char* d, const char* ip) {
        r.push_back({*parse_date("2017-02-05"), d, *parse_ipv4(ip)});
    };
    std::vector<ResolutionRecord> records;
    for (const char* ip : {"10.0.0.1", "20.0.0.1", "30.0.0.1"}) add(records, "d1", ip);
    add(records, "d2", "10.0.0.1");
    add(records, "d3", "10.0.0.9");
    for (const char* ip : {"10.0.0.1", "20.0.0.1", "30.0.0.1"}) add(records, "d4", ip);
    add(records, "d5", "30.0.0.2");
    add(records, "d6", "30.0.0.1");
    add(records, "d6", "30.0.0.2");
    fx.graph = build_resolution_graph(records);

    auto dedicated = [&](const char* ip) {
        fx.labels[*parse_ipv4(ip)] = {IpLabel::Dedicated, 0.0, 0};
    };
    auto public_ip = [&](const char* ip) {
        fx.labels[*parse_ipv4(ip)] = {IpLabel::Public, 1.0, 0};
    };
    dedicated("10.0.0.1");
    dedicated("10.0.0.9");
    public_ip("20.0.0.1");
    public_ip("30.0.0.1");
    public_ip("30.0.0.2");

    fx.as_map.add(*parse_cidr("10.0.0.0/24"), 65003);
    fx.as_map.add(*parse_cidr("20.0.0.0/24"), 65001);
    fx.as_map.add(*parse_cidr("30.0.0.0/24"), 65002);
    return fx;
}

double weight_of(const DomainGraph& dg, const char* a, const char* b) {
    auto ia = dg.domain_index(a), ib = dg.domain_index(b);
    if (ia > ib) std::swap(ia, ib);
    for (const auto& e : dg.edges)
        if (e.a == ia && e.b == ib) return e.weight;
    return -1.0;  // absent
}

}  // namespace

TEST_CASE("new-scheme weights: hand-evaluated cases") {
    // one dedicated, nothing public
    auto w1 = pair_weight_new(profile(1, 0, 0));
    REQUIRE(w1.has_value());
    CHECK(*w1 == 1.0 - 1.0 / 2.0);

    // two public IPs in two ASs
    auto w2 = pair_weight_new(profile(0, 2, 2));
    REQUIRE(w2.has_value());
    CHECK(*w2 == 1.0 - 1.0 / 2.0);

    // three public IPs all in one AS: public rule fails
    CHECK_FALSE(pair_weight_new(profile(0, 3, 1)).has_value());

    // two dedicated + two public ASs: n = 5
    auto w3 = pair_weight_new(profile(2, 2, 2));
    REQUIRE(w3.has_value());
    CHECK(*w3 == 1.0 - 1.0 / 6.0);

    // one shared public IP alone is never enough
    CHECK_FALSE(pair_weight_new(profile(0, 1, 1)).has_value());
}

TEST_CASE("relaxed-scheme weights: hand-evaluated cases") {
    // worked example: 2 shared subnets, sides hold 3 and 2 dedicated IPs there
    SharedProfile p;
    p.shared_subnet_count = 2;
    p.d1_dedicated_in_shared = 3;
    p.d2_dedicated_in_shared = 2;
    auto w = pair_weight_relaxed(p);
    REQUIRE(w.has_value());
    CHECK(*w == 1.0 - 1.0 / 5.0);

    // nothing shared
    CHECK_FALSE(pair_weight_relaxed(SharedProfile{}).has_value());

    // the same dedicated IP shared: one subnet, one IP per side
    SharedProfile q;
    q.shared_dedicated.push_back(Ipv4(1));
    q.shared_subnet_count = 1;
    q.d1_dedicated_in_shared = 1;
    q.d2_dedicated_in_shared = 1;
    auto w2 = pair_weight_relaxed(q);
    REQUIRE(w2.has_value());
    CHECK(*w2 == 1.0 - 1.0 / 2.0);
}

TEST_CASE("relaxed worked example computed from an actual graph") {
    // d1 -> ip1,ip2 (subnet1), ip3 (subnet2), ip4 (subnet3); d2 -> ip2 (subnet1), ip5 (subnet2)
    std::vector<ResolutionRecord> records;
    auto add = [&](const char* d, const char* ip) {
        records.push_back({*parse_date("2017-02-05"), d, *parse_ipv4(ip)});
    };
    add("d1", "10.1.1.1");
    add("d1", "10.1.1.2");
    add("d1", "10.1.2.1");
    add("d1", "10.1.3.1");
    add("d2", "10.1.1.2");
    add("d2", "10.1.2.2");
    auto g = build_resolution_graph(records);
    std::unordered_map<Ipv4, IpClassification> labels;
    for (auto ip : g.ips) labels[ip] = {IpLabel::Dedicated, 0.0, 0};
    AsMap as_map;

    auto p = shared_profile(g, labels, as_map, "d1", "d2");
    CHECK(p.shared_subnet_count == 2);
    CHECK(p.d1_dedicated_in_shared == 3);
    CHECK(p.d2_dedicated_in_shared == 2);
    auto w = pair_weight_relaxed(p);
    REQUIRE(w.has_value());
    CHECK(*w == 1.0 - 1.0 / 5.0);
}

TEST_CASE("baseline weights: hand-evaluated cases") {
    AsMap as_map;
    as_map.add(*parse_cidr("1.0.0.0/24"), 1);
    as_map.add(*parse_cidr("2.0.0.0/24"), 2);
    as_map.add(*parse_cidr("3.0.0.0/24"), 3);
    as_map.add(*parse_cidr("4.0.0.0/24"), 4);

    auto with_ips = [&](std::vector<const char*> ips) {
        SharedProfile p;
        for (auto* s : ips) p.shared_public.push_back(*parse_ipv4(s));
        return p;
    };

    // two ASs
    auto w1 = pair_weight_baseline(with_ips({"1.0.0.1", "2.0.0.1"}), as_map);
    REQUIRE(w1.has_value());
    CHECK(*w1 == 1.0 - 1.0 / 2.0);

    // one AS only
    CHECK_FALSE(pair_weight_baseline(with_ips({"1.0.0.1", "1.0.0.2", "1.0.0.3"}), as_map).has_value());

    // four ASs
    auto w2 = pair_weight_baseline(with_ips({"1.0.0.1", "2.0.0.1", "3.0.0.1", "4.0.0.1"}), as_map);
    REQUIRE(w2.has_value());
    CHECK(*w2 == 1.0 - 1.0 / 4.0);

    // unknown-AS IPs never add diversity
    AsMap partial;
    partial.add(*parse_cidr("1.0.0.0/24"), 1);
    CHECK_FALSE(pair_weight_baseline(with_ips({"1.0.0.1", "9.9.9.9"}), partial).has_value());
}

TEST_CASE("three schemes on the six-domain fixture") {
    auto fx = fig2_fixture();
    auto g_new = build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::New);
    auto g_base = build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::Baseline);
    auto g_relaxed = build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::Relaxed);

    // hand-enumerated edges (all 15 pairs checked through the pair oracles)
    CHECK(g_new.edges.size() == 3);
    CHECK(weight_of(g_new, "d1", "d2") == 0.5);
    CHECK(weight_of(g_new, "d1", "d4") == 1.0 - 1.0 / 4.0);
    CHECK(weight_of(g_new, "d2", "d4") == 0.5);

    CHECK(g_base.edges.size() == 1);
    CHECK(weight_of(g_base, "d1", "d4") == 1.0 - 1.0 / 3.0);

    CHECK(g_relaxed.edges.size() == 6);
    CHECK(weight_of(g_relaxed, "d1", "d2") == 0.5);
    CHECK(weight_of(g_relaxed, "d1", "d3") == 0.5);
    CHECK(weight_of(g_relaxed, "d2", "d3") == 0.5);
    CHECK(weight_of(g_relaxed, "d1", "d4") == 1.0 - 1.0 / 4.0);
    CHECK(weight_of(g_relaxed, "d2", "d4") == 0.5);
    CHECK(weight_of(g_relaxed, "d3", "d4") == 0.5);

    // weighted edge sets are pairwise distinct, baseline disagrees with new on (d1,d4)
    CHECK(weight_of(g_base, "d1", "d4") != weight_of(g_new, "d1", "d4"));

    // node coverage ordering is strict on this fixture
    CHECK(g_base.covered_domains() == 2);
    CHECK(g_new.covered_domains() == 3);
    CHECK(g_relaxed.covered_domains() == 4);

    // relaxed covers every new-dedicated association
    for (const auto& e : g_new.edges) {
        auto p = shared_profile(fx.graph, fx.labels, fx.as_map, g_new.domains[e.a], g_new.domains[e.b]);
        if (!p.shared_dedicated.empty()) CHECK(weight_of(g_relaxed, g_new.domains[e.a].c_str(),
                                                         g_new.domains[e.b].c_str()) > 0);
    }
}

TEST_CASE("empty resolution graph gives an empty domain graph") {
    ResolutionGraph g;
    g.window = {*parse_date("2017-02-04"), *parse_date("2017-02-10")};
    auto dg = build_domain_graph(g, {}, AsMap{}, Scheme::New);
    CHECK(dg.edges.empty());
    CHECK(dg.covered_domains() == 0);
}

TEST_CASE("missing label under the new scheme is a hard error") {
    auto fx = fig2_fixture();
    fx.labels.erase(*parse_ipv4("30.0.0.2"));
    CHECK_THROWS_AS(build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::New), InputError);
    // but baseline ignores labels
    CHECK_NOTHROW(build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::Baseline));
}

TEST_CASE("weights stay in [0.5, 1) and are symmetric by construction") {
    auto fx = fig2_fixture();
    for (auto scheme : {Scheme::Baseline, Scheme::New, Scheme::Relaxed}) {
        auto dg = build_domain_graph(fx.graph, fx.labels, fx.as_map, scheme);
        for (const auto& e : dg.edges) {
            CHECK(e.weight >= 0.5);
            CHECK(e.weight < 1.0);
            CHECK(e.a < e.b);
            // symmetry: profile in either order gives the same weight
            auto p1 = shared_profile(fx.graph, fx.labels, fx.as_map, dg.domains[e.a], dg.domains[e.b]);
            auto p2 = shared_profile(fx.graph, fx.labels, fx.as_map, dg.domains[e.b], dg.domains[e.a]);
            if (scheme == Scheme::New) CHECK(pair_weight_new(p1) == pair_weight_new(p2));
            if (scheme == Scheme::Relaxed) CHECK(pair_weight_relaxed(p1) == pair_weight_relaxed(p2));
            if (scheme == Scheme::Baseline)
                CHECK(pair_weight_baseline(p1, fx.as_map) == pair_weight_baseline(p2, fx.as_map));
        }
    }
}

TEST_CASE("adding a shared dedicated IP never weakens the association") {
    for (std::size_t ded = 1; ded < 20; ++ded) {
        for (std::size_t as : {std::size_t(0), std::size_t(2), std::size_t(5)}) {
            auto base = pair_weight_new(profile(ded, as >= 2 ? as : 0, as));
            auto more = pair_weight_new(profile(ded + 1, as >= 2 ? as : 0, as));
            REQUIRE(base.has_value());
            REQUIRE(more.has_value());
            CHECK(*more >= *base);
        }
    }
}

TEST_CASE("induced bipartite keeps exactly the covered domains") {
    auto fx = fig2_fixture();
    auto dg = build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::New);
    auto bg = build_induced_bipartite(fx.graph, dg);

    // d1, d2, d4 covered; d3, d5, d6 dropped with all their edges
    CHECK(bg.domains == std::vector<std::string>{"d1", "d2", "d4"});
    CHECK(bg.edges.size() <= fx.graph.edges.size());
    for (const auto& e : bg.edges) CHECK(bg.domains[e.domain].front() == 'd');

    // full-coverage domain graph reproduces the source graph
    DomainGraph full;
    full.domains = fx.graph.domains;
    full.window = fx.graph.window;
    for (std::uint32_t i = 1; i < full.domains.size(); ++i) full.edges.push_back({0, i, 0.5});
    auto bg_full = build_induced_bipartite(fx.graph, full);
    CHECK(graph_to_json(bg_full).dump() == graph_to_json(fx.graph).dump());
}

TEST_CASE("domain graph CSV and sidecar round-trip") {
    auto fx = fig2_fixture();
    auto dg = build_domain_graph(fx.graph, fx.labels, fx.as_map, Scheme::New);
    auto csv = domain_graph_csv(dg);
    auto meta = domain_graph_meta(dg);
    auto parsed = domain_graph_from_files(csv, meta);
    CHECK(parsed.scheme == dg.scheme);
    CHECK(parsed.domains == dg.domains);
    REQUIRE(parsed.edges.size() == dg.edges.size());
    for (std::size_t i = 0; i < dg.edges.size(); ++i) {
        CHECK(parsed.edges[i].a == dg.edges[i].a);
        CHECK(parsed.edges[i].b == dg.edges[i].b);
        CHECK(parsed.edges[i].weight == dg.edges[i].weight);
    }
}
