#include <set>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "dominfer/path_inference.hpp"
#include "oracles.hpp"

using namespace dominfer;

namespace {

DomainGraph chain_graph(const std::vector<std::tuple<const char*, const char*, double>>& edges) {
    std::set<std::string> names;
    for (const auto& [a, b, w] : edges) {
        names.insert(a);
        names.insert(b);
    }
    DomainGraph dg;
    dg.domains.assign(names.begin(), names.end());
    for (const auto& [a, b, w] : edges) {
        auto ia = dg.domain_index(a), ib = dg.domain_index(b);
        dg.edges.push_back({std::min(ia, ib), std::max(ia, ib), w});
    }
    return dg;
}

}  // namespace

TEST_CASE("single edge association") {
    auto dg = chain_graph({{"s", "u", 0.5}});
    auto assoc = strongest_paths(dg, dg.domain_index("s"));
    CHECK(assoc[dg.domain_index("u")] == 0.5);
    CHECK(assoc[dg.domain_index("s")] == 1.0);
}

TEST_CASE("longer-but-stronger route wins") {
    auto dg = chain_graph({{"s", "x", 0.9}, {"x", "u", 0.9}, {"s", "u", 0.5}});
    auto assoc = strongest_paths(dg, dg.domain_index("s"));
    CHECK(assoc[dg.domain_index("u")] == Catch::Approx(0.81).epsilon(1e-12));
}

TEST_CASE("disconnected node has zero association") {
    auto dg = chain_graph({{"s", "u", 0.5}});
    dg.domains.push_back("zzz-island");  // isolated node appended in sorted position
    std::sort(dg.domains.begin(), dg.domains.end());
    auto dg2 = chain_graph({{"s", "u", 0.5}});
    dg2.domains = dg.domains;
    dg2.edges.clear();
    dg2.edges.push_back({dg2.domain_index("s"), dg2.domain_index("u"), 0.5});
    if (dg2.edges[0].a > dg2.edges[0].b) std::swap(dg2.edges[0].a, dg2.edges[0].b);
    auto assoc = strongest_paths(dg2, dg2.domain_index("s"));
    CHECK(assoc[dg2.domain_index("zzz-island")] == 0.0);
}

TEST_CASE("matches exhaustive path enumeration on random graphs") {
    std::mt19937_64 rng(555);
    constexpr double floor = 1e-6;
    for (int trial = 0; trial < 60; ++trial) {
        auto g = testutil::random_connected_graph(rng, 10);
        std::vector<std::vector<std::pair<std::uint32_t, double>>> adj = g.adj;
        for (std::uint32_t s = 0; s < g.n; ++s) {
            auto fast = strongest_paths(adj, g.n, s, floor);
            auto slow = testutil::strongest_paths_oracle(g, s, floor);
            for (std::size_t v = 0; v < g.n; ++v)
                CHECK(fast[v] == Catch::Approx(slow[v]).margin(1e-12));
        }
    }
}

TEST_CASE("decay scoring: hand-evaluated vectors") {
    // saturated head
    std::vector<double> m1 = {1.0, 0.7};
    CHECK(mal_score(m1) == 1.0);

    std::vector<double> m2 = {0.5, 0.5};
    CHECK(mal_score(m2) == 0.5 + (1.0 - 0.5) * (0.5 * 0.5));
    CHECK(mal_score(m2) == 0.625);

    std::vector<double> m3 = {0.8, 0.4, 0.2};
    CHECK(mal_score(m3) == 0.8 + (1.0 - 0.8) * (0.5 * 0.4 + 0.25 * 0.2));

    CHECK(mal_score(std::vector<double>{}) == 0.0);

    std::vector<double> m4 = {0.9};
    CHECK(mal_score(m4) == 0.9);

    std::vector<double> m5 = {0.6, 0.6, 0.6, 0.6};
    CHECK(mal_score(m5) == 0.6 + (1.0 - 0.6) * (0.5 * 0.6 + 0.25 * 0.6 + 0.125 * 0.6));
}

TEST_CASE("unsorted association lists are rejected") {
    std::vector<double> bad = {0.4, 0.9};
    CHECK_THROWS_AS(mal_score(bad), InvariantError);
}

TEST_CASE("decay scoring properties") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(1, 12);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> m(len(rng));
        for (auto& v : m) v = val(rng);
        std::sort(m.rbegin(), m.rend());
        double base = mal_score(m);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
        // appending evidence never decreases the score
        auto extended = m;
        extended.push_back(val(rng) * m.back());  // stays <= current minimum
        CHECK(mal_score(extended) >= base - 1e-15);
        // raising one entry (and re-sorting) never decreases the score
        auto raised = m;
        std::uniform_int_distribution<std::size_t> pick(0, raised.size() - 1);
        auto idx = pick(rng);
        raised[idx] = std::min(1.0, raised[idx] + val(rng));
        std::sort(raised.rbegin(), raised.rend());
        CHECK(mal_score(raised) >= base - 1e-12);
        // score hits 1 exactly when the strongest association is 1
        if (m[0] < 1.0) CHECK(base < 1.0);
    }
}

TEST_CASE("weak evidence does not accumulate past the decay cap") {
    // many weak seeds: tail sum is bounded by the geometric series
    std::vector<double> m(40, 0.2);
    double score = mal_score(m);
    CHECK(score < 0.2 + 0.8 * 0.2);  // < s1 + (1-s1)*sum(1/2^i)*0.2 ... strictly under headroom
    CHECK(score < 1.0);
}

TEST_CASE("score_all composes searches and decay scoring") {
    auto dg = chain_graph({{"s1", "u", 0.5}, {"s2", "u", 0.5}, {"v", "u", 0.9}});
    SeedSet seeds;
    seeds.malicious = {"s1", "s2"};
    auto table = score_all(dg, seeds);

    // u: M = [0.5, 0.5] -> 0.625
    CHECK(table.at("u") == Catch::Approx(0.625).margin(1e-15));
    // seeds score 1 via self-association
    CHECK(table.at("s1") == 1.0);
    CHECK(table.at("s2") == 1.0);
    // v reachable through u: assoc = 0.45 per seed
    CHECK(table.at("v") == Catch::Approx(0.45 + (1 - 0.45) * 0.5 * 0.45).margin(1e-12));
}

TEST_CASE("domains with no path to any seed score zero") {
    auto dg = chain_graph({{"s", "u", 0.5}, {"a", "b", 0.9}});
    SeedSet seeds;
    seeds.malicious = {"s"};
    auto table = score_all(dg, seeds);
    CHECK(table.at("a") == 0.0);
    CHECK(table.at("b") == 0.0);
}

TEST_CASE("empty effective seed set is an error") {
    auto dg = chain_graph({{"a", "b", 0.5}});
    SeedSet empty;
    CHECK_THROWS_AS(score_all(dg, empty), InputError);

    // seeds outside the graph are skipped with a warning
    std::ostringstream warn;
    auto seeds = SeedSet::from_domains({"nope"}, dg, &warn);
    CHECK(seeds.malicious.empty());
    CHECK(warn.str().find("warning") != std::string::npos);
}

TEST_CASE("score CSV ordering and round-trip") {
    auto dg = chain_graph({{"s", "u", 0.5}, {"u", "v", 0.5}});
    SeedSet seeds;
    seeds.malicious = {"s"};
    auto table = score_all(dg, seeds);
    auto csv = scores_csv(table);
    auto first_data_line = csv.substr(csv.find('\n') + 1);
    CHECK(first_data_line.substr(0, 2) == "s,");  // highest score first
    auto parsed = scores_from_csv(csv);
    REQUIRE(parsed.size() == table.size());
    for (const auto& [d, s] : table) CHECK(parsed.at(d) == s);
}
