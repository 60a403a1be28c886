#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "dominfer/ip_classifier.hpp"
#include "oracles.hpp"

using namespace dominfer;

namespace {

IpSeed seed_from(const testutil::PlantedFeatures& data, std::size_t per_class) {
    IpSeed seed;
    for (std::size_t i = 0; i < data.features.size() && (seed.public_ips.size() < per_class ||
                                                         seed.dedicated_ips.size() < per_class);
         ++i) {
        if (data.truth[i] == IpLabel::Public && seed.public_ips.size() < per_class)
            seed.public_ips.insert(data.features[i].ip);
        if (data.truth[i] == IpLabel::Dedicated && seed.dedicated_ips.size() < per_class)
            seed.dedicated_ips.insert(data.features[i].ip);
    }
    return seed;
}

}  // namespace

TEST_CASE("planted set: loop converges quickly and labels accurately") {
    auto data = testutil::planted_feature_set(42, 200);
    auto seed = seed_from(data, 6);
    ClassifierConfig cfg;
    cfg.rng_seed = 17;
    auto result = classify_ips(data.features, seed, cfg);

    CHECK(result.rounds <= 20);
    REQUIRE(result.labels.size() == data.features.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.features.size(); ++i)
        correct += result.labels.at(data.features[i].ip).label == data.truth[i];
    CHECK(double(correct) / double(data.features.size()) >= 0.98);
}

TEST_CASE("every IP ends with exactly one label and seeds are preserved") {
    auto data = testutil::planted_feature_set(43, 120);
    auto seed = seed_from(data, 5);
    ClassifierConfig cfg;
    cfg.rng_seed = 19;
    auto result = classify_ips(data.features, seed, cfg);

    for (const auto& fv : data.features) REQUIRE(result.labels.count(fv.ip) == 1);
    for (auto ip : seed.public_ips) {
        CHECK(result.labels.at(ip).label == IpLabel::Public);
        CHECK(result.labels.at(ip).round_labeled == 0);
    }
    for (auto ip : seed.dedicated_ips) {
        CHECK(result.labels.at(ip).label == IpLabel::Dedicated);
        CHECK(result.labels.at(ip).round_labeled == 0);
    }
}

TEST_CASE("identical seeds give identical label maps") {
    auto data = testutil::planted_feature_set(44, 100);
    auto seed = seed_from(data, 4);
    ClassifierConfig cfg;
    cfg.rng_seed = 23;
    cfg.threads = 4;
    auto r1 = classify_ips(data.features, seed, cfg);
    cfg.threads = 1;
    auto r2 = classify_ips(data.features, seed, cfg);
    REQUIRE(r1.labels.size() == r2.labels.size());
    for (const auto& [ip, c] : r1.labels) {
        CHECK(r2.labels.at(ip).label == c.label);
        CHECK(r2.labels.at(ip).score_public == c.score_public);
        CHECK(r2.labels.at(ip).round_labeled == c.round_labeled);
    }
}

TEST_CASE("threshold semantics: strictly above moves, at-threshold stays") {
    // Force a controlled round by using a forest-free check through the loop:
    // with 100 trees, scores land on multiples of 0.01, so exercise the rule
    // through crafted pools that yield certain votes.
    // score_public = 0.55 -> public; score_public = 0.2 -> neither side moves
    // (score_dedicated = 0.8 < 0.9) in that round.
    auto data = testutil::planted_feature_set(45, 40);
    auto seed = seed_from(data, 3);
    ClassifierConfig cfg;
    cfg.rng_seed = 29;
    auto result = classify_ips(data.features, seed, cfg);
    for (const auto& [ip, c] : result.labels) {
        if (c.round_labeled == 0) continue;
        bool final_sweep = c.round_labeled > result.rounds;
        if (c.label == IpLabel::Public && !final_sweep)
            CHECK(c.score_public > cfg.confidence_thresh_public);
        if (c.label == IpLabel::Dedicated)
            CHECK(1.0 - c.score_public > cfg.confidence_thresh_dedicated);
    }
}

TEST_CASE("missing seed class is an input error") {
    auto data = testutil::planted_feature_set(46, 30);
    IpSeed seed;
    seed.public_ips.insert(data.features[0].ip);
    CHECK_THROWS_AS(classify_ips(data.features, seed, {}), InputError);
}

TEST_CASE("seed IPs not in the graph only warn") {
    auto data = testutil::planted_feature_set(47, 60);
    auto seed = seed_from(data, 4);
    seed.public_ips.insert(*parse_ipv4("203.0.113.9"));  // absent
    std::ostringstream warn;
    ClassifierConfig cfg;
    cfg.rng_seed = 31;
    auto result = classify_ips(data.features, seed, cfg, &warn);
    CHECK(result.labels.size() == data.features.size());
    CHECK(warn.str().find("warning") != std::string::npos);
}

TEST_CASE("label CSV round-trips") {
    auto data = testutil::planted_feature_set(48, 50);
    auto seed = seed_from(data, 4);
    ClassifierConfig cfg;
    cfg.rng_seed = 37;
    auto result = classify_ips(data.features, seed, cfg);
    auto csv = ip_labels_csv(result);
    auto parsed = ip_labels_from_csv(csv);
    REQUIRE(parsed.size() == result.labels.size());
    for (const auto& [ip, c] : result.labels) {
        CHECK(parsed.at(ip).label == c.label);
        CHECK(parsed.at(ip).score_public == c.score_public);
        CHECK(parsed.at(ip).round_labeled == c.round_labeled);
    }
}
