#pragma once

#include <iostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dominfer/ip_features.hpp"
#include "dominfer/random_forest.hpp"

namespace dominfer {

enum class IpLabel { Public, Dedicated };

inline const char* to_string(IpLabel l) { return l == IpLabel::Public ? "public" : "dedicated"; }

struct IpClassification {
    IpLabel label = IpLabel::Public;
    double score_public = 0.0;
    unsigned round_labeled = 0;  // 0 = seed
};

struct IpSeed {
    std::set<Ipv4> public_ips;
    std::set<Ipv4> dedicated_ips;

    static IpSeed from_files(const std::string& public_path, const std::string& dedicated_path) {
        IpSeed s;
        for (const auto& line : read_list_file(public_path)) {
            auto ip = parse_ipv4(line);
            if (!ip) throw FormatError("bad IP in seed file " + public_path + ": " + line);
            s.public_ips.insert(*ip);
        }
        for (const auto& line : read_list_file(dedicated_path)) {
            auto ip = parse_ipv4(line);
            if (!ip) throw FormatError("bad IP in seed file " + dedicated_path + ": " + line);
            s.dedicated_ips.insert(*ip);
        }
        for (auto ip : s.public_ips)
            if (s.dedicated_ips.count(ip))
                throw InputError("IP in both seed files: " + format_ipv4(ip));
        return s;
    }
};

struct ClassifierConfig {
    double confidence_thresh_public = 0.5;
    double confidence_thresh_dedicated = 0.9;
    int subnet_prefix_len = 24;
    unsigned n_trees = 100;
    unsigned max_depth = 0;
    std::uint64_t rng_seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (!(confidence_thresh_public > 0 && confidence_thresh_public < 1) ||
            !(confidence_thresh_dedicated > 0 && confidence_thresh_dedicated < 1))
            throw InputError("confidence thresholds must lie in (0,1)");
        if (subnet_prefix_len < 12 || subnet_prefix_len > 30)
            throw InputError("subnet prefix length must be in [12,30]");
    }
};

// Thin adapter over RandomForest for the 7-attribute vectors; class 1 = public.
inline RandomForest train_forest(const std::vector<IpFeatureVector>& features,
                                 const std::vector<IpLabel>& labels, const ClassifierConfig& cfg) {
    std::size_t n_public = 0, n_dedicated = 0;
    for (auto l : labels) (l == IpLabel::Public ? n_public : n_dedicated)++;
    if (n_public < 2) throw InputError("training pool needs at least 2 public examples");
    if (n_dedicated < 2) throw InputError("training pool needs at least 2 dedicated examples");

    std::vector<std::vector<double>> rows;
    rows.reserve(features.size());
    std::vector<int> y;
    y.reserve(labels.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto r = features[i].as_row();
        rows.emplace_back(r.begin(), r.end());
        y.push_back(labels[i] == IpLabel::Public ? 1 : 0);
    }
    ForestConfig fc;
    fc.n_trees = cfg.n_trees;
    fc.max_depth = cfg.max_depth;
    fc.rng_seed = cfg.rng_seed;
    fc.threads = cfg.threads;
    return RandomForest::train(rows, y, fc);
}

inline std::vector<std::pair<std::string, double>> attribute_importance(const RandomForest& model) {
    const auto& imp = model.feature_importances();
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t f = 0; f < imp.size(); ++f)
        out.emplace_back(f < kIpAttributeNames.size() ? kIpAttributeNames[f] : "f" + std::to_string(f),
                         imp[f]);
    return out;
}

struct ClassifyResult {
    std::unordered_map<Ipv4, IpClassification> labels;
    unsigned rounds = 0;  // training rounds executed before convergence
};

// Iterative semi-supervised loop: each round trains on the current labeled
// pool, predicts the still-unlabeled IPs and promotes the confident ones.
// Strictly-above-threshold moves only; whatever is left unlabeled once the
// pool stops growing is assigned public.
inline ClassifyResult classify_ips(const std::vector<IpFeatureVector>& features, const IpSeed& seed,
                                   const ClassifierConfig& cfg, std::ostream* warn = nullptr) {
    cfg.validate();
    if (seed.public_ips.empty() || seed.dedicated_ips.empty())
        throw InputError("need seed IPs for both classes (public and dedicated)");

    std::unordered_map<Ipv4, std::size_t> row_of;
    for (std::size_t i = 0; i < features.size(); ++i) row_of[features[i].ip] = i;

    ClassifyResult result;
    auto seed_in_graph = [&](const std::set<Ipv4>& ips, IpLabel label) {
        std::size_t missing = 0;
        for (auto ip : ips) {
            if (!row_of.count(ip)) {
                ++missing;
                continue;
            }
            result.labels[ip] = {label, label == IpLabel::Public ? 1.0 : 0.0, 0};
        }
        if (missing && warn)
            *warn << "warning: " << missing << " " << to_string(label)
                  << " seed IPs are not in the resolution graph and were ignored\n";
    };
    seed_in_graph(seed.public_ips, IpLabel::Public);
    seed_in_graph(seed.dedicated_ips, IpLabel::Dedicated);

    std::vector<Ipv4> unlabeled;
    for (const auto& fv : features)
        if (!result.labels.count(fv.ip)) unlabeled.push_back(fv.ip);
    std::sort(unlabeled.begin(), unlabeled.end());

    constexpr unsigned kMaxRounds = 50;  // unreachable: labeled sets grow monotonically
    unsigned round = 0;
    while (!unlabeled.empty()) {
        ++round;
        invariant(round <= kMaxRounds, "IP classification failed to converge in 50 rounds");

        std::vector<IpFeatureVector> pool_rows;
        std::vector<IpLabel> pool_labels;
        std::vector<Ipv4> pool_ips;
        for (const auto& [ip, cls] : result.labels) pool_ips.push_back(ip);
        std::sort(pool_ips.begin(), pool_ips.end());
        for (auto ip : pool_ips) {
            pool_rows.push_back(features[row_of[ip]]);
            pool_labels.push_back(result.labels[ip].label);
        }

        ClassifierConfig round_cfg = cfg;
        round_cfg.rng_seed = sub_seed(cfg.rng_seed, "classify-round", round);
        RandomForest model = train_forest(pool_rows, pool_labels, round_cfg);

        std::vector<double> scores(unlabeled.size());
        parallel_for(unlabeled.size(), cfg.threads, [&](std::size_t i) {
            scores[i] = model.score(features[row_of[unlabeled[i]]].as_row());
        });

        std::vector<Ipv4> still_unlabeled;
        std::size_t moved = 0;
        for (std::size_t i = 0; i < unlabeled.size(); ++i) {
            double score_public = scores[i];
            double score_dedicated = 1.0 - score_public;
            if (score_public > cfg.confidence_thresh_public) {
                result.labels[unlabeled[i]] = {IpLabel::Public, score_public, round};
                ++moved;
            } else if (score_dedicated > cfg.confidence_thresh_dedicated) {
                result.labels[unlabeled[i]] = {IpLabel::Dedicated, score_public, round};
                ++moved;
            } else {
                still_unlabeled.push_back(unlabeled[i]);
            }
        }
        if (moved == 0) {
            // Converged with leftovers: they all go to the public side.
            for (std::size_t i = 0; i < still_unlabeled.size(); ++i) {
                auto it = std::lower_bound(unlabeled.begin(), unlabeled.end(), still_unlabeled[i]);
                result.labels[still_unlabeled[i]] = {
                    IpLabel::Public, scores[static_cast<std::size_t>(it - unlabeled.begin())],
                    round + 1};
            }
            still_unlabeled.clear();
        }
        unlabeled = std::move(still_unlabeled);
    }
    result.rounds = round;
    return result;
}

inline std::string ip_labels_csv(const ClassifyResult& result) {
    std::vector<Ipv4> ips;
    ips.reserve(result.labels.size());
    for (const auto& [ip, _] : result.labels) ips.push_back(ip);
    std::sort(ips.begin(), ips.end());
    std::string csv = "ip,label,score_public,round_labeled\n";
    for (auto ip : ips) {
        const auto& c = result.labels.at(ip);
        csv += format_ipv4(ip);
        csv += ",";
        csv += to_string(c.label);
        csv += ",";
        csv += format_double(c.score_public);
        csv += ",";
        csv += std::to_string(c.round_labeled);
        csv += "\n";
    }
    return csv;
}

inline std::unordered_map<Ipv4, IpClassification> ip_labels_from_csv(const std::string& text) {
    std::unordered_map<Ipv4, IpClassification> out;
    auto lines = split(text, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 4) throw FormatError("bad IP label row: " + std::string(line));
        auto ip = parse_ipv4(trim(f[0]));
        if (!ip) throw FormatError("bad IP in label row: " + std::string(line));
        IpClassification c;
        c.label = trim(f[1]) == "dedicated" ? IpLabel::Dedicated : IpLabel::Public;
        c.score_public = std::stod(std::string(trim(f[2])));
        c.round_labeled = static_cast<unsigned>(std::stoul(std::string(trim(f[3]))));
        out[*ip] = c;
    }
    return out;
}

inline std::string importance_csv(const RandomForest& model) {
    std::string csv = "attribute,importance\n";
    for (const auto& [name, value] : attribute_importance(model))
        csv += name + "," + format_double(value) + "\n";
    return csv;
}

}  // namespace dominfer
