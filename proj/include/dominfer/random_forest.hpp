#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "dominfer/errors.hpp"
#include "dominfer/parallel.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

struct ForestConfig {
    unsigned n_trees = 100;
    unsigned max_depth = 0;  // 0 = unlimited
    unsigned min_samples_split = 2;
    std::uint64_t rng_seed = 0;
    unsigned threads = 1;
};

// Binary CART trees, gini splits, bootstrap sampling, sqrt-feature subsampling
// per split. Per-tree RNG streams are derived from the tree index, so results
// do not depend on how training is scheduled across threads.
class DecisionTree {
public:
    struct Node {
        int feature = -1;  // -1 = leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int label = 0;
    };

    void train(std::span<const std::vector<double>> rows, std::span<const int> labels,
               std::span<const std::size_t> sample, unsigned n_features, unsigned max_depth,
               unsigned min_samples_split, std::mt19937_64& rng, std::vector<double>& importance) {
        nodes_.clear();
        std::vector<std::size_t> idx(sample.begin(), sample.end());
        build(rows, labels, idx, n_features, 0, max_depth, min_samples_split, rng, importance,
              double(idx.size()));
    }

    int predict(std::span<const double> x) const {
        std::int32_t at = 0;
        while (nodes_[at].feature >= 0) {
            const auto& n = nodes_[at];
            at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[at].label;
    }

    const std::vector<Node>& nodes() const { return nodes_; }

private:
    static double gini(std::size_t n1, std::size_t n) {
        if (n == 0) return 0.0;
        double p = double(n1) / double(n);
        return 2.0 * p * (1.0 - p);
    }

    std::int32_t build(std::span<const std::vector<double>> rows, std::span<const int> labels,
                       std::vector<std::size_t>& idx, unsigned n_features, unsigned depth,
                       unsigned max_depth, unsigned min_samples_split, std::mt19937_64& rng,
                       std::vector<double>& importance, double n_total) {
        std::size_t n = idx.size();
        std::size_t n1 = 0;
        for (auto i : idx) n1 += static_cast<std::size_t>(labels[i]);

        auto make_leaf = [&]() {
            Node leaf;
            leaf.label = (2 * n1 > n) ? 1 : 0;  // ties break to class 0
            nodes_.push_back(leaf);
            return static_cast<std::int32_t>(nodes_.size() - 1);
        };

        bool pure = (n1 == 0 || n1 == n);
        bool depth_capped = max_depth != 0 && depth >= max_depth;
        if (pure || depth_capped || n < min_samples_split) return make_leaf();

        // Feature subsample of size ceil(sqrt(F)), kept in draw order so exact
        // gain ties break uniformly rather than by feature index.
        unsigned k = static_cast<unsigned>(std::ceil(std::sqrt(double(n_features))));
        std::vector<unsigned> feats(n_features);
        std::iota(feats.begin(), feats.end(), 0u);
        for (unsigned i = 0; i < k; ++i) {
            std::uniform_int_distribution<unsigned> pick(i, n_features - 1);
            std::swap(feats[i], feats[pick(rng)]);
        }
        feats.resize(k);

        double parent_gini = gini(n1, n);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::size_t> order(idx);
        for (unsigned f : feats) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return rows[a][f] < rows[b][f];
            });
            std::size_t left1 = 0;
            for (std::size_t pos = 1; pos < n; ++pos) {
                left1 += static_cast<std::size_t>(labels[order[pos - 1]]);
                double lo = rows[order[pos - 1]][f], hi = rows[order[pos]][f];
                if (lo == hi) continue;
                double wl = double(pos) / double(n), wr = 1.0 - wl;
                double gain = parent_gini - wl * gini(left1, pos) - wr * gini(n1 - left1, n - pos);
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = lo + (hi - lo) / 2.0;
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (auto i : idx) {
            (rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx : right_idx)
                .push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf();

        importance[static_cast<std::size_t>(best_feature)] += (double(n) / n_total) * best_gain;

        Node node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes_.push_back(node);
        auto self = static_cast<std::int32_t>(nodes_.size() - 1);
        idx.clear();
        idx.shrink_to_fit();
        auto l = build(rows, labels, left_idx, n_features, depth + 1, max_depth, min_samples_split,
                       rng, importance, n_total);
        auto r = build(rows, labels, right_idx, n_features, depth + 1, max_depth, min_samples_split,
                       rng, importance, n_total);
        nodes_[self].left = l;
        nodes_[self].right = r;
        return self;
    }

    std::vector<Node> nodes_;
};

class RandomForest {
public:
    // labels: 0/1 per row. Class 1 is the "positive" class whose vote fraction
    // score() reports.
    static RandomForest train(const std::vector<std::vector<double>>& rows,
                              const std::vector<int>& labels, const ForestConfig& cfg) {
        if (rows.size() != labels.size()) throw InputError("feature/label size mismatch");
        std::size_t n0 = 0, n1 = 0;
        for (int y : labels) (y ? n1 : n0)++;
        if (n1 < 2) throw InputError("training pool needs at least 2 examples of the positive class");
        if (n0 < 2) throw InputError("training pool needs at least 2 examples of the negative class");
        const unsigned n_features = static_cast<unsigned>(rows.front().size());
        const std::size_t n = rows.size();

        RandomForest forest;
        forest.n_features_ = n_features;
        forest.trees_.resize(cfg.n_trees);
        std::vector<std::vector<double>> tree_importance(cfg.n_trees,
                                                         std::vector<double>(n_features, 0.0));

        // Stratified bootstrap: resample within each class so every tree sees
        // both classes even from very small pools.
        std::vector<std::size_t> class_rows[2];
        for (std::size_t i = 0; i < n; ++i) class_rows[labels[i] ? 1 : 0].push_back(i);

        parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
            std::mt19937_64 rng(sub_seed(cfg.rng_seed, "tree", t));
            std::vector<std::size_t> sample;
            sample.reserve(n);
            for (const auto& members : class_rows) {
                std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
                for (std::size_t i = 0; i < members.size(); ++i) sample.push_back(members[pick(rng)]);
            }
            forest.trees_[t].train(rows, labels, sample, n_features, cfg.max_depth,
                                   cfg.min_samples_split, rng, tree_importance[t]);
        });

        forest.importance_.assign(n_features, 0.0);
        for (const auto& imp : tree_importance)
            for (unsigned f = 0; f < n_features; ++f) forest.importance_[f] += imp[f];
        double total = std::accumulate(forest.importance_.begin(), forest.importance_.end(), 0.0);
        if (total > 0)
            for (auto& v : forest.importance_) v /= total;
        return forest;
    }

    // Fraction of trees voting class 1.
    double score(std::span<const double> x) const {
        std::size_t votes = 0;
        for (const auto& t : trees_) votes += static_cast<std::size_t>(t.predict(x));
        return double(votes) / double(trees_.size());
    }

    // Normalized impurity-decrease importances; sums to 1 for any forest that
    // made at least one split.
    const std::vector<double>& feature_importances() const { return importance_; }

    std::size_t tree_count() const { return trees_.size(); }

private:
    std::vector<DecisionTree> trees_;
    std::vector<double> importance_;
    unsigned n_features_ = 0;
};

}  // namespace dominfer
