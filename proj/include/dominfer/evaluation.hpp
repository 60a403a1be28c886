#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dominfer/parallel.hpp"
#include "dominfer/path_inference.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

// ---------------------------------------------------------------------------
// ground truth
// ---------------------------------------------------------------------------

struct GroundTruth {
    std::vector<std::string> malicious;  // sorted unique
    std::vector<std::string> benign;     // sorted unique, disjoint from malicious

    static GroundTruth from_lists(std::vector<std::string> mal, std::vector<std::string> ben,
                                  std::ostream* warn = nullptr) {
        GroundTruth gt;
        auto norm = [](std::vector<std::string>& v) {
            for (auto& d : v) d = to_lower(d);
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        norm(mal);
        norm(ben);
        gt.malicious = std::move(mal);
        std::size_t conflicts = 0;
        for (auto& d : ben) {
            if (std::binary_search(gt.malicious.begin(), gt.malicious.end(), d))
                ++conflicts;  // malicious wins
            else
                gt.benign.push_back(std::move(d));
        }
        if (conflicts && warn)
            *warn << "warning: " << conflicts
                  << " domains were in both truth lists; kept as malicious\n";
        return gt;
    }

    static GroundTruth load(const std::string& malicious_path, const std::string& benign_path,
                            std::ostream* warn = nullptr) {
        return from_lists(read_list_file(malicious_path), read_list_file(benign_path), warn);
    }
};

// Pluggable reputation lookup. The default implementation answers from the
// ground-truth files; the HTTP-style message contract below exists so a live
// verifier can be slotted in later without touching callers.
enum class ReputationLabel { Malicious, Benign, Unknown };

struct ReputationVerdict {
    ReputationLabel label = ReputationLabel::Unknown;
    std::string category;
};

class ReputationProvider {
public:
    virtual ~ReputationProvider() = default;
    virtual ReputationVerdict lookup(const std::string& domain) = 0;
};

class FileReputationProvider : public ReputationProvider {
public:
    explicit FileReputationProvider(GroundTruth gt) : gt_(std::move(gt)) {}

    ReputationVerdict lookup(const std::string& domain) override {
        if (std::binary_search(gt_.malicious.begin(), gt_.malicious.end(), domain))
            return {ReputationLabel::Malicious, "ground-truth"};
        if (std::binary_search(gt_.benign.begin(), gt_.benign.end(), domain))
            return {ReputationLabel::Benign, "ground-truth"};
        return {ReputationLabel::Unknown, ""};
    }

private:
    GroundTruth gt_;
};

// Wire contract for a future HTTP-backed provider. Request carries the domain;
// the response carries a label plus a free-form category string.
inline nlohmann::ordered_json reputation_request_json(const std::string& domain) {
    return {{"domain", domain}};
}

inline ReputationVerdict reputation_verdict_from_json(const nlohmann::json& j) {
    ReputationVerdict v;
    auto label = j.at("label").get<std::string>();
    if (label == "malicious")
        v.label = ReputationLabel::Malicious;
    else if (label == "benign")
        v.label = ReputationLabel::Benign;
    else if (label == "unknown")
        v.label = ReputationLabel::Unknown;
    else
        throw FormatError("unknown reputation label: " + label);
    v.category = j.value("category", "");
    return v;
}

// ---------------------------------------------------------------------------
// folds
// ---------------------------------------------------------------------------

struct EvalPlan {
    unsigned folds = 10;
    unsigned repeats = 5;
    double threshold_step = 0.01;
    std::uint64_t rng_seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (folds < 2) throw InputError("need at least 2 folds");
        if (!(threshold_step > 0 && threshold_step <= 1)) throw InputError("threshold step must be in (0,1]");
        double steps = 1.0 / threshold_step;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw InputError("threshold step must divide 1 evenly");
    }
};

struct FoldRound {
    unsigned repeat = 0;
    unsigned fold = 0;
    std::vector<std::string> train;  // the single seed fold
    std::vector<std::string> test;   // the remaining folds
};

// One round per (repeat, fold): the picked fold seeds the inference, the other
// folds are the malicious test set. Fold sizes differ by at most one.
inline std::vector<FoldRound> make_folds(const std::vector<std::string>& malicious,
                                         const EvalPlan& plan) {
    plan.validate();
    if (malicious.size() < plan.folds)
        throw InputError("need at least " + std::to_string(plan.folds) +
                         " malicious domains for " + std::to_string(plan.folds) + "-fold rounds");

    std::vector<std::string> base(malicious);
    std::sort(base.begin(), base.end());

    std::vector<FoldRound> rounds;
    rounds.reserve(plan.folds * plan.repeats);
    for (unsigned rep = 0; rep < plan.repeats; ++rep) {
        std::vector<std::string> shuffled(base);
        std::mt19937_64 rng(sub_seed(plan.rng_seed, "folds", rep));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);

        std::vector<std::vector<std::string>> folds(plan.folds);
        for (std::size_t i = 0; i < shuffled.size(); ++i)
            folds[i % plan.folds].push_back(shuffled[i]);

        for (unsigned f = 0; f < plan.folds; ++f) {
            FoldRound round;
            round.repeat = rep;
            round.fold = f;
            round.train = folds[f];
            for (unsigned o = 0; o < plan.folds; ++o)
                if (o != f) round.test.insert(round.test.end(), folds[o].begin(), folds[o].end());
            rounds.push_back(std::move(round));
        }
    }
    return rounds;
}

// ---------------------------------------------------------------------------
// ROC
// ---------------------------------------------------------------------------

struct RocCurve {
    std::vector<double> thresholds;
    std::vector<double> tpr;
    std::vector<double> fpr;
};

// Strict `>` at the threshold; a domain missing from the table scores 0.
inline RocCurve roc_from_scores(const ScoreTable& scores, const std::vector<std::string>& test_malicious,
                                const std::vector<std::string>& benign, double step = 0.01) {
    if (test_malicious.empty()) throw InputError("malicious test set is empty");
    if (benign.empty()) throw InputError("benign set is empty");
    auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
    if (std::abs(step * double(steps) - 1.0) > 1e-9)
        throw InputError("threshold step must divide 1 evenly");

    auto score_of = [&](const std::string& d) {
        auto it = scores.find(d);
        return it == scores.end() ? 0.0 : it->second;
    };
    std::vector<double> mal_scores, ben_scores;
    mal_scores.reserve(test_malicious.size());
    ben_scores.reserve(benign.size());
    for (const auto& d : test_malicious) mal_scores.push_back(score_of(d));
    for (const auto& d : benign) ben_scores.push_back(score_of(d));
    std::sort(mal_scores.begin(), mal_scores.end());
    std::sort(ben_scores.begin(), ben_scores.end());

    auto frac_above = [](const std::vector<double>& sorted, double t) {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        return double(sorted.end() - it) / double(sorted.size());
    };

    RocCurve curve;
    curve.thresholds.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        double t = double(i) * step;
        curve.thresholds.push_back(t);
        curve.tpr.push_back(frac_above(mal_scores, t));
        curve.fpr.push_back(frac_above(ben_scores, t));
    }
    return curve;
}

inline RocCurve average_curves(const std::vector<RocCurve>& curves) {
    if (curves.empty()) throw InputError("no curves to average");
    RocCurve avg;
    avg.thresholds = curves.front().thresholds;
    avg.tpr.assign(avg.thresholds.size(), 0.0);
    avg.fpr.assign(avg.thresholds.size(), 0.0);
    for (const auto& c : curves) {
        if (c.thresholds != avg.thresholds) throw InputError("curves have mismatched threshold grids");
        for (std::size_t i = 0; i < avg.thresholds.size(); ++i) {
            avg.tpr[i] += c.tpr[i];
            avg.fpr[i] += c.fpr[i];
        }
    }
    for (std::size_t i = 0; i < avg.thresholds.size(); ++i) {
        avg.tpr[i] /= double(curves.size());
        avg.fpr[i] /= double(curves.size());
    }
    return avg;
}

struct FprAtTpr {
    bool reachable = false;
    double fpr = 1.0;
    double threshold = 0.0;
};

// Smallest FPR over grid points whose TPR still meets the target; reported as
// unreachable when even the most permissive threshold falls short.
inline FprAtTpr fpr_at_tpr(const RocCurve& curve, double target_tpr) {
    if (curve.thresholds.empty()) throw InputError("empty ROC curve");
    FprAtTpr out;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        if (curve.tpr[i] >= target_tpr) {
            if (!out.reachable || curve.fpr[i] < out.fpr) {
                out.reachable = true;
                out.fpr = curve.fpr[i];
                out.threshold = curve.thresholds[i];
            }
        }
    }
    return out;
}

inline double precision_at(double base_rate_malicious, double tpr, double fpr) {
    double num = tpr * base_rate_malicious;
    double den = num + fpr * (1.0 - base_rate_malicious);
    if (den == 0.0) return 0.0;
    return num / den;
}

// Trapezoid over the swept grid with a (1,1) anchor for the everything-flagged
// end of the sweep.
inline double roc_auc(const RocCurve& curve) {
    std::vector<std::pair<double, double>> pts;  // (fpr, tpr)
    pts.reserve(curve.thresholds.size() + 2);
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) pts.emplace_back(curve.fpr[i], curve.tpr[i]);
    pts.emplace_back(0.0, 0.0);
    pts.emplace_back(1.0, 1.0);
    std::sort(pts.begin(), pts.end());
    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double dx = pts[i].first - pts[i - 1].first;
        auc += dx * (pts[i].second + pts[i - 1].second) / 2.0;
    }
    return auc;
}

// ---------------------------------------------------------------------------
// cross-validated evaluation
// ---------------------------------------------------------------------------

struct EvalResult {
    std::vector<RocCurve> round_curves;
    RocCurve averaged;
    double auc = 0.0;
};

// scorer: seed domains for one round -> score table. The benign ground truth
// is never folded; every round measures FPR against all of it.
inline EvalResult run_evaluation(const std::function<ScoreTable(const std::vector<std::string>&)>& scorer,
                                 const GroundTruth& truth, const EvalPlan& plan) {
    auto rounds = make_folds(truth.malicious, plan);
    EvalResult result;
    result.round_curves.resize(rounds.size());
    parallel_for(rounds.size(), plan.threads, [&](std::size_t i) {
        ScoreTable scores = scorer(rounds[i].train);
        result.round_curves[i] =
            roc_from_scores(scores, rounds[i].test, truth.benign, plan.threshold_step);
    });
    result.averaged = average_curves(result.round_curves);
    result.auc = roc_auc(result.averaged);
    return result;
}

inline std::string roc_csv(const RocCurve& curve) {
    std::string csv = "threshold,tpr,fpr\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        csv += format_double(curve.thresholds[i]) + "," + format_double(curve.tpr[i]) + "," +
               format_double(curve.fpr[i]) + "\n";
    return csv;
}

}  // namespace dominfer
