// dominfer: malicious-domain inference over active-DNS resolution graphs.
//
// Subcommands chain through files in the output directory:
//   ingest -> classify-ips -> build-graph -> infer/eval, plus bench and synth.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dominfer/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string records;
    std::string snapshot;
    std::string ip_labels;
    std::string graph;
    std::string psl;
    std::string as_map;
    std::string window_start;
    std::string window_end;
    long long seed = -1;
    int threads = -1;
    long long popularity = -1;
    bool tsv = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--records", f.records, "input records CSV (.csv or .csv.gz)");
    cmd->add_option("--snapshot", f.snapshot, "resolution graph snapshot path");
    cmd->add_option("--ip-labels", f.ip_labels, "IP label CSV path");
    cmd->add_option("--graph", f.graph, "graph input for infer/eval (.csv domain graph or .json bipartite)");
    cmd->add_option("--psl", f.psl, "public suffix snapshot");
    cmd->add_option("--as-map", f.as_map, "AS map CSV (cidr,asn)");
    cmd->add_option("--window-start", f.window_start, "window start (YYYY-MM-DD)");
    cmd->add_option("--window-end", f.window_end, "window end (YYYY-MM-DD, default start+6)");
    cmd->add_option("--seed", f.seed, "master RNG seed");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_option("--popularity-threshold", f.popularity, "drop IPs hosting more than t domains");
    cmd->add_flag("--tsv", f.tsv, "records are tab-separated");
}

dominfer::PipelineConfig make_config(const CommonFlags& f) {
    dominfer::PipelineConfig cfg;
    if (!f.config_path.empty()) cfg = dominfer::PipelineConfig::load(f.config_path);
    // Command-line flags win over config-file values.
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.records.empty()) cfg.records = f.records;
    if (!f.snapshot.empty()) cfg.snapshot = f.snapshot;
    if (!f.ip_labels.empty()) cfg.ip_labels = f.ip_labels;
    if (!f.graph.empty()) cfg.graph = f.graph;
    if (!f.psl.empty()) cfg.psl = f.psl;
    if (!f.as_map.empty()) cfg.as_map = f.as_map;
    if (!f.window_start.empty()) cfg.window_start = f.window_start;
    if (!f.window_end.empty()) cfg.window_end = f.window_end;
    if (f.seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(f.seed);
    if (f.threads >= 0) cfg.threads = static_cast<unsigned>(f.threads);
    if (f.popularity >= 0) cfg.popularity_threshold = static_cast<std::size_t>(f.popularity);
    if (f.tsv) cfg.tsv = true;
    if (const char* env = std::getenv("DOMINFER_OUT_DIR"); env && *env) cfg.out_dir = env;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"malicious-domain inference over active-DNS resolution graphs"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string scheme, engine, mal_seeds, truth_mal, truth_ben;
    double factor = 1.0;

    auto* ingest = app.add_subcommand("ingest", "parse records into a filtered resolution graph");
    add_common(ingest, flags);

    std::string seed_pub, seed_ded;
    auto* classify = app.add_subcommand("classify-ips", "label IPs public/dedicated");
    add_common(classify, flags);
    classify->add_option("--ip-seed-public", seed_pub, "public IP seed file (one IP per line)");
    classify->add_option("--ip-seed-dedicated", seed_ded, "dedicated IP seed file");

    auto* build = app.add_subcommand("build-graph", "build a weighted domain graph");
    add_common(build, flags);
    build->add_option("--scheme", scheme, "baseline|new|relaxed|induced-bipartite");

    auto* infer = app.add_subcommand("infer", "score domains from malicious seeds");
    add_common(infer, flags);
    infer->add_option("--engine", engine, "path|bp");
    infer->add_option("--malicious-seeds", mal_seeds, "malicious seed domains (one per line)");

    auto* eval = app.add_subcommand("eval", "cross-validated ROC evaluation");
    add_common(eval, flags);
    eval->add_option("--engine", engine, "path|bp");
    eval->add_option("--malicious", truth_mal, "malicious ground truth file");
    eval->add_option("--benign", truth_ben, "benign ground truth file");

    auto* bench = app.add_subcommand("bench", "runtime scaling benchmark on synthetic graphs");
    add_common(bench, flags);

    auto* synth = app.add_subcommand("synth", "synthetic data generators");
    synth->require_subcommand(1);
    auto* synth_scale = synth->add_subcommand("scale", "degree-preserving scaled records");
    add_common(synth_scale, flags);
    synth_scale->add_option("--factor", factor, "scale factor (>= 1)");
    auto* synth_planted = synth->add_subcommand("planted", "planted-truth dataset");
    add_common(synth_planted, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = make_config(flags);
        if (!scheme.empty()) cfg.scheme = scheme;
        if (!engine.empty()) cfg.engine = engine;
        if (!mal_seeds.empty()) cfg.malicious_seeds = mal_seeds;
        if (!truth_mal.empty()) cfg.truth_malicious = truth_mal;
        if (!truth_ben.empty()) cfg.truth_benign = truth_ben;
        if (!seed_pub.empty()) cfg.ip_seed_public = seed_pub;
        if (!seed_ded.empty()) cfg.ip_seed_dedicated = seed_ded;
        if (factor != 1.0) cfg.synth_factor = factor;

        if (ingest->parsed()) return dominfer::cmd_ingest(cfg);
        if (classify->parsed()) return dominfer::cmd_classify(cfg);
        if (build->parsed()) return dominfer::cmd_build_graph(cfg);
        if (infer->parsed()) return dominfer::cmd_infer(cfg);
        if (eval->parsed()) return dominfer::cmd_eval(cfg);
        if (bench->parsed()) return dominfer::cmd_bench(cfg);
        if (synth->parsed()) {
            if (synth_scale->parsed()) return dominfer::cmd_synth_scale(cfg);
            if (synth_planted->parsed()) return dominfer::cmd_synth_planted(cfg);
        }
        std::cerr << "no subcommand\n";
        return kExitInput;
    } catch (const dominfer::InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const dominfer::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
