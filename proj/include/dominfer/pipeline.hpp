#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dominfer/association.hpp"
#include "dominfer/belief_propagation.hpp"
#include "dominfer/benchmark.hpp"
#include "dominfer/evaluation.hpp"
#include "dominfer/ingest.hpp"
#include "dominfer/ip_classifier.hpp"
#include "dominfer/ip_features.hpp"
#include "dominfer/path_inference.hpp"
#include "dominfer/synthetic.hpp"

namespace dominfer {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
    // inputs
    std::string records;
    bool tsv = false;
    std::string window_start;  // YYYY-MM-DD; end defaults to start + 6 days
    std::string window_end;
    std::size_t popularity_threshold = 1500;
    std::string psl = "data/public_suffix_snapshot.dat";
    std::string as_map;
    std::string ip_seed_public;
    std::string ip_seed_dedicated;
    std::string truth_malicious;
    std::string truth_benign;
    std::string malicious_seeds;  // infer seed list; defaults to truth_malicious

    // stage artifacts (default to files inside out_dir)
    std::string snapshot;
    std::string ip_labels;
    std::string graph;

    std::string scheme = "new";   // baseline | new | relaxed | induced-bipartite
    std::string engine = "path";  // path | bp

    ClassifierConfig classifier;
    BpConfig bp;
    PathConfig path;
    EvalPlan eval;
    std::vector<double> eval_fpr_targets = {0.9, 0.95, 0.99};

    struct Bench {
        std::vector<double> scales = {1, 2, 4, 8};
        unsigned repetitions = 3;
        double seed_fraction = 0.01;
        double timeout_seconds = 600.0;
        std::uint32_t public_min_degree = 8;
        unsigned ases = 8;
    } bench;

    PlantedParams planted;
    double synth_factor = 1.0;

    std::string out_dir = "out";
    std::uint64_t rng_seed = 42;
    unsigned threads = 0;  // 0 = hardware concurrency

    // ---- derived paths ----
    std::string out(const std::string& name) const { return out_dir + "/" + name; }
    std::string snapshot_path() const { return snapshot.empty() ? out("snapshot.json") : snapshot; }
    std::string ip_labels_path() const { return ip_labels.empty() ? out("ip_labels.csv") : ip_labels; }
    std::string graph_path() const {
        if (!graph.empty()) return graph;
        return scheme == "induced-bipartite" ? out("induced_bipartite.json") : out("domain_graph.csv");
    }
    std::string infer_seeds_path() const {
        return malicious_seeds.empty() ? truth_malicious : malicious_seeds;
    }

    DateRange window() const {
        auto start = parse_date(window_start);
        if (!start) throw InputError("config window.start is missing or malformed: " + window_start);
        int last;
        if (window_end.empty()) {
            last = *start + 6;  // one-week default
        } else {
            auto end = parse_date(window_end);
            if (!end) throw InputError("config window.end is malformed: " + window_end);
            last = *end;
        }
        if (last < *start) throw InputError("config window is empty");
        return {*start, last};
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["records"] = records;
        j["tsv"] = tsv;
        j["window"] = {{"start", window_start}, {"end", window_end}};
        j["popularity_threshold"] = popularity_threshold;
        j["psl"] = psl;
        j["as_map"] = as_map;
        j["ip_seeds"] = {{"public", ip_seed_public}, {"dedicated", ip_seed_dedicated}};
        j["ground_truth"] = {{"malicious", truth_malicious}, {"benign", truth_benign}};
        j["malicious_seeds"] = malicious_seeds;
        j["snapshot"] = snapshot;
        j["ip_labels"] = ip_labels;
        j["graph"] = graph;
        j["scheme"] = scheme;
        j["engine"] = engine;
        j["classifier"] = {{"confidence_thresh_public", classifier.confidence_thresh_public},
                           {"confidence_thresh_dedicated", classifier.confidence_thresh_dedicated},
                           {"subnet_prefix_len", classifier.subnet_prefix_len},
                           {"n_trees", classifier.n_trees},
                           {"max_depth", classifier.max_depth}};
        j["bp"] = {{"epsilon", bp.epsilon},
                   {"prior_malicious_seed", bp.prior_malicious_seed},
                   {"prior_benign_seed", bp.prior_benign_seed},
                   {"prior_unknown", bp.prior_unknown},
                   {"convergence_eps", bp.convergence_eps},
                   {"max_iters", bp.max_iters},
                   {"weight_coupling", bp.weight_coupling}};
        j["path"] = {{"assoc_floor", path.assoc_floor}, {"tail_epsilon", path.tail_epsilon}};
        j["eval"] = {{"folds", eval.folds},
                     {"repeats", eval.repeats},
                     {"threshold_step", eval.threshold_step},
                     {"fpr_at_tpr", eval_fpr_targets}};
        j["bench"] = {{"scales", bench.scales},
                      {"repetitions", bench.repetitions},
                      {"seed_fraction", bench.seed_fraction},
                      {"timeout_seconds", bench.timeout_seconds},
                      {"public_min_degree", bench.public_min_degree},
                      {"ases", bench.ases}};
        j["planted"] = {{"campaigns", planted.campaigns},
                        {"campaign_domains", planted.campaign_domains},
                        {"campaign_registered_2lds", planted.campaign_registered_2lds},
                        {"public_campaigns", planted.public_campaigns},
                        {"campaign_pool_picks", planted.campaign_pool_picks},
                        {"noise_pool_picks", planted.noise_pool_picks},
                        {"crowded_ips", planted.crowded_ips},
                        {"noise_crowded_fraction", planted.noise_crowded_fraction},
                        {"campaign_crowded_fraction", planted.campaign_crowded_fraction},
                        {"bridge_chord_stride", planted.bridge_chord_stride},
                        {"entities", planted.entities},
                        {"entity_domains_min", planted.entity_domains_min},
                        {"entity_domains_max", planted.entity_domains_max},
                        {"singleton_entities", planted.singleton_entities},
                        {"colo_blocks", planted.colo_blocks},
                        {"noise_domains", planted.noise_domains},
                        {"pool_ips", planted.pool_ips},
                        {"pool_ases", planted.pool_ases},
                        {"entity_pool_fraction", planted.entity_pool_fraction},
                        {"ip_seed_fraction", planted.ip_seed_fraction}};
        j["synth_factor"] = synth_factor;
        j["out_dir"] = out_dir;
        j["rng_seed"] = rng_seed;
        j["threads"] = threads;
        return j;
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig c;
        c.records = j.value("records", c.records);
        c.tsv = j.value("tsv", c.tsv);
        if (j.contains("window")) {
            c.window_start = j["window"].value("start", c.window_start);
            c.window_end = j["window"].value("end", c.window_end);
        }
        c.popularity_threshold = j.value("popularity_threshold", c.popularity_threshold);
        c.psl = j.value("psl", c.psl);
        c.as_map = j.value("as_map", c.as_map);
        if (j.contains("ip_seeds")) {
            c.ip_seed_public = j["ip_seeds"].value("public", c.ip_seed_public);
            c.ip_seed_dedicated = j["ip_seeds"].value("dedicated", c.ip_seed_dedicated);
        }
        if (j.contains("ground_truth")) {
            c.truth_malicious = j["ground_truth"].value("malicious", c.truth_malicious);
            c.truth_benign = j["ground_truth"].value("benign", c.truth_benign);
        }
        c.malicious_seeds = j.value("malicious_seeds", c.malicious_seeds);
        c.snapshot = j.value("snapshot", c.snapshot);
        c.ip_labels = j.value("ip_labels", c.ip_labels);
        c.graph = j.value("graph", c.graph);
        c.scheme = j.value("scheme", c.scheme);
        c.engine = j.value("engine", c.engine);
        if (j.contains("classifier")) {
            const auto& k = j["classifier"];
            c.classifier.confidence_thresh_public =
                k.value("confidence_thresh_public", c.classifier.confidence_thresh_public);
            c.classifier.confidence_thresh_dedicated =
                k.value("confidence_thresh_dedicated", c.classifier.confidence_thresh_dedicated);
            c.classifier.subnet_prefix_len = k.value("subnet_prefix_len", c.classifier.subnet_prefix_len);
            c.classifier.n_trees = k.value("n_trees", c.classifier.n_trees);
            c.classifier.max_depth = k.value("max_depth", c.classifier.max_depth);
        }
        if (j.contains("bp")) {
            const auto& k = j["bp"];
            c.bp.epsilon = k.value("epsilon", c.bp.epsilon);
            c.bp.prior_malicious_seed = k.value("prior_malicious_seed", c.bp.prior_malicious_seed);
            c.bp.prior_benign_seed = k.value("prior_benign_seed", c.bp.prior_benign_seed);
            c.bp.prior_unknown = k.value("prior_unknown", c.bp.prior_unknown);
            c.bp.convergence_eps = k.value("convergence_eps", c.bp.convergence_eps);
            c.bp.max_iters = k.value("max_iters", c.bp.max_iters);
            c.bp.weight_coupling = k.value("weight_coupling", c.bp.weight_coupling);
        }
        if (j.contains("path")) {
            const auto& k = j["path"];
            c.path.assoc_floor = k.value("assoc_floor", c.path.assoc_floor);
            c.path.tail_epsilon = k.value("tail_epsilon", c.path.tail_epsilon);
        }
        if (j.contains("eval")) {
            const auto& k = j["eval"];
            c.eval.folds = k.value("folds", c.eval.folds);
            c.eval.repeats = k.value("repeats", c.eval.repeats);
            c.eval.threshold_step = k.value("threshold_step", c.eval.threshold_step);
            c.eval_fpr_targets = k.value("fpr_at_tpr", c.eval_fpr_targets);
        }
        if (j.contains("bench")) {
            const auto& k = j["bench"];
            c.bench.scales = k.value("scales", c.bench.scales);
            c.bench.repetitions = k.value("repetitions", c.bench.repetitions);
            c.bench.seed_fraction = k.value("seed_fraction", c.bench.seed_fraction);
            c.bench.timeout_seconds = k.value("timeout_seconds", c.bench.timeout_seconds);
            c.bench.public_min_degree = k.value("public_min_degree", c.bench.public_min_degree);
            c.bench.ases = k.value("ases", c.bench.ases);
        }
        if (j.contains("planted")) {
            const auto& k = j["planted"];
            c.planted.campaigns = k.value("campaigns", c.planted.campaigns);
            c.planted.campaign_domains = k.value("campaign_domains", c.planted.campaign_domains);
            c.planted.campaign_registered_2lds =
                k.value("campaign_registered_2lds", c.planted.campaign_registered_2lds);
            c.planted.public_campaigns = k.value("public_campaigns", c.planted.public_campaigns);
            c.planted.campaign_pool_picks = k.value("campaign_pool_picks", c.planted.campaign_pool_picks);
            c.planted.noise_pool_picks = k.value("noise_pool_picks", c.planted.noise_pool_picks);
            c.planted.crowded_ips = k.value("crowded_ips", c.planted.crowded_ips);
            c.planted.noise_crowded_fraction =
                k.value("noise_crowded_fraction", c.planted.noise_crowded_fraction);
            c.planted.campaign_crowded_fraction =
                k.value("campaign_crowded_fraction", c.planted.campaign_crowded_fraction);
            c.planted.bridge_chord_stride = k.value("bridge_chord_stride", c.planted.bridge_chord_stride);
            c.planted.entities = k.value("entities", c.planted.entities);
            c.planted.entity_domains_min = k.value("entity_domains_min", c.planted.entity_domains_min);
            c.planted.entity_domains_max = k.value("entity_domains_max", c.planted.entity_domains_max);
            c.planted.singleton_entities = k.value("singleton_entities", c.planted.singleton_entities);
            c.planted.colo_blocks = k.value("colo_blocks", c.planted.colo_blocks);
            c.planted.noise_domains = k.value("noise_domains", c.planted.noise_domains);
            c.planted.pool_ips = k.value("pool_ips", c.planted.pool_ips);
            c.planted.pool_ases = k.value("pool_ases", c.planted.pool_ases);
            c.planted.entity_pool_fraction = k.value("entity_pool_fraction", c.planted.entity_pool_fraction);
            c.planted.ip_seed_fraction = k.value("ip_seed_fraction", c.planted.ip_seed_fraction);
        }
        c.synth_factor = j.value("synth_factor", c.synth_factor);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.rng_seed = j.value("rng_seed", c.rng_seed);
        c.threads = j.value("threads", c.threads);
        return c;
    }

    static PipelineConfig load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    }

    // Propagate global knobs into the per-module configs.
    void finalize() {
        unsigned t = resolve_threads(threads);
        classifier.rng_seed = sub_seed(rng_seed, "classifier");
        classifier.threads = t;
        bp.threads = t;
        path.threads = t;
        eval.rng_seed = sub_seed(rng_seed, "eval");
        eval.threads = t;
        planted.rng_seed = sub_seed(rng_seed, "planted");
    }
};

// ---------------------------------------------------------------------------
// run manifest
// ---------------------------------------------------------------------------

class RunManifest {
public:
    RunManifest(std::string command, const PipelineConfig& cfg) : command_(std::move(command)) {
        config_json_ = cfg.to_json();
    }

    void add_input(const std::string& path) { inputs_[path] = sha256_file(path); }
    void add_output(const std::string& path) { outputs_[path] = sha256_file(path); }

    void write(const std::string& path) const {
        nlohmann::ordered_json j;
        j["version"] = kVersion;
        j["command"] = command_;
        j["config_sha256"] = Sha256::of(config_json_.dump());
        j["config"] = config_json_;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        write_text_file(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    nlohmann::ordered_json config_json_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

namespace detail_pipeline {

inline void ensure_out_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
}

inline void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw InputError("config is missing a path for " + what);
    if (!std::filesystem::exists(path)) throw InputError(what + " file does not exist: " + path);
}

}  // namespace detail_pipeline

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

// parse -> build -> popularity filter -> components; writes the snapshot, the
// IP degree histogram and a stats JSON.
inline int cmd_ingest(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.records, "records CSV");

    RunManifest manifest("ingest", cfg);
    manifest.add_input(cfg.records);

    ParseStats stats;
    ParseOptions opts;
    opts.delimiter = cfg.tsv ? '\t' : ',';
    auto records = parse_records_file(cfg.records, cfg.window(), &stats, opts);
    auto graph = build_resolution_graph(records);
    auto filtered = filter_popular_ips(graph, cfg.popularity_threshold);
    auto parts = connected_components(filtered.graph);

    write_graph_snapshot(cfg.snapshot_path(), filtered.graph, &parts);
    write_text_file(cfg.out("degree_histogram.csv"), degree_histogram_csv(filtered.graph));

    nlohmann::ordered_json st;
    st["parsed_records"] = stats.parsed;
    st["malformed_lines"] = stats.malformed;
    st["out_of_window"] = stats.out_of_window;
    st["ipv6_skipped"] = stats.ipv6_skipped;
    st["domains"] = filtered.graph.domains.size();
    st["ips"] = filtered.graph.ips.size();
    st["edges"] = filtered.graph.edges.size();
    st["popular_ips_removed"] = filtered.removed_ips;
    st["components"] = parts.components.size();
    write_text_file(cfg.out("ingest_stats.json"), st.dump(2) + "\n");

    manifest.add_output(cfg.snapshot_path());
    manifest.add_output(cfg.out("degree_histogram.csv"));
    manifest.add_output(cfg.out("ingest_stats.json"));
    manifest.write(cfg.out("run_manifest.json"));

    log << "ingest: " << filtered.graph.domains.size() << " domains, " << filtered.graph.ips.size()
        << " ips, " << filtered.graph.edges.size() << " edges, " << parts.components.size()
        << " components (" << filtered.removed_ips << " popular IPs removed)\n";
    return 0;
}

inline int cmd_classify(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.snapshot_path(), "graph snapshot");
    detail_pipeline::require_file(cfg.psl, "public suffix snapshot");
    detail_pipeline::require_file(cfg.ip_seed_public, "public IP seed");
    detail_pipeline::require_file(cfg.ip_seed_dedicated, "dedicated IP seed");

    RunManifest manifest("classify-ips", cfg);
    manifest.add_input(cfg.snapshot_path());
    manifest.add_input(cfg.psl);
    manifest.add_input(cfg.ip_seed_public);
    manifest.add_input(cfg.ip_seed_dedicated);

    auto graph = read_graph_snapshot(cfg.snapshot_path());
    auto psl = PublicSuffixTable::from_file(cfg.psl);
    auto seed = IpSeed::from_files(cfg.ip_seed_public, cfg.ip_seed_dedicated);

    FeatureStats fstats;
    auto features = extract_features(graph, psl, cfg.classifier.subnet_prefix_len, &fstats,
                                     cfg.classifier.threads);
    if (fstats.unrecognized_suffix_domains)
        log << "note: " << fstats.unrecognized_suffix_domains
            << " domains had no recognizable public suffix (used as their own 2LD)\n";

    auto result = classify_ips(features, seed, cfg.classifier, &log);
    write_text_file(cfg.ip_labels_path(), ip_labels_csv(result));

    // Importance of the final model, retrained on the full labeled set.
    std::vector<IpLabel> final_labels;
    final_labels.reserve(features.size());
    for (const auto& fv : features) final_labels.push_back(result.labels.at(fv.ip).label);
    auto model = train_forest(features, final_labels, cfg.classifier);
    write_text_file(cfg.out("attribute_importance.csv"), importance_csv(model));

    nlohmann::ordered_json meta;
    meta["rounds"] = result.rounds;
    std::size_t n_public = 0;
    for (const auto& [ip, c] : result.labels) n_public += c.label == IpLabel::Public;
    meta["public_ips"] = n_public;
    meta["dedicated_ips"] = result.labels.size() - n_public;
    write_text_file(cfg.out("classify_meta.json"), meta.dump(2) + "\n");

    manifest.add_output(cfg.ip_labels_path());
    manifest.add_output(cfg.out("attribute_importance.csv"));
    manifest.add_output(cfg.out("classify_meta.json"));
    manifest.write(cfg.out("run_manifest.json"));

    log << "classify-ips: " << result.labels.size() << " IPs labeled in " << result.rounds
        << " rounds (" << n_public << " public)\n";
    return 0;
}

inline int cmd_build_graph(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.snapshot_path(), "graph snapshot");

    RunManifest manifest("build-graph", cfg);
    manifest.add_input(cfg.snapshot_path());

    auto graph = read_graph_snapshot(cfg.snapshot_path());
    unsigned threads = resolve_threads(cfg.threads);

    bool induced = cfg.scheme == "induced-bipartite";
    auto scheme = induced ? Scheme::New : scheme_from_string(cfg.scheme).value_or(Scheme::New);
    if (!induced && !scheme_from_string(cfg.scheme))
        throw InputError("unknown scheme: " + cfg.scheme);

    std::unordered_map<Ipv4, IpClassification> labels;
    if (scheme != Scheme::Baseline) {
        detail_pipeline::require_file(cfg.ip_labels_path(), "IP label CSV (run classify-ips first)");
        manifest.add_input(cfg.ip_labels_path());
        labels = ip_labels_from_csv(read_text_file(cfg.ip_labels_path()));
    }
    AsMap as_map;
    if (!cfg.as_map.empty()) {
        detail_pipeline::require_file(cfg.as_map, "AS map CSV");
        manifest.add_input(cfg.as_map);
        as_map = AsMap::from_file(cfg.as_map);
    } else if (scheme == Scheme::Baseline) {
        throw InputError("the baseline scheme needs an AS map (config as_map)");
    }

    auto dg = build_domain_graph(graph, labels, as_map, scheme, cfg.classifier.subnet_prefix_len,
                                 threads);

    if (induced) {
        auto bg = build_induced_bipartite(graph, dg);
        write_graph_snapshot(cfg.out("induced_bipartite.json"), bg);
        manifest.add_output(cfg.out("induced_bipartite.json"));
        log << "build-graph: induced bipartite over " << to_string(dg.scheme) << " coverage: "
            << bg.domains.size() << " domains, " << bg.ips.size() << " ips, " << bg.edges.size()
            << " edges\n";
    } else {
        write_text_file(cfg.out("domain_graph.csv"), domain_graph_csv(dg));
        write_text_file(cfg.out("domain_graph_meta.json"), domain_graph_meta(dg).dump(2) + "\n");
        manifest.add_output(cfg.out("domain_graph.csv"));
        manifest.add_output(cfg.out("domain_graph_meta.json"));
        log << "build-graph: scheme " << to_string(dg.scheme) << ": " << dg.covered_domains()
            << " domains in domain graph, " << dg.edges.size() << " edges\n";
    }
    manifest.write(cfg.out("run_manifest.json"));
    return 0;
}

namespace detail_pipeline {

inline bool is_json_graph(const std::string& path) {
    return path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

inline DomainGraph load_domain_graph(const std::string& csv_path) {
    std::string meta_path = csv_path;
    auto pos = meta_path.rfind(".csv");
    if (pos == std::string::npos) throw InputError("domain graph path must end in .csv: " + csv_path);
    meta_path.replace(pos, 4, "_meta.json");
    require_file(csv_path, "domain graph CSV");
    require_file(meta_path, "domain graph sidecar");
    return domain_graph_from_files(read_text_file(csv_path),
                                   nlohmann::json::parse(read_text_file(meta_path)));
}

}  // namespace detail_pipeline

inline int cmd_infer(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.infer_seeds_path(), "malicious seed list");

    RunManifest manifest("infer", cfg);
    manifest.add_input(cfg.infer_seeds_path());
    auto seeds_raw = read_list_file(cfg.infer_seeds_path());
    for (auto& d : seeds_raw) d = to_lower(d);

    const std::string graph_path = cfg.graph_path();
    if (cfg.engine == "path") {
        if (detail_pipeline::is_json_graph(graph_path))
            throw InputError("the path engine runs on a domain graph CSV, not a bipartite snapshot");
        auto dg = detail_pipeline::load_domain_graph(graph_path);
        manifest.add_input(graph_path);
        auto seeds = SeedSet::from_domains(seeds_raw, dg, &log);
        auto table = score_all(dg, seeds, cfg.path);
        write_text_file(cfg.out("scores.csv"), scores_csv(table));
        manifest.add_output(cfg.out("scores.csv"));
        log << "infer: path engine scored " << table.size() << " domains from "
            << seeds.malicious.size() << " seeds\n";
    } else if (cfg.engine == "bp") {
        BpGraph bg;
        if (detail_pipeline::is_json_graph(graph_path)) {
            detail_pipeline::require_file(graph_path, "bipartite snapshot");
            auto rg = read_graph_snapshot(graph_path);
            bg = bp_graph_from_bipartite(rg, seeds_raw, {}, cfg.bp);
        } else {
            auto dg = detail_pipeline::load_domain_graph(graph_path);
            bg = bp_graph_from_domain_graph(dg, seeds_raw, {}, cfg.bp);
        }
        manifest.add_input(graph_path);
        auto result = run_bp(bg, cfg.bp);
        write_text_file(cfg.out("scores.csv"), bp_scores_csv(bg, result));
        nlohmann::ordered_json meta;
        meta["engine"] = "bp";
        meta["converged"] = result.converged;
        meta["iterations"] = result.iterations;
        write_text_file(cfg.out("scores_meta.json"), meta.dump(2) + "\n");
        manifest.add_output(cfg.out("scores.csv"));
        manifest.add_output(cfg.out("scores_meta.json"));
        log << "infer: bp " << (result.converged ? "converged" : "stopped") << " after "
            << result.iterations << " iterations\n";
    } else {
        throw InputError("unknown engine: " + cfg.engine);
    }
    manifest.write(cfg.out("run_manifest.json"));
    return 0;
}

inline int cmd_eval(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.truth_malicious, "malicious ground truth");
    detail_pipeline::require_file(cfg.truth_benign, "benign ground truth");

    RunManifest manifest("eval", cfg);
    manifest.add_input(cfg.truth_malicious);
    manifest.add_input(cfg.truth_benign);

    auto truth = GroundTruth::load(cfg.truth_malicious, cfg.truth_benign, &log);

    const std::string graph_path = cfg.graph_path();
    std::function<ScoreTable(const std::vector<std::string>&)> scorer;
    DomainGraph dg;
    ResolutionGraph rg;
    // Round scorers run sequentially inside each round; rounds parallelize.
    PathConfig path_cfg = cfg.path;
    path_cfg.threads = 1;
    BpConfig bp_cfg = cfg.bp;
    bp_cfg.threads = 1;
    if (cfg.engine == "path") {
        if (detail_pipeline::is_json_graph(graph_path))
            throw InputError("the path engine runs on a domain graph CSV, not a bipartite snapshot");
        dg = detail_pipeline::load_domain_graph(graph_path);
        scorer = [&dg, path_cfg](const std::vector<std::string>& seed_fold) {
            return score_all(dg, SeedSet::from_domains(seed_fold, dg), path_cfg);
        };
    } else if (cfg.engine == "bp") {
        if (detail_pipeline::is_json_graph(graph_path)) {
            detail_pipeline::require_file(graph_path, "bipartite snapshot");
            rg = read_graph_snapshot(graph_path);
            scorer = [&rg, bp_cfg](const std::vector<std::string>& seed_fold) {
                auto bg = bp_graph_from_bipartite(rg, seed_fold, {}, bp_cfg);
                return beliefs_to_scores(bg, run_bp(bg, bp_cfg));
            };
        } else {
            dg = detail_pipeline::load_domain_graph(graph_path);
            scorer = [&dg, bp_cfg](const std::vector<std::string>& seed_fold) {
                auto bg = bp_graph_from_domain_graph(dg, seed_fold, {}, bp_cfg);
                return beliefs_to_scores(bg, run_bp(bg, bp_cfg));
            };
        }
    } else {
        throw InputError("unknown engine: " + cfg.engine);
    }
    manifest.add_input(graph_path);

    auto result = run_evaluation(scorer, truth, cfg.eval);
    write_text_file(cfg.out("roc.csv"), roc_csv(result.averaged));

    nlohmann::ordered_json summary;
    summary["engine"] = cfg.engine;
    summary["rounds"] = result.round_curves.size();
    summary["auc"] = result.auc;
    nlohmann::ordered_json targets = nlohmann::ordered_json::array();
    for (double t : cfg.eval_fpr_targets) {
        auto f = fpr_at_tpr(result.averaged, t);
        nlohmann::ordered_json row;
        row["target_tpr"] = t;
        row["reachable"] = f.reachable;
        if (f.reachable) {
            row["fpr"] = f.fpr;
            row["threshold"] = f.threshold;
        }
        targets.push_back(row);
    }
    summary["fpr_at_tpr"] = targets;
    write_text_file(cfg.out("summary.json"), summary.dump(2) + "\n");

    manifest.add_output(cfg.out("roc.csv"));
    manifest.add_output(cfg.out("summary.json"));
    manifest.write(cfg.out("run_manifest.json"));

    log << "eval: " << result.round_curves.size() << " rounds, AUC " << result.auc << "\n";
    return 0;
}

inline int cmd_bench(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.snapshot_path(), "reference snapshot");

    RunManifest manifest("bench", cfg);
    manifest.add_input(cfg.snapshot_path());

    auto reference = read_graph_snapshot(cfg.snapshot_path());
    auto profile = extract_profile(reference);
    unsigned threads = resolve_threads(cfg.threads);

    std::vector<BenchRow> rows;
    for (double scale : cfg.bench.scales) {
        auto scaled_profile = scale_profile(profile, scale);
        auto g = generate_bipartite(scaled_profile, sub_seed(cfg.rng_seed, "bench-graph",
                                                             static_cast<std::uint64_t>(scale * 1000)));
        AsMap as_map;
        auto labels = label_ips_by_degree(g, cfg.bench.public_min_degree, cfg.bench.ases, &as_map);
        auto dg = build_domain_graph(g, labels, as_map, Scheme::New, 24, threads);
        auto bg_new = build_induced_bipartite(g, dg);

        // Proportional seed set: a fixed fraction of covered domains.
        std::vector<std::string> seeds;
        {
            std::vector<std::string> covered;
            std::vector<bool> cov(dg.domains.size(), false);
            for (const auto& e : dg.edges) cov[e.a] = cov[e.b] = true;
            for (std::size_t d = 0; d < dg.domains.size(); ++d)
                if (cov[d]) covered.push_back(dg.domains[d]);
            std::size_t want = std::max<std::size_t>(1, std::size_t(double(covered.size()) *
                                                                    cfg.bench.seed_fraction));
            std::mt19937_64 rng(sub_seed(cfg.rng_seed, "bench-seeds",
                                         static_cast<std::uint64_t>(scale * 1000)));
            std::shuffle(covered.begin(), covered.end(), rng);
            covered.resize(want);
            std::sort(covered.begin(), covered.end());
            seeds = std::move(covered);
        }

        // Fixed iteration count for BP so measured time tracks edge count.
        BpConfig bench_bp = cfg.bp;
        bench_bp.threads = threads;
        bench_bp.convergence_eps = 0.0;

        PathConfig bench_path = cfg.path;
        bench_path.threads = threads;

        SeedSet seed_set = SeedSet::from_domains(seeds, dg);
        rows.push_back(time_engine(
            "path", scale, dg.domains.size(), dg.edges.size(),
            [&] { score_all(dg, seed_set, bench_path); }, cfg.bench.repetitions,
            cfg.bench.timeout_seconds));
        log << "bench: path " << scale << "x done (" << rows.back().median_seconds << "s)\n";

        auto bp_domain_graph = bp_graph_from_domain_graph(dg, seeds, {}, bench_bp);
        rows.push_back(time_engine(
            "bp", scale, dg.domains.size(), dg.edges.size(),
            [&] { run_bp(bp_domain_graph, bench_bp); }, cfg.bench.repetitions,
            cfg.bench.timeout_seconds));
        log << "bench: bp " << scale << "x done (" << rows.back().median_seconds << "s)\n";

        auto bp_bipartite = bp_graph_from_bipartite(bg_new, seeds, {}, bench_bp);
        rows.push_back(time_engine(
            "bp-bipartite", scale, bg_new.node_count(), bg_new.edges.size(),
            [&] { run_bp(bp_bipartite, bench_bp); }, cfg.bench.repetitions,
            cfg.bench.timeout_seconds));
        log << "bench: bp-bipartite " << scale << "x done (" << rows.back().median_seconds << "s)\n";
    }

    write_text_file(cfg.out("bench.csv"), bench_csv(rows));
    manifest.add_output(cfg.out("bench.csv"));
    manifest.write(cfg.out("run_manifest.json"));
    return 0;
}

inline int cmd_synth_scale(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);
    detail_pipeline::require_file(cfg.snapshot_path(), "reference snapshot");

    RunManifest manifest("synth-scale", cfg);
    manifest.add_input(cfg.snapshot_path());

    auto reference = read_graph_snapshot(cfg.snapshot_path());
    auto profile = scale_profile(extract_profile(reference), cfg.synth_factor);
    auto g = generate_bipartite(profile, sub_seed(cfg.rng_seed, "synth-scale"), reference.window);

    std::vector<ResolutionRecord> records;
    records.reserve(g.edges.size());
    for (const auto& e : g.edges)
        records.push_back({e.first_seen, g.domains[e.domain], g.ips[e.ip]});
    write_text_file(cfg.out("synth_records.csv"), records_csv(records));

    manifest.add_output(cfg.out("synth_records.csv"));
    manifest.write(cfg.out("run_manifest.json"));
    log << "synth scale: factor " << cfg.synth_factor << " -> " << g.domains.size() << " domains, "
        << g.ips.size() << " ips, " << g.edges.size() << " edges\n";
    return 0;
}

inline int cmd_synth_planted(PipelineConfig cfg, std::ostream& log = std::cerr) {
    cfg.finalize();
    detail_pipeline::ensure_out_dir(cfg);

    RunManifest manifest("synth-planted", cfg);
    auto ds = generate_planted(cfg.planted);

    write_text_file(cfg.out("records.csv"), records_csv(ds.records));
    write_text_file(cfg.out("as_map.csv"), ds.as_map.to_csv());
    std::string pub, ded;
    for (auto ip : ds.ip_seed.public_ips) pub += format_ipv4(ip) + "\n";
    for (auto ip : ds.ip_seed.dedicated_ips) ded += format_ipv4(ip) + "\n";
    write_text_file(cfg.out("ip_seed_public.txt"), pub);
    write_text_file(cfg.out("ip_seed_dedicated.txt"), ded);
    std::string mal, ben;
    for (const auto& d : ds.malicious) mal += d + "\n";
    for (const auto& d : ds.benign) ben += d + "\n";
    write_text_file(cfg.out("malicious.txt"), mal);
    write_text_file(cfg.out("benign.txt"), ben);
    {
        std::vector<Ipv4> ips;
        for (const auto& [ip, _] : ds.ip_truth) ips.push_back(ip);
        std::sort(ips.begin(), ips.end());
        std::string truth = "ip,label\n";
        for (auto ip : ips)
            truth += format_ipv4(ip) + "," + to_string(ds.ip_truth.at(ip)) + "\n";
        write_text_file(cfg.out("truth_ip_labels.csv"), truth);
    }

    for (const char* f : {"records.csv", "as_map.csv", "ip_seed_public.txt", "ip_seed_dedicated.txt",
                          "malicious.txt", "benign.txt", "truth_ip_labels.csv"})
        manifest.add_output(cfg.out(f));
    manifest.write(cfg.out("run_manifest.json"));

    log << "synth planted: " << ds.graph.domains.size() << " domains (" << ds.malicious.size()
        << " malicious), " << ds.graph.ips.size() << " ips, " << ds.records.size() << " records\n";
    return 0;
}

}  // namespace dominfer
