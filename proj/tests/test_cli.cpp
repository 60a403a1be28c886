// File-level pipeline tests driving the installed binary.
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "dominfer/pipeline.hpp"

using namespace dominfer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("dominfer_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(DOMINFER_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const char* kSampleCsv =
    "date,domain,ip\n"
    "2017-02-04,d1.test,10.0.0.1\n"
    "2017-02-05,d2.test,10.0.0.1\n"
    "2017-02-05,d2.test,10.0.0.2\n"
    "2017-02-06,d3.test,10.0.0.2\n"
    "2017-02-06,d4.test,20.0.0.1\n"
    "2017-02-07,d4.test,20.0.0.2\n"
    "2017-02-07,d5.test,20.0.0.1\n"
    "2017-02-07,d5.test,20.0.0.2\n"
    "2017-02-08,d1.test,10.0.0.3\n"
    "2017-02-20,late.test,9.9.9.9\n";

}  // namespace

TEST_CASE("ingest writes a snapshot with known counts") {
    TempDir dir;
    write_text_file(dir.str("records.csv"), kSampleCsv);
    int rc = run_cli("ingest --records " + dir.str("records.csv") +
                     " --window-start 2017-02-04 --out " + dir.str("out"));
    REQUIRE(rc == 0);

    auto g = read_graph_snapshot(dir.str("out/snapshot.json"));
    // 9 in-window rows: 5 domains, 5 ips, 9 edges (late.test outside window)
    CHECK(g.domains.size() == 5);
    CHECK(g.ips.size() == 5);
    CHECK(g.edges.size() == 9);
    CHECK(fs::exists(dir.str("out/degree_histogram.csv")));
    CHECK(fs::exists(dir.str("out/ingest_stats.json")));
    CHECK(fs::exists(dir.str("out/run_manifest.json")));
}

TEST_CASE("missing input file exits 2 and names the path") {
    TempDir dir;
    int rc = run_cli("ingest --records " + dir.str("nope.csv") + " --window-start 2017-02-04 --out " +
                     dir.str("out"));
    CHECK(rc == 2);
}

TEST_CASE("rerun on the same input is byte-identical") {
    TempDir dir;
    write_text_file(dir.str("records.csv"), kSampleCsv);
    auto args = "ingest --records " + dir.str("records.csv") + " --window-start 2017-02-04 --out ";
    REQUIRE(run_cli(args + dir.str("out1")) == 0);
    REQUIRE(run_cli(args + dir.str("out2")) == 0);
    CHECK(read_text_file(dir.str("out1/snapshot.json")) == read_text_file(dir.str("out2/snapshot.json")));
    CHECK(read_text_file(dir.str("out1/degree_histogram.csv")) ==
          read_text_file(dir.str("out2/degree_histogram.csv")));
}

TEST_CASE("classify-ips needs both seed classes") {
    TempDir dir;
    write_text_file(dir.str("records.csv"), kSampleCsv);
    REQUIRE(run_cli("ingest --records " + dir.str("records.csv") +
                    " --window-start 2017-02-04 --out " + dir.str("out")) == 0);
    write_text_file(dir.str("pub.txt"), "10.0.0.1\n");
    write_text_file(dir.str("ded.txt"), "");
    int rc = run_cli("classify-ips --out " + dir.str("out") + " --psl " +
                     std::string(DOMINFER_DATA_DIR) + "/public_suffix_snapshot.dat" +
                     " --ip-seed-public " + dir.str("pub.txt") + " --ip-seed-dedicated " +
                     dir.str("ded.txt"));
    CHECK(rc == 2);
}

TEST_CASE("build-graph without labels exits 2 for the new scheme") {
    TempDir dir;
    write_text_file(dir.str("records.csv"), kSampleCsv);
    REQUIRE(run_cli("ingest --records " + dir.str("records.csv") +
                    " --window-start 2017-02-04 --out " + dir.str("out")) == 0);
    int rc = run_cli("build-graph --scheme new --out " + dir.str("out"));
    CHECK(rc == 2);
}

TEST_CASE("planted pipeline: synth -> ingest -> classify -> build -> infer -> eval") {
    TempDir dir;
    // keep the world small for test speed
    PipelineConfig synth_cfg;
    synth_cfg.out_dir = dir.str("data");
    synth_cfg.rng_seed = 900;
    synth_cfg.planted.campaigns = 4;
    synth_cfg.planted.campaign_domains = 12;
    synth_cfg.planted.entities = 30;
    synth_cfg.planted.singleton_entities = 12;
    synth_cfg.planted.noise_domains = 120;
    synth_cfg.planted.pool_ips = 30;
    REQUIRE(cmd_synth_planted(synth_cfg) == 0);

    PipelineConfig cfg;
    cfg.out_dir = dir.str("out");
    cfg.records = dir.str("data/records.csv");
    cfg.window_start = "2017-02-04";
    cfg.window_end = "2017-02-10";
    cfg.psl = std::string(DOMINFER_DATA_DIR) + "/public_suffix_snapshot.dat";
    cfg.as_map = dir.str("data/as_map.csv");
    cfg.ip_seed_public = dir.str("data/ip_seed_public.txt");
    cfg.ip_seed_dedicated = dir.str("data/ip_seed_dedicated.txt");
    cfg.truth_malicious = dir.str("data/malicious.txt");
    cfg.truth_benign = dir.str("data/benign.txt");
    cfg.rng_seed = 901;
    cfg.eval.repeats = 1;

    REQUIRE(cmd_ingest(cfg) == 0);
    REQUIRE(cmd_classify(cfg) == 0);
    REQUIRE(cmd_build_graph(cfg) == 0);
    REQUIRE(cmd_infer(cfg) == 0);
    REQUIRE(cmd_eval(cfg) == 0);

    // classifier output covers every IP of the snapshot
    auto labels = ip_labels_from_csv(read_text_file(cfg.ip_labels_path()));
    auto g = read_graph_snapshot(cfg.snapshot_path());
    CHECK(labels.size() == g.ips.size());

    // scores exist for seeds and score 1.0 under the path engine
    auto scores = scores_from_csv(read_text_file(cfg.out("scores.csv")));
    auto seeds = read_list_file(cfg.truth_malicious);
    std::size_t seed_hits = 0;
    for (const auto& s : seeds)
        if (scores.count(s) && scores.at(s) == 1.0) ++seed_hits;
    CHECK(seed_hits == seeds.size());

    // eval summary reports 10 rounds (10 folds x 1 repeat) and a high AUC
    auto summary = nlohmann::json::parse(read_text_file(cfg.out("summary.json")));
    CHECK(summary.at("rounds") == 10);
    CHECK(summary.at("auc").get<double>() >= 0.9);

    // roc grid is 0..1 step 0.01
    auto roc = read_text_file(cfg.out("roc.csv"));
    CHECK(std::count(roc.begin(), roc.end(), '\n') == 102);  // header + 101 grid points
}

TEST_CASE("bp engine over the induced bipartite graph") {
    TempDir dir;
    PipelineConfig synth_cfg;
    synth_cfg.out_dir = dir.str("data");
    synth_cfg.rng_seed = 910;
    synth_cfg.planted.campaigns = 3;
    synth_cfg.planted.campaign_domains = 8;
    synth_cfg.planted.entities = 15;
    synth_cfg.planted.singleton_entities = 6;
    synth_cfg.planted.noise_domains = 40;
    synth_cfg.planted.pool_ips = 18;
    REQUIRE(cmd_synth_planted(synth_cfg) == 0);

    PipelineConfig cfg;
    cfg.out_dir = dir.str("out");
    cfg.records = dir.str("data/records.csv");
    cfg.window_start = "2017-02-04";
    cfg.window_end = "2017-02-10";
    cfg.psl = std::string(DOMINFER_DATA_DIR) + "/public_suffix_snapshot.dat";
    cfg.as_map = dir.str("data/as_map.csv");
    cfg.ip_seed_public = dir.str("data/ip_seed_public.txt");
    cfg.ip_seed_dedicated = dir.str("data/ip_seed_dedicated.txt");
    cfg.truth_malicious = dir.str("data/malicious.txt");
    cfg.truth_benign = dir.str("data/benign.txt");
    cfg.rng_seed = 911;

    REQUIRE(cmd_ingest(cfg) == 0);
    REQUIRE(cmd_classify(cfg) == 0);
    cfg.scheme = "induced-bipartite";
    REQUIRE(cmd_build_graph(cfg) == 0);
    CHECK(fs::exists(cfg.out("induced_bipartite.json")));

    cfg.engine = "bp";
    REQUIRE(cmd_infer(cfg) == 0);
    auto csv = read_text_file(cfg.out("scores.csv"));
    CHECK(csv.rfind("domain,score,converged,iterations", 0) == 0);

    // the path engine refuses bipartite input
    cfg.engine = "path";
    CHECK_THROWS_AS(cmd_infer(cfg), InputError);
}

TEST_CASE("config files round-trip and flags override") {
    PipelineConfig cfg;
    cfg.records = "r.csv";
    cfg.rng_seed = 4242;
    cfg.scheme = "relaxed";
    cfg.bp.epsilon = 0.07;
    cfg.eval.folds = 5;
    auto j = cfg.to_json();
    auto back = PipelineConfig::from_json(j);
    CHECK(back.to_json().dump() == j.dump());

    TempDir dir;
    write_text_file(dir.str("config.json"), j.dump());
    auto loaded = PipelineConfig::load(dir.str("config.json"));
    CHECK(loaded.rng_seed == 4242);
    CHECK(loaded.scheme == "relaxed");
    CHECK(loaded.bp.epsilon == 0.07);
}

TEST_CASE("synth scale emits ingestible records at the requested factor") {
    TempDir dir;
    write_text_file(dir.str("records.csv"), kSampleCsv);
    REQUIRE(run_cli("ingest --records " + dir.str("records.csv") +
                    " --window-start 2017-02-04 --out " + dir.str("out")) == 0);
    REQUIRE(run_cli("synth scale --factor 3 --out " + dir.str("out")) == 0);
    REQUIRE(fs::exists(dir.str("out/synth_records.csv")));

    PipelineConfig cfg;
    cfg.records = dir.str("out/synth_records.csv");
    cfg.window_start = "2017-02-04";
    cfg.window_end = "2017-02-10";
    cfg.out_dir = dir.str("out2");
    REQUIRE(cmd_ingest(cfg) == 0);
    auto scaled = read_graph_snapshot(cfg.snapshot_path());
    auto original = read_graph_snapshot(dir.str("out/snapshot.json"));
    CHECK(scaled.edges.size() >= 2 * original.edges.size());
}
