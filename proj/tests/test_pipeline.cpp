#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "leadlag/csv.hpp"
#include "leadlag/pipeline.hpp"

#include "helpers.hpp"

using namespace leadlag;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

// One small synthetic dataset shared by the pipeline tests.
struct Fixture {
    std::string data_dir;
    SynthOutput synth;

    Fixture() {
        data_dir = fresh_dir("pipe_data");
        SynthConfig cfg;
        cfg.seed = 7;
        cfg.n_root_topics = 6;
        cfg.branching = 3;
        cfg.depth = 2; // 24 topics
        cfg.planted_lag = 2;
        cfg.docs_per_topic_year = 30;
        cfg.embedding_dim = 5;
        synth = generate(cfg, data_dir);
    }

    RunConfig config(const std::string& out_dir) const {
        RunConfig rc;
        rc.docs_path = synth.documents_path;
        rc.taxonomy_path = synth.taxonomy_path;
        rc.embeddings_path = synth.embeddings_path;
        rc.out_dir = out_dir;
        rc.threads = 2;
        return rc;
    }
};

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

} // namespace

TEST_CASE("trend command writes the documented CSV schema and manifest defaults") {
    Fixture fx;
    auto out = fresh_dir("pipe_trend");
    cmd_trend(fx.config(out));

    auto csv = read_csv(out + "/trend.csv");
    CHECK(csv.header == std::vector<std::string>{"topic", "representation", "ccauc_ratio", "mcc_lag",
                                                 "granger_best_lag", "granger_min_p", "granger_feasible_lags"});
    CHECK(csv.rows.size() == 24 * 2); // 24 topics x both representations

    auto manifest = read_json(out + "/trend_manifest.json");
    CHECK(manifest["command"] == "trend");
    CHECK(manifest["config"]["years"][0] == 2010);
    CHECK(manifest["config"]["years"][1] == 2021);
    CHECK(manifest["config"]["bins"] == 20);
    CHECK(manifest["config"]["bandwidth"] == 0.8);
    CHECK(manifest["config"]["max_lag"] == 11);
    CHECK(manifest["config"]["pareto_fraction"] == 0.2);
    CHECK(manifest["config"]["windows"].size() == 11);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    CHECK(manifest["counts"]["selected_topics"] == 24);

    // planted lag 2 shows up in the CSV for every frequency row
    int c_lag = csv.column("mcc_lag");
    int c_repr = csv.column("representation");
    int c_ratio = csv.column("ccauc_ratio");
    for (const auto& row : csv.rows) {
        if (row[c_repr] != "frequency") continue;
        CHECK(row[c_lag] == "2");
        CHECK(std::stod(row[c_ratio]) > 1.0);
    }
}

TEST_CASE("signals, granger, content, hierarchy, and pairs commands produce their files") {
    Fixture fx;
    auto out = fresh_dir("pipe_all");
    RunConfig rc = fx.config(out);
    rc.window_sweep = true;

    cmd_signals(rc);
    CHECK(fs::exists(out + "/signals.csv"));
    auto signals = read_csv(out + "/signals.csv");
    CHECK(signals.header == std::vector<std::string>{"topic", "corpus", "representation", "year", "raw", "scaled"});
    CHECK(signals.rows.size() == 24 * 2 * 2 * 12);

    cmd_granger(rc);
    auto granger_csv = read_csv(out + "/granger.csv");
    CHECK(granger_csv.rows.size() == 24 * 2 * 11); // per topic, repr, lag

    cmd_content(rc);
    auto content = read_csv(out + "/content.csv");
    CHECK(content.header == std::vector<std::string>{"topic", "metric", "projection", "tr"});
    CHECK(content.rows.size() == 24 * 2); // both metrics

    cmd_hierarchy(rc);
    auto depth = read_csv(out + "/depth_summary.csv");
    CHECK(depth.header == std::vector<std::string>{"depth", "metric", "representation", "mean", "std", "topic_count"});
    // 2 reprs x 2 trend metrics x 2 depths + 2 distance metrics x 2 depths
    CHECK(depth.rows.size() == 2 * 2 * 2 + 2 * 2);
    auto root = read_csv(out + "/root_summary.csv");
    CHECK(root.header == std::vector<std::string>{"root_topic", "mean_mcc_lag", "ccauc_gt1_fraction"});
    CHECK(root.rows.size() == 6);

    cmd_pairs(rc);
    auto pairs = read_csv(out + "/pairs.csv");
    CHECK(pairs.header.front() == "topic_a");
    CHECK(!pairs.rows.empty());

    cmd_report(rc);
    CHECK(fs::exists(out + "/fig_depth_ccauc.svg"));
    CHECK(fs::exists(out + "/fig_depth_granger.svg"));
    CHECK(fs::exists(out + "/fig_depth_tr.svg"));
    CHECK(fs::exists(out + "/fig_root_mcc.svg"));
    auto svg = read_file(out + "/fig_root_mcc.svg");
    CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("csv outputs are byte-identical across thread counts") {
    Fixture fx;
    auto out1 = fresh_dir("pipe_t1");
    auto out8 = fresh_dir("pipe_t8");
    RunConfig rc1 = fx.config(out1);
    rc1.threads = 1;
    rc1.window_sweep = true;
    RunConfig rc8 = fx.config(out8);
    rc8.threads = 8;
    rc8.window_sweep = true;

    for (auto* rc : {&rc1, &rc8}) {
        cmd_trend(*rc);
        cmd_content(*rc);
        cmd_hierarchy(*rc);
        cmd_pairs(*rc);
    }
    for (const char* name : {"/trend.csv", "/content.csv", "/depth_summary.csv", "/root_summary.csv", "/pairs.csv"})
        CHECK(read_file(out1 + name) == read_file(out8 + name));
}

TEST_CASE("validate command writes its reports") {
    Fixture fx;
    auto out = fresh_dir("pipe_validate");
    cmd_validate(fx.config(out));
    CHECK(fs::exists(out + "/validation_report.txt"));
    CHECK(fs::exists(out + "/rejection_report.txt"));
    auto manifest = read_json(out + "/validate_manifest.json");
    CHECK(manifest["counts"]["unknown_topic_references"] == 0);
    CHECK(manifest["counts"]["rejected_records"] == 0);
}

TEST_CASE("report on an empty summary fails without partial charts") {
    auto out = fresh_dir("pipe_empty");
    write_lines(out, "depth_summary.csv", {"depth,metric,representation,mean,std,topic_count"});
    write_lines(out, "root_summary.csv", {"root_topic,mean_mcc_lag,ccauc_gt1_fraction"});
    RunConfig rc;
    rc.out_dir = out;
    CHECK_THROWS_AS(cmd_report(rc), InputError);
    CHECK(!fs::exists(out + "/fig_depth_ccauc.svg"));
    CHECK(!fs::exists(out + "/fig_root_mcc.svg"));
}

TEST_CASE("missing inputs are input errors") {
    RunConfig rc;
    rc.out_dir = fresh_dir("pipe_missing");
    CHECK_THROWS_AS(cmd_trend(rc), InputError);
    rc.docs_path = "/nonexistent/docs.jsonl";
    rc.taxonomy_path = "/nonexistent/tax.jsonl";
    CHECK_THROWS_AS(cmd_trend(rc), InputError);
}
