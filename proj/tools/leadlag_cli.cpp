// Command-line front end: subcommands for ingestion checks, signal
// construction, trend/causality analysis, content association, hierarchy
// sweeps, interdisciplinary pairs, synthetic data, and chart rendering.
//
// Exit codes: 0 success, 1 usage error, 2 input validation failure,
// 3 internal numerical failure (diagnostic written to <out>/diagnostic.txt).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "leadlag/pipeline.hpp"

namespace {

void add_common_options(CLI::App* cmd, leadlag::RunConfig& config, std::string& years_arg,
                        std::string& config_path) {
    cmd->add_option("--docs", config.docs_path, "document file (one JSON record per line)");
    cmd->add_option("--taxonomy", config.taxonomy_path, "taxonomy file (one JSON record per line)");
    cmd->add_option("--embeddings", config.embeddings_path, "embedding file (JSONL or binary sidecar)");
    cmd->add_option("--coords", config.coords_path, "imported 2D coordinates (JSONL)");
    cmd->add_option("--years", years_arg, "analysis year range A:B")->default_str("2010:2021");
    cmd->add_option("--repr", config.repr, "signal representation: freq|impact|both")
        ->check(CLI::IsMember({"freq", "impact", "both"}));
    cmd->add_option("--metric", config.metric, "distance metric: tvd|hellinger|both")
        ->check(CLI::IsMember({"tvd", "hellinger", "both"}));
    cmd->add_option("--bins", config.bins, "grid bins per dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--bandwidth", config.bandwidth, "KDE bandwidth in bin units")->check(CLI::PositiveNumber);
    cmd->add_option("--max-lag", config.max_lag, "lag bound for cross-correlation and Granger")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--pareto-fraction", config.pareto_fraction, "fraction of most frequent pairs to keep");
    cmd->add_flag("--window-sweep", config.window_sweep, "rerun metrics for every sliding window");
    cmd->add_option("--seed", config.seed, "random seed for synthetic data");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--threads", config.threads, "worker threads (0 = hardware)")->envname("LEADLAG_THREADS");
    cmd->add_flag("--export-delta", config.export_delta, "write per-topic similarity matrices");
    cmd->add_flag("--global-bounds", config.global_bounds, "share one bounding box across year pairs");
    cmd->add_option("--config", config_path, "key=value defaults file (flags override)");
}

leadlag::YearRange parse_years(const std::string& arg) {
    auto colon = arg.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--years", "expected A:B");
    try {
        int first = std::stoi(arg.substr(0, colon));
        int last = std::stoi(arg.substr(colon + 1));
        if (last < first) throw CLI::ValidationError("--years", "end before start");
        return {first, last};
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--years", "expected integers A:B");
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key '" + key + "' expects a boolean, got '" + v + "'");
}

// Applies `key = value` lines to options the command line left untouched.
// Keys match the long option names without the leading dashes.
void apply_config_file(CLI::App* cmd, const std::string& path, leadlag::RunConfig& config,
                       std::string& years_arg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    auto untouched = [&](const char* flag) {
        auto* opt = cmd->get_option_no_throw(flag);
        return opt == nullptr || opt->count() == 0;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == '[') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));

        if (key == "docs" && untouched("--docs")) config.docs_path = value;
        else if (key == "taxonomy" && untouched("--taxonomy")) config.taxonomy_path = value;
        else if (key == "embeddings" && untouched("--embeddings")) config.embeddings_path = value;
        else if (key == "coords" && untouched("--coords")) config.coords_path = value;
        else if (key == "out" && untouched("--out")) config.out_dir = value;
        else if (key == "years" && untouched("--years")) years_arg = value;
        else if (key == "repr" && untouched("--repr")) config.repr = value;
        else if (key == "metric" && untouched("--metric")) config.metric = value;
        else if (key == "bins" && untouched("--bins")) config.bins = std::stoi(value);
        else if (key == "bandwidth" && untouched("--bandwidth")) config.bandwidth = std::stod(value);
        else if (key == "max-lag" && untouched("--max-lag")) config.max_lag = std::stoi(value);
        else if (key == "pareto-fraction" && untouched("--pareto-fraction"))
            config.pareto_fraction = std::stod(value);
        else if (key == "window-sweep" && untouched("--window-sweep"))
            config.window_sweep = parse_bool(value, key);
        else if (key == "seed" && untouched("--seed")) config.seed = std::stoull(value);
        else if (key == "threads" && untouched("--threads")) config.threads = static_cast<unsigned>(std::stoul(value));
        else if (key == "export-delta" && untouched("--export-delta"))
            config.export_delta = parse_bool(value, key);
        else if (key == "global-bounds" && untouched("--global-bounds"))
            config.global_bounds = parse_bool(value, key);
        else if (key == "synth-roots" && untouched("--synth-roots")) config.synth.n_root_topics = std::stoi(value);
        else if (key == "synth-branching" && untouched("--synth-branching"))
            config.synth.branching = std::stoi(value);
        else if (key == "synth-depth" && untouched("--synth-depth")) config.synth.depth = std::stoi(value);
        else if (key == "synth-lag" && untouched("--synth-lag")) config.synth.planted_lag = std::stoi(value);
        else if (key == "synth-noise" && untouched("--synth-noise")) config.synth.noise_level = std::stod(value);
        else if (key == "synth-docs" && untouched("--synth-docs"))
            config.synth.docs_per_topic_year = std::stoi(value);
        else if (key == "synth-dim" && untouched("--synth-dim")) config.synth.embedding_dim = std::stoi(value);
        else if (key == "synth-drift" && untouched("--synth-drift")) config.synth.cluster_drift = std::stod(value);
        else if (key == "docs" || key == "taxonomy" || key == "embeddings" || key == "coords" || key == "out" ||
                 key == "years" || key == "repr" || key == "metric" || key == "bins" || key == "bandwidth" ||
                 key == "max-lag" || key == "pareto-fraction" || key == "window-sweep" || key == "seed" ||
                 key == "threads" || key == "export-delta" || key == "global-bounds" ||
                 key.rfind("synth-", 0) == 0) {
            // known key, but the command line already set it
        } else {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lead-lag trend analysis between a science corpus and an industry corpus"};
    app.require_subcommand(1);

    leadlag::RunConfig config;
    std::string years_arg = "2010:2021";
    std::string config_path;

    auto* validate = app.add_subcommand("validate", "load and cross-check corpora and taxonomy");
    auto* signals = app.add_subcommand("signals", "export frequency and impact series per topic");
    auto* trend = app.add_subcommand("trend", "CCAUC ratios, MCC lags and Granger summary per topic");
    auto* granger = app.add_subcommand("granger", "per-lag Granger causality detail per topic");
    auto* content = app.add_subcommand("content", "embedding-space triangular ratios per topic");
    auto* hierarchy = app.add_subcommand("hierarchy", "depth and window sweeps plus root summaries");
    auto* pairs = app.add_subcommand("pairs", "interdisciplinary topic-pair pipeline");
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark corpus");
    auto* report = app.add_subcommand("report", "render charts from summary CSVs");

    for (auto* cmd : {validate, signals, trend, granger, content, hierarchy, pairs, synth, report})
        add_common_options(cmd, config, years_arg, config_path);

    synth->add_option("--synth-roots", config.synth.n_root_topics, "root topics");
    synth->add_option("--synth-branching", config.synth.branching, "children per node");
    synth->add_option("--synth-depth", config.synth.depth, "tree depth");
    synth->add_option("--synth-lag", config.synth.planted_lag, "planted science-to-industry lag");
    synth->add_option("--synth-noise", config.synth.noise_level, "industry count noise magnitude");
    synth->add_option("--synth-docs", config.synth.docs_per_topic_year, "documents per topic-year");
    synth->add_option("--synth-dim", config.synth.embedding_dim, "embedding dimension");
    synth->add_option("--synth-drift", config.synth.cluster_drift, "centroid drift per year");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (!config_path.empty()) {
        CLI::App* active = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        try {
            apply_config_file(active, config_path, config, years_arg);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 1;
        }
    }

    try {
        config.years = parse_years(years_arg);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto need = [&](CLI::App* cmd, bool docs, bool taxonomy) -> bool {
        if (!cmd->parsed()) return true;
        if (docs && config.docs_path.empty()) {
            std::cerr << "error: --docs is required for '" << cmd->get_name() << "'\n"
                      << cmd->help() << std::flush;
            return false;
        }
        if (taxonomy && config.taxonomy_path.empty()) {
            std::cerr << "error: --taxonomy is required for '" << cmd->get_name() << "'\n"
                      << cmd->help() << std::flush;
            return false;
        }
        return true;
    };
    for (auto* cmd : {validate, signals, trend, granger, content, hierarchy, pairs})
        if (!need(cmd, true, true)) return 1;

    try {
        if (validate->parsed()) leadlag::cmd_validate(config);
        if (signals->parsed()) leadlag::cmd_signals(config);
        if (trend->parsed()) leadlag::cmd_trend(config);
        if (granger->parsed()) leadlag::cmd_granger(config);
        if (content->parsed()) leadlag::cmd_content(config);
        if (hierarchy->parsed()) leadlag::cmd_hierarchy(config);
        if (pairs->parsed()) leadlag::cmd_pairs(config);
        if (synth->parsed()) leadlag::cmd_synth(config);
        if (report->parsed()) leadlag::cmd_report(config);
    } catch (const leadlag::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        std::error_code ec;
        std::filesystem::create_directories(config.out_dir, ec);
        std::ofstream diag(std::filesystem::path(config.out_dir) / "diagnostic.txt");
        if (diag) diag << e.what() << '\n';
        return 3;
    }
    return 0;
}
