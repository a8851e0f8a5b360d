#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leadlag/hierarchy.hpp"
#include "leadlag/synth.hpp"

namespace leadlag {

// Run-wide configuration. Defaults follow the reference study: years
// 2010-2021, lags within +/-11, 20x20 grids, bandwidth 0.8, top-20% pairs,
// sliding windows 1..11.
struct RunConfig {
    std::string docs_path;
    std::string taxonomy_path;
    std::string embeddings_path;
    std::string coords_path;
    std::string out_dir = "out";

    YearRange years = {2010, 2021};
    std::string repr = "both";   // freq | impact | both
    std::string metric = "both"; // tvd | hellinger | both
    int bins = 20;
    double bandwidth = 0.8;
    int max_lag = 11;
    double pareto_fraction = 0.2;
    bool window_sweep = false;
    std::vector<int> windows = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    std::uint64_t seed = 42;
    unsigned threads = 0; // 0 = hardware concurrency
    bool export_delta = false;
    bool global_bounds = false;

    SynthConfig synth; // used by the synth command only

    std::vector<Representation> representations() const;
    std::vector<DistanceMetric> metrics() const;
    AnalysisOptions analysis_options() const;
    unsigned resolved_threads() const;
};

// Loaded inputs shared by the analysis commands. Topic selection follows the
// study's pre-filter: only topics whose subtree matches at least one industry
// document are analyzed.
struct AnalysisContext {
    CorpusStore store;
    Taxonomy taxonomy;
    LoadReport load_report;
    std::optional<EmbeddingTable> embeddings;
    std::optional<CoordTable> coords;
    QuartileQuantizer sci_quant;
    QuartileQuantizer ind_quant;
    std::vector<std::string> selected_topics;
    std::size_t excluded_topics = 0;

    const EmbeddingTable* embeddings_ptr() const { return embeddings ? &*embeddings : nullptr; }
    const CoordTable* coords_ptr() const { return coords ? &*coords : nullptr; }
};

AnalysisContext load_context(const RunConfig& config, bool want_embeddings);

// Command bodies shared by the CLI and the test harness. Each writes its CSV
// outputs plus <command>_manifest.json under config.out_dir and throws
// InputError / NumericError on failure (the CLI maps those to exit codes).
void cmd_validate(const RunConfig& config);
void cmd_signals(const RunConfig& config);
void cmd_trend(const RunConfig& config);
void cmd_granger(const RunConfig& config);
void cmd_content(const RunConfig& config);
void cmd_hierarchy(const RunConfig& config);
void cmd_pairs(const RunConfig& config);
void cmd_synth(const RunConfig& config);
void cmd_report(const RunConfig& config);

} // namespace leadlag
