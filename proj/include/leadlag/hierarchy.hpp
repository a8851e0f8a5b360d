#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leadlag/content.hpp"
#include "leadlag/trend.hpp"

namespace leadlag {

// Restricts a signal to its last w+1 years and re-applies min-max scaling on
// the restricted support. Accepts raw or scaled input (scaling is affine, so
// the rescaled restriction is identical either way).
TopicSignal window_restrict(const TopicSignal& signal, int w);

// Keeps the bottom-right (n - w) x (n - w) block: the most recent year pairs.
SimilarityMatrix window_restrict(const SimilarityMatrix& delta, int w);

struct DepthSummary {
    int depth = 0;
    std::string metric;  // ccauc_gt1_fraction | granger_sig_fraction | tr_gt1_fraction
    std::string variant; // representation or distance-metric name
    double mean = 0.0;   // NaN when topic_count == 0
    double std_over_windows = 0.0;
    int topic_count = 0;
};

// Fraction of the cumulative depth-d topic set satisfying a predicate, with
// the standard deviation of that fraction across window-restricted reruns.
// `full` maps analyzable topic -> predicate value on the full year range;
// `windows` holds one such map per sliding window. Topics absent from a map
// are excluded from that map's fraction.
std::vector<DepthSummary> depth_sweep(const Taxonomy& taxonomy, const std::map<std::string, bool>& full,
                                      const std::vector<std::map<std::string, bool>>& windows,
                                      const std::string& metric, const std::string& variant, int max_depth = kMaxDepth);

struct TopLevelLagSummary {
    std::string root_topic;
    double mean_mcc_lag = 0.0;
    double ccauc_gt1_fraction = 0.0;
    int topic_count = 0;
};

// Per root topic: mean MCC lag and CCAUC>1 fraction over the root plus all
// of its descendants, restricted to topics present in `results`.
std::vector<TopLevelLagSummary> top_level_lag_summary(const std::map<std::string, CCAUCResult>& results,
                                                      const Taxonomy& taxonomy);

// Everything the pipeline computes for one topic or pair on one year range.
struct AnalysisRecord {
    TopicKey topic;
    bool industry_present = false;         // matches at least one industry document
    std::optional<CCAUCResult> trend[2];   // by Representation
    std::optional<double> granger_min_p[2];
    int granger_best_lag[2] = {0, 0};
    int granger_feasible_lags[2] = {0, 0};
    std::optional<double> tr[2];           // by DistanceMetric
};

struct AnalysisOptions {
    std::vector<Representation> representations = {Representation::frequency, Representation::impact};
    std::vector<DistanceMetric> metrics = {DistanceMetric::tvd, DistanceMetric::hellinger};
    bool run_content = true;
    int max_lag = 11;
    ContentOptions content;
};

// One sliding-window rerun of the per-topic metrics. Unset values mean the
// window was invalid for the series length or the input was absent.
struct WindowOutcome {
    std::optional<double> ratio[2];    // by Representation
    std::optional<double> granger_min_p[2];
    bool granger_evaluated[2] = {false, false};
    std::optional<double> tr[2];       // by DistanceMetric
};

struct TopicAnalysis {
    AnalysisRecord full;
    std::vector<WindowOutcome> windows; // parallel to the requested window set
};

// Runs signal construction, CCAUC, Granger, and (optionally) the content
// pipeline for one topic/pair on the full range, then reruns the metrics for
// each sliding window: signals restricted to the last w+1 years and
// re-scaled, the similarity matrix restricted to its bottom-right block.
// `embeddings`/`coords` may be null; content results are set only when a
// similarity matrix could be built.
TopicAnalysis analyze_topic_sweep(const CorpusStore& store, const Taxonomy& taxonomy,
                                  const EmbeddingTable* embeddings, const CoordTable* coords, const TopicKey& key,
                                  const QuartileQuantizer& sci_quant, const QuartileQuantizer& ind_quant,
                                  const AnalysisOptions& options, const std::vector<int>& windows);

AnalysisRecord analyze_topic(const CorpusStore& store, const Taxonomy& taxonomy, const EmbeddingTable* embeddings,
                             const CoordTable* coords, const TopicKey& key, const QuartileQuantizer& sci_quant,
                             const QuartileQuantizer& ind_quant, const AnalysisOptions& options);

struct PairPipelineResult {
    std::vector<AnalysisRecord> records;
    std::vector<TopicPair> selected;
    std::vector<std::string> skipped; // pair labels with no matching documents
};

// Interdisciplinary pass: Pareto-selected topic pairs analyzed as
// pseudo-topics (a document must match both members, subtree semantics).
PairPipelineResult pair_pipeline(const CorpusStore& store, const Taxonomy& taxonomy,
                                 const EmbeddingTable* embeddings, const CoordTable* coords,
                                 const QuartileQuantizer& sci_quant, const QuartileQuantizer& ind_quant,
                                 double pareto_fraction, const AnalysisOptions& options, unsigned threads = 1);

} // namespace leadlag
