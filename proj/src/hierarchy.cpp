#include "leadlag/hierarchy.hpp"

#include <algorithm>
#include <cmath>

#include "leadlag/parallel.hpp"

namespace leadlag {

TopicSignal window_restrict(const TopicSignal& signal, int w) {
    auto len = static_cast<int>(signal.values.size());
    if (w < 1 || w >= len) throw NumericError("window_restrict: window " + std::to_string(w) + " out of range");
    TopicSignal out = signal;
    out.years.first = signal.years.last - w;
    out.values.assign(signal.values.end() - (w + 1), signal.values.end());
    out.scaled = false;
    return minmax(out);
}

SimilarityMatrix window_restrict(const SimilarityMatrix& delta, int w) {
    if (w < 0 || w >= delta.n) throw NumericError("window_restrict: window " + std::to_string(w) + " out of range");
    int m = delta.n - w;
    SimilarityMatrix out;
    out.topic = delta.topic;
    out.metric = delta.metric;
    out.mode = delta.mode;
    out.n = m;
    out.years = {delta.years.first + w, delta.years.last};
    out.values.assign(static_cast<std::size_t>(m) * m, 0.0);
    out.mask.assign(static_cast<std::size_t>(m) * m, 0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            out.values[static_cast<std::size_t>(i) * m + j] = delta.at(i + w, j + w);
            out.mask[static_cast<std::size_t>(i) * m + j] = delta.present(i + w, j + w);
        }
    }
    return out;
}

namespace {

struct Fraction {
    double value = 0.0;
    int count = 0;
};

Fraction fraction_over(const std::vector<std::string>& topics, const std::map<std::string, bool>& predicate) {
    Fraction f;
    int hits = 0;
    for (const auto& t : topics) {
        auto it = predicate.find(t);
        if (it == predicate.end()) continue;
        ++f.count;
        hits += it->second ? 1 : 0;
    }
    f.value = f.count > 0 ? static_cast<double>(hits) / f.count : std::nan("");
    return f;
}

} // namespace

std::vector<DepthSummary> depth_sweep(const Taxonomy& taxonomy, const std::map<std::string, bool>& full,
                                      const std::vector<std::map<std::string, bool>>& windows,
                                      const std::string& metric, const std::string& variant, int max_depth) {
    std::vector<DepthSummary> out;
    max_depth = std::min(max_depth, kMaxDepth);
    for (int d = 1; d <= max_depth; ++d) {
        auto topics = taxonomy.topics_at_depth(d);
        DepthSummary s;
        s.depth = d;
        s.metric = metric;
        s.variant = variant;
        Fraction center = fraction_over(topics, full);
        s.mean = center.value;
        s.topic_count = center.count;

        if (!windows.empty()) {
            std::vector<double> values;
            values.reserve(windows.size());
            for (const auto& w : windows) {
                Fraction f = fraction_over(topics, w);
                if (f.count > 0) values.push_back(f.value);
            }
            if (values.size() > 1) {
                double mean = 0.0;
                for (double v : values) mean += v;
                mean /= static_cast<double>(values.size());
                double var = 0.0;
                for (double v : values) var += (v - mean) * (v - mean);
                s.std_over_windows = std::sqrt(var / static_cast<double>(values.size()));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TopLevelLagSummary> top_level_lag_summary(const std::map<std::string, CCAUCResult>& results,
                                                      const Taxonomy& taxonomy) {
    std::vector<TopLevelLagSummary> out;
    for (const auto& root : taxonomy.root_topics()) {
        TopLevelLagSummary s;
        s.root_topic = root;
        double lag_sum = 0.0;
        int gt1 = 0;
        for (const auto& id : taxonomy.descendants(root)) {
            auto it = results.find(id);
            if (it == results.end()) continue;
            ++s.topic_count;
            lag_sum += it->second.mcc_lag;
            gt1 += it->second.ratio > 1.0 ? 1 : 0;
        }
        if (s.topic_count > 0) {
            s.mean_mcc_lag = lag_sum / s.topic_count;
            s.ccauc_gt1_fraction = static_cast<double>(gt1) / s.topic_count;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// min feasible p-value and the lag achieving it; evaluated = any lag ran.
struct GrangerSummary {
    std::optional<double> min_p;
    int best_lag = 0;
    int feasible = 0;
};

GrangerSummary summarize_granger(const TopicSignal& sci, const TopicSignal& ind, int max_lag) {
    GrangerSummary s;
    if (sci.values.size() < 4) return s;
    for (const auto& g : granger(sci, ind, max_lag)) {
        if (!g.feasible) continue;
        s.feasible += 1;
        if (!s.min_p || g.p_value < *s.min_p) {
            s.min_p = g.p_value;
            s.best_lag = g.lag_order;
        }
    }
    return s;
}

} // namespace

TopicAnalysis analyze_topic_sweep(const CorpusStore& store, const Taxonomy& taxonomy,
                                  const EmbeddingTable* embeddings, const CoordTable* coords, const TopicKey& key,
                                  const QuartileQuantizer& sci_quant, const QuartileQuantizer& ind_quant,
                                  const AnalysisOptions& options, const std::vector<int>& windows) {
    TopicAnalysis out;
    out.full.topic = key;
    out.windows.assign(windows.size(), {});
    int span = store.years().span();

    auto mask = match_mask(store, taxonomy, key);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] && store.documents()[i].corpus == Corpus::industry) {
            out.full.industry_present = true;
            break;
        }
    }

    for (Representation repr : options.representations) {
        int ri = static_cast<int>(repr);
        TopicSignal sci_raw, ind_raw;
        if (repr == Representation::frequency) {
            sci_raw = frequency_signal(store, taxonomy, key, Corpus::science);
            ind_raw = frequency_signal(store, taxonomy, key, Corpus::industry);
        } else {
            sci_raw = impact_signal(store, taxonomy, key, Corpus::science, sci_quant);
            ind_raw = impact_signal(store, taxonomy, key, Corpus::industry, ind_quant);
        }
        TopicSignal sci = minmax(sci_raw);
        TopicSignal ind = minmax(ind_raw);

        out.full.trend[ri] = ccauc(cross_correlate(sci, ind));
        GrangerSummary g = summarize_granger(sci, ind, options.max_lag);
        out.full.granger_min_p[ri] = g.min_p;
        out.full.granger_best_lag[ri] = g.best_lag;
        out.full.granger_feasible_lags[ri] = g.feasible;

        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
            int w = windows[wi];
            if (w < 1 || w >= span) continue;
            TopicSignal sci_w = window_restrict(sci_raw, w);
            TopicSignal ind_w = window_restrict(ind_raw, w);
            out.windows[wi].ratio[ri] = ccauc(cross_correlate(sci_w, ind_w)).ratio;
            GrangerSummary gw = summarize_granger(sci_w, ind_w, options.max_lag);
            out.windows[wi].granger_min_p[ri] = gw.min_p;
            out.windows[wi].granger_evaluated[ri] = true;
        }
    }

    if (options.run_content && (embeddings || coords)) {
        try {
            auto deltas = similarity_matrices(store, taxonomy, embeddings, coords, key, options.metrics, sci_quant,
                                              ind_quant, options.content);
            for (const auto& delta : deltas) {
                int mi = static_cast<int>(delta.metric);
                out.full.tr[mi] = triangular_ratio(delta).tr;
                for (std::size_t wi = 0; wi < windows.size(); ++wi) {
                    int w = windows[wi];
                    if (w < 1 || w >= delta.n) continue;
                    out.windows[wi].tr[mi] = triangular_ratio(window_restrict(delta, w)).tr;
                }
            }
        } catch (const NumericError&) {
            // topic has no embeddable documents; content stays unset
        }
    }
    return out;
}

AnalysisRecord analyze_topic(const CorpusStore& store, const Taxonomy& taxonomy, const EmbeddingTable* embeddings,
                             const CoordTable* coords, const TopicKey& key, const QuartileQuantizer& sci_quant,
                             const QuartileQuantizer& ind_quant, const AnalysisOptions& options) {
    return analyze_topic_sweep(store, taxonomy, embeddings, coords, key, sci_quant, ind_quant, options, {}).full;
}

PairPipelineResult pair_pipeline(const CorpusStore& store, const Taxonomy& taxonomy,
                                 const EmbeddingTable* embeddings, const CoordTable* coords,
                                 const QuartileQuantizer& sci_quant, const QuartileQuantizer& ind_quant,
                                 double pareto_fraction, const AnalysisOptions& options, unsigned threads) {
    PairPipelineResult result;
    result.selected = pareto_pairs(store, pareto_fraction);

    std::vector<AnalysisRecord> records(result.selected.size());
    std::vector<char> has_docs(result.selected.size(), 0);
    parallel_for(result.selected.size(), threads, [&](std::size_t i) {
        TopicKey key = TopicKey::pair(result.selected[i].a, result.selected[i].b);
        auto mask = match_mask(store, taxonomy, key);
        if (std::find(mask.begin(), mask.end(), 1) == mask.end()) return;
        has_docs[i] = 1;
        records[i] = analyze_topic(store, taxonomy, embeddings, coords, key, sci_quant, ind_quant, options);
    });

    for (std::size_t i = 0; i < records.size(); ++i) {
        if (has_docs[i])
            result.records.push_back(std::move(records[i]));
        else
            result.skipped.push_back(result.selected[i].a + "|" + result.selected[i].b);
    }
    return result;
}

} // namespace leadlag
