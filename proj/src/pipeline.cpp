#include "leadlag/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "leadlag/csv.hpp"
#include "leadlag/parallel.hpp"
#include "run_manifest.hpp"

namespace leadlag {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using detail::StageTimer;
using detail::write_manifest;

std::vector<Representation> RunConfig::representations() const {
    if (repr == "freq") return {Representation::frequency};
    if (repr == "impact") return {Representation::impact};
    if (repr == "both") return {Representation::frequency, Representation::impact};
    throw InputError("unknown representation selection: " + repr);
}

std::vector<DistanceMetric> RunConfig::metrics() const {
    if (metric == "tvd") return {DistanceMetric::tvd};
    if (metric == "hellinger") return {DistanceMetric::hellinger};
    if (metric == "both") return {DistanceMetric::tvd, DistanceMetric::hellinger};
    throw InputError("unknown metric selection: " + metric);
}

AnalysisOptions RunConfig::analysis_options() const {
    AnalysisOptions opts;
    opts.representations = representations();
    opts.metrics = metrics();
    opts.max_lag = max_lag;
    opts.content.bins1 = bins;
    opts.content.bins2 = bins;
    opts.content.bandwidth = bandwidth;
    opts.content.per_pair_bounds = !global_bounds;
    return opts;
}

unsigned RunConfig::resolved_threads() const {
    return threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string out_file(const RunConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

void require_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw InputError("cannot create output directory: " + config.out_dir);
}

std::uint32_t peek_embedding_dimension(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open embedding file: " + path);
    char magic[8] = {};
    in.read(magic, 8);
    if (in.gcount() == 8 && std::string_view(magic, 8) == "LLEMB001") {
        std::uint32_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), 4);
        if (!in) throw InputError("bad embedding header: " + path);
        return dim;
    }
    in.clear();
    in.seekg(0);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("vector") || !rec["vector"].is_array())
            throw InputError("malformed embedding record in " + path);
        return static_cast<std::uint32_t>(rec["vector"].size());
    }
    throw InputError("empty embedding file: " + path);
}

} // namespace

AnalysisContext load_context(const RunConfig& config, bool want_embeddings) {
    if (config.docs_path.empty()) throw InputError("no document file given");
    if (config.taxonomy_path.empty()) throw InputError("no taxonomy file given");

    AnalysisContext ctx;
    ctx.store = load_documents(config.docs_path, config.years, &ctx.load_report);
    ctx.taxonomy = load_taxonomy(config.taxonomy_path);

    if (want_embeddings) {
        if (!config.coords_path.empty()) ctx.coords = import_projection(config.coords_path);
        if (!config.embeddings_path.empty())
            ctx.embeddings =
                load_embeddings(config.embeddings_path, peek_embedding_dimension(config.embeddings_path), &ctx.store);
    }

    ctx.sci_quant = build_quantizer(ctx.store, ctx.taxonomy, Corpus::science);
    ctx.ind_quant = build_quantizer(ctx.store, ctx.taxonomy, Corpus::industry);

    // Study pre-filter: keep topics whose subtree matches >= 1 industry doc.
    std::vector<char> industry_annotated(ctx.taxonomy.size(), 0);
    for (const auto& doc : ctx.store.documents()) {
        if (doc.corpus != Corpus::industry) continue;
        for (const auto& t : doc.topics)
            if (ctx.taxonomy.contains(t)) industry_annotated[ctx.taxonomy.node_index(t)] = 1;
    }
    for (const auto& node : ctx.taxonomy.nodes()) {
        bool present = false;
        for (auto d : ctx.taxonomy.descendant_indices(ctx.taxonomy.node_index(node.id))) {
            if (industry_annotated[d]) {
                present = true;
                break;
            }
        }
        if (present)
            ctx.selected_topics.push_back(node.id);
        else
            ctx.excluded_topics += 1;
    }
    std::sort(ctx.selected_topics.begin(), ctx.selected_topics.end());
    return ctx;
}

namespace {

ordered_json load_counts(const AnalysisContext& ctx) {
    ordered_json j;
    j["documents_science"] = ctx.load_report.accepted[0];
    j["documents_industry"] = ctx.load_report.accepted[1];
    j["rejected_records"] = ctx.load_report.rejections.size();
    j["taxonomy_topics"] = ctx.taxonomy.size();
    j["selected_topics"] = ctx.selected_topics.size();
    j["excluded_topics"] = ctx.excluded_topics;
    if (ctx.embeddings) j["embeddings"] = ctx.embeddings->size();
    if (ctx.coords) j["imported_coordinates"] = ctx.coords->size();
    return j;
}

void write_rejections(const RunConfig& config, const AnalysisContext& ctx, std::vector<std::string>& outputs) {
    std::string path = out_file(config, "rejection_report.txt");
    write_rejection_report(ctx.load_report, path);
    outputs.push_back(path);
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

} // namespace

void cmd_validate(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    AnalysisContext ctx = load_context(config, !config.embeddings_path.empty() || !config.coords_path.empty());
    timer.mark("load");

    ValidationReport report = validate(ctx.store, ctx.taxonomy);
    std::vector<std::string> outputs;
    std::string report_path = out_file(config, "validation_report.txt");
    write_validation_report(report, report_path);
    outputs.push_back(report_path);
    write_rejections(config, ctx, outputs);
    timer.mark("validate");

    ordered_json counts = load_counts(ctx);
    counts["unknown_topic_references"] = report.unknown_topics.size();
    write_manifest(config, "validate", counts, timer.timings, outputs);
}

void cmd_signals(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    AnalysisContext ctx = load_context(config, false);
    timer.mark("load");

    auto reprs = config.representations();
    const auto& topics = ctx.selected_topics;
    struct Row {
        std::vector<TopicSignal> raw, scaled;
    };
    std::vector<Row> rows(topics.size());
    parallel_for(topics.size(), config.resolved_threads(), [&](std::size_t i) {
        TopicKey key = TopicKey::single(topics[i]);
        for (Representation repr : reprs) {
            for (Corpus corpus : {Corpus::science, Corpus::industry}) {
                TopicSignal raw = repr == Representation::frequency
                                      ? frequency_signal(ctx.store, ctx.taxonomy, key, corpus)
                                      : impact_signal(ctx.store, ctx.taxonomy, key, corpus,
                                                      corpus == Corpus::science ? ctx.sci_quant : ctx.ind_quant);
                rows[i].scaled.push_back(minmax(raw));
                rows[i].raw.push_back(std::move(raw));
            }
        }
    });
    timer.mark("signals");

    std::vector<TopicSignal> raw, scaled;
    for (auto& row : rows) {
        raw.insert(raw.end(), std::make_move_iterator(row.raw.begin()), std::make_move_iterator(row.raw.end()));
        scaled.insert(scaled.end(), std::make_move_iterator(row.scaled.begin()),
                      std::make_move_iterator(row.scaled.end()));
    }
    std::string csv_path = out_file(config, "signals.csv");
    export_signals_csv(raw, scaled, csv_path);
    std::vector<std::string> outputs = {csv_path};
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    ordered_json counts = load_counts(ctx);
    counts["signal_rows"] = raw.size() * static_cast<std::size_t>(ctx.store.years().span());
    write_manifest(config, "signals", counts, timer.timings, outputs);
}

namespace {

std::vector<AnalysisRecord> run_trend_records(const RunConfig& config, const AnalysisContext& ctx,
                                              bool with_content) {
    AnalysisOptions opts = config.analysis_options();
    opts.run_content = with_content;
    const auto& topics = ctx.selected_topics;
    std::vector<AnalysisRecord> records(topics.size());
    parallel_for(topics.size(), config.resolved_threads(), [&](std::size_t i) {
        records[i] = analyze_topic(ctx.store, ctx.taxonomy, ctx.embeddings_ptr(), ctx.coords_ptr(),
                                   TopicKey::single(topics[i]), ctx.sci_quant, ctx.ind_quant, opts);
    });
    return records;
}

void write_trend_csv(const std::vector<AnalysisRecord>& records, const std::vector<Representation>& reprs,
                     const std::string& path) {
    CsvWriter csv(path, {"topic", "representation", "ccauc_ratio", "mcc_lag", "granger_best_lag", "granger_min_p",
                         "granger_feasible_lags"});
    for (const auto& rec : records) {
        for (Representation repr : reprs) {
            int ri = static_cast<int>(repr);
            if (!rec.trend[ri]) continue;
            csv.write_row({rec.topic.label(), representation_name(repr), format_double(rec.trend[ri]->ratio),
                           std::to_string(rec.trend[ri]->mcc_lag), std::to_string(rec.granger_best_lag[ri]),
                           opt_double(rec.granger_min_p[ri]), std::to_string(rec.granger_feasible_lags[ri])});
        }
    }
}

ordered_json trend_summary(const std::vector<AnalysisRecord>& records, const std::vector<Representation>& reprs) {
    ordered_json j;
    for (Representation repr : reprs) {
        int ri = static_cast<int>(repr);
        std::size_t total = 0, gt1 = 0, sig = 0, tested = 0;
        for (const auto& rec : records) {
            if (!rec.trend[ri]) continue;
            ++total;
            gt1 += rec.trend[ri]->ratio > 1.0 ? 1 : 0;
            ++tested;
            sig += rec.granger_min_p[ri] && *rec.granger_min_p[ri] < 0.05 ? 1 : 0;
        }
        ordered_json r;
        r["topics"] = total;
        r["ccauc_gt1_fraction"] = total ? static_cast<double>(gt1) / total : 0.0;
        r["granger_sig_fraction"] = tested ? static_cast<double>(sig) / tested : 0.0;
        j[representation_name(repr)] = r;
    }
    return j;
}

} // namespace

void cmd_trend(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    AnalysisContext ctx = load_context(config, false);
    timer.mark("load");

    auto records = run_trend_records(config, ctx, false);
    timer.mark("analyze");

    std::string csv_path = out_file(config, "trend.csv");
    write_trend_csv(records, config.representations(), csv_path);
    std::vector<std::string> outputs = {csv_path};
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    ordered_json counts = load_counts(ctx);
    counts["summary"] = trend_summary(records, config.representations());
    write_manifest(config, "trend", counts, timer.timings, outputs);
}

void cmd_granger(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    AnalysisContext ctx = load_context(config, false);
    timer.mark("load");

    auto reprs = config.representations();
    const auto& topics = ctx.selected_topics;
    struct PerTopic {
        std::vector<std::vector<GrangerResult>> by_repr;
    };
    std::vector<PerTopic> results(topics.size());
    parallel_for(topics.size(), config.resolved_threads(), [&](std::size_t i) {
        TopicKey key = TopicKey::single(topics[i]);
        for (Representation repr : reprs) {
            TopicSignal sci, ind;
            if (repr == Representation::frequency) {
                sci = minmax(frequency_signal(ctx.store, ctx.taxonomy, key, Corpus::science));
                ind = minmax(frequency_signal(ctx.store, ctx.taxonomy, key, Corpus::industry));
            } else {
                sci = minmax(impact_signal(ctx.store, ctx.taxonomy, key, Corpus::science, ctx.sci_quant));
                ind = minmax(impact_signal(ctx.store, ctx.taxonomy, key, Corpus::industry, ctx.ind_quant));
            }
            results[i].by_repr.push_back(granger(sci, ind, config.max_lag));
        }
    });
    timer.mark("analyze");

    std::string csv_path = out_file(config, "granger.csv");
    CsvWriter csv(csv_path, {"topic", "representation", "lag", "statistic", "p_value", "feasible"});
    for (std::size_t i = 0; i < topics.size(); ++i) {
        for (std::size_t r = 0; r < reprs.size(); ++r) {
            for (const auto& g : results[i].by_repr[r]) {
                csv.write_row({topics[i], representation_name(reprs[r]), std::to_string(g.lag_order),
                               g.feasible ? format_double(g.statistic) : "nan",
                               g.feasible ? format_double(g.p_value) : "nan", g.feasible ? "1" : "0"});
            }
        }
    }
    std::vector<std::string> outputs = {csv_path};
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    write_manifest(config, "granger", load_counts(ctx), timer.timings, outputs);
}

void cmd_content(const RunConfig& config) {
    require_out_dir(config);
    if (config.embeddings_path.empty() && config.coords_path.empty())
        throw InputError("content analysis needs --embeddings or --coords");
    StageTimer timer;
    AnalysisContext ctx = load_context(config, true);
    timer.mark("load");

    auto metrics = config.metrics();
    AnalysisOptions opts = config.analysis_options();
    const auto& topics = ctx.selected_topics;

    struct PerTopic {
        std::vector<SimilarityMatrix> deltas;
        bool ok = false;
    };
    std::vector<PerTopic> results(topics.size());
    parallel_for(topics.size(), config.resolved_threads(), [&](std::size_t i) {
        try {
            results[i].deltas =
                similarity_matrices(ctx.store, ctx.taxonomy, ctx.embeddings_ptr(), ctx.coords_ptr(),
                                    TopicKey::single(topics[i]), metrics, ctx.sci_quant, ctx.ind_quant, opts.content);
            results[i].ok = true;
        } catch (const NumericError&) {
            // no embeddable documents for this topic
        }
    });
    timer.mark("analyze");

    std::string csv_path = out_file(config, "content.csv");
    CsvWriter csv(csv_path, {"topic", "metric", "projection", "tr"});
    std::vector<std::string> outputs = {csv_path};
    std::size_t analyzed = 0, skipped = 0, tr_gt1 = 0;
    for (std::size_t i = 0; i < topics.size(); ++i) {
        if (!results[i].ok) {
            ++skipped;
            continue;
        }
        ++analyzed;
        for (const auto& delta : results[i].deltas) {
            TrResult tr = triangular_ratio(delta);
            csv.write_row({topics[i], metric_name(delta.metric),
                           delta.mode == ProjectionMode::pca ? "pca" : "imported", format_double(tr.tr)});
            tr_gt1 += tr.tr > 1.0 ? 1 : 0;
            if (config.export_delta) {
                std::string base = "delta_" + topics[i] + "_" + metric_name(delta.metric);
                std::string values_path = out_file(config, base + ".csv");
                std::string mask_path = out_file(config, base + "_mask.csv");
                export_similarity_csv(delta, values_path, mask_path);
                outputs.push_back(values_path);
                outputs.push_back(mask_path);
            }
        }
    }
    csv.close();
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    ordered_json counts = load_counts(ctx);
    counts["content_topics"] = analyzed;
    counts["content_skipped"] = skipped;
    counts["tr_gt1_rows"] = tr_gt1;
    write_manifest(config, "content", counts, timer.timings, outputs);
}

void cmd_hierarchy(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    bool want_embeddings = !config.embeddings_path.empty() || !config.coords_path.empty();
    AnalysisContext ctx = load_context(config, want_embeddings);
    timer.mark("load");

    AnalysisOptions opts = config.analysis_options();
    opts.run_content = want_embeddings;
    std::vector<int> windows;
    if (config.window_sweep)
        for (int w : config.windows)
            if (w >= 1 && w < ctx.store.years().span()) windows.push_back(w);

    const auto& topics = ctx.selected_topics;
    std::vector<TopicAnalysis> analyses(topics.size());
    parallel_for(topics.size(), config.resolved_threads(), [&](std::size_t i) {
        analyses[i] = analyze_topic_sweep(ctx.store, ctx.taxonomy, ctx.embeddings_ptr(), ctx.coords_ptr(),
                                          TopicKey::single(topics[i]), ctx.sci_quant, ctx.ind_quant, opts, windows);
    });
    timer.mark("analyze");

    std::vector<DepthSummary> summaries;
    int max_depth = ctx.taxonomy.max_depth();
    for (Representation repr : opts.representations) {
        int ri = static_cast<int>(repr);
        std::map<std::string, bool> ccauc_full, granger_full;
        std::vector<std::map<std::string, bool>> ccauc_windows(windows.size()), granger_windows(windows.size());
        for (std::size_t i = 0; i < topics.size(); ++i) {
            const auto& full = analyses[i].full;
            if (full.trend[ri]) ccauc_full[topics[i]] = full.trend[ri]->ratio > 1.0;
            if (full.trend[ri])
                granger_full[topics[i]] = full.granger_min_p[ri] && *full.granger_min_p[ri] < 0.05;
            for (std::size_t wi = 0; wi < windows.size(); ++wi) {
                const auto& w = analyses[i].windows[wi];
                if (w.ratio[ri]) ccauc_windows[wi][topics[i]] = *w.ratio[ri] > 1.0;
                if (w.granger_evaluated[ri])
                    granger_windows[wi][topics[i]] = w.granger_min_p[ri] && *w.granger_min_p[ri] < 0.05;
            }
        }
        auto c = depth_sweep(ctx.taxonomy, ccauc_full, ccauc_windows, "ccauc_gt1_fraction",
                             representation_name(repr), max_depth);
        auto g = depth_sweep(ctx.taxonomy, granger_full, granger_windows, "granger_sig_fraction",
                             representation_name(repr), max_depth);
        summaries.insert(summaries.end(), c.begin(), c.end());
        summaries.insert(summaries.end(), g.begin(), g.end());
    }
    if (want_embeddings) {
        for (DistanceMetric metric : opts.metrics) {
            int mi = static_cast<int>(metric);
            std::map<std::string, bool> tr_full;
            std::vector<std::map<std::string, bool>> tr_windows(windows.size());
            for (std::size_t i = 0; i < topics.size(); ++i) {
                if (analyses[i].full.tr[mi]) tr_full[topics[i]] = *analyses[i].full.tr[mi] > 1.0;
                for (std::size_t wi = 0; wi < windows.size(); ++wi)
                    if (analyses[i].windows[wi].tr[mi])
                        tr_windows[wi][topics[i]] = *analyses[i].windows[wi].tr[mi] > 1.0;
            }
            auto t = depth_sweep(ctx.taxonomy, tr_full, tr_windows, "tr_gt1_fraction", metric_name(metric),
                                 max_depth);
            summaries.insert(summaries.end(), t.begin(), t.end());
        }
    }

    std::string depth_path = out_file(config, "depth_summary.csv");
    {
        CsvWriter csv(depth_path, {"depth", "metric", "representation", "mean", "std", "topic_count"});
        for (const auto& s : summaries)
            csv.write_row({std::to_string(s.depth), s.metric, s.variant, format_double(s.mean),
                           format_double(s.std_over_windows), std::to_string(s.topic_count)});
    }
    std::vector<std::string> outputs = {depth_path};

    // Per-root MCC lag summary over the impact representation.
    bool have_impact = std::find(opts.representations.begin(), opts.representations.end(),
                                 Representation::impact) != opts.representations.end();
    if (have_impact) {
        std::map<std::string, CCAUCResult> impact_results;
        for (std::size_t i = 0; i < topics.size(); ++i) {
            const auto& t = analyses[i].full.trend[static_cast<int>(Representation::impact)];
            if (t) impact_results[topics[i]] = *t;
        }
        auto roots = top_level_lag_summary(impact_results, ctx.taxonomy);
        std::string root_path = out_file(config, "root_summary.csv");
        CsvWriter csv(root_path, {"root_topic", "mean_mcc_lag", "ccauc_gt1_fraction"});
        for (const auto& r : roots)
            csv.write_row({r.root_topic, format_double(r.mean_mcc_lag), format_double(r.ccauc_gt1_fraction)});
        outputs.push_back(root_path);
    }
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    ordered_json counts = load_counts(ctx);
    counts["depth_rows"] = summaries.size();
    counts["windows_used"] = windows.size();
    write_manifest(config, "hierarchy", counts, timer.timings, outputs);
}

void cmd_pairs(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    bool want_embeddings = !config.embeddings_path.empty() || !config.coords_path.empty();
    AnalysisContext ctx = load_context(config, want_embeddings);
    timer.mark("load");

    AnalysisOptions opts = config.analysis_options();
    opts.run_content = want_embeddings;
    PairPipelineResult result = pair_pipeline(ctx.store, ctx.taxonomy, ctx.embeddings_ptr(), ctx.coords_ptr(),
                                              ctx.sci_quant, ctx.ind_quant, config.pareto_fraction, opts,
                                              config.resolved_threads());
    timer.mark("analyze");

    std::string csv_path = out_file(config, "pairs.csv");
    {
        CsvWriter csv(csv_path, {"topic_a", "topic_b", "representation", "ccauc_ratio", "mcc_lag",
                                 "granger_best_lag", "granger_min_p", "granger_feasible_lags", "tr_tvd",
                                 "tr_hellinger"});
        for (const auto& rec : result.records) {
            for (Representation repr : opts.representations) {
                int ri = static_cast<int>(repr);
                if (!rec.trend[ri]) continue;
                csv.write_row({rec.topic.a, rec.topic.b, representation_name(repr),
                               format_double(rec.trend[ri]->ratio), std::to_string(rec.trend[ri]->mcc_lag),
                               std::to_string(rec.granger_best_lag[ri]), opt_double(rec.granger_min_p[ri]),
                               std::to_string(rec.granger_feasible_lags[ri]),
                               opt_double(rec.tr[static_cast<int>(DistanceMetric::tvd)]),
                               opt_double(rec.tr[static_cast<int>(DistanceMetric::hellinger)])});
            }
        }
    }
    std::vector<std::string> outputs = {csv_path};

    std::string skipped_path = out_file(config, "pairs_skipped.txt");
    {
        std::ofstream out(skipped_path, std::ios::binary);
        for (const auto& label : result.skipped) out << label << '\n';
    }
    outputs.push_back(skipped_path);
    write_rejections(config, ctx, outputs);
    timer.mark("write");

    ordered_json counts = load_counts(ctx);
    counts["pairs_selected"] = result.selected.size();
    counts["pairs_analyzed"] = result.records.size();
    counts["pairs_skipped"] = result.skipped.size();
    std::vector<AnalysisRecord> industry_present;
    for (const auto& rec : result.records)
        if (rec.industry_present) industry_present.push_back(rec);
    counts["pairs_industry_present"] = industry_present.size();
    counts["summary"] = trend_summary(industry_present, opts.representations);
    write_manifest(config, "pairs", counts, timer.timings, outputs);
}

void cmd_synth(const RunConfig& config) {
    require_out_dir(config);
    StageTimer timer;
    SynthConfig synth = config.synth;
    synth.seed = config.seed;
    synth.years = config.years;
    SynthOutput out = generate(synth, config.out_dir);
    timer.mark("generate");

    ordered_json counts;
    counts["topics"] = out.n_topics;
    counts["documents"] = out.n_documents;
    write_manifest(config, "synth", counts, timer.timings,
                   {out.taxonomy_path, out.documents_path, out.embeddings_path, out.manifest_path});
}

} // namespace leadlag
