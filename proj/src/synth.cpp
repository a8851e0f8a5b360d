#include "leadlag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "leadlag/corpus.hpp"
#include "leadlag/csv.hpp"
#include "leadlag/rng.hpp"
#include "leadlag/taxonomy.hpp"

namespace leadlag {

namespace {

struct SynthTopic {
    std::string id;
    std::string tree_number;
    int parent = -1;
    std::vector<int> siblings; // same-parent peers, excluding self
};

// Fixed-shape tree: n_root_topics roots, `branching` children per node down
// to `depth` levels, breadth-first ids T0000, T0001, ...
std::vector<SynthTopic> build_tree(const SynthConfig& cfg) {
    std::vector<SynthTopic> topics;
    std::vector<std::vector<int>> levels;

    char buf[16];
    auto topic_id = [&](std::size_t n) {
        std::snprintf(buf, sizeof(buf), "T%04zu", n);
        return std::string(buf);
    };
    auto segment = [&](int sibling_index) {
        std::snprintf(buf, sizeof(buf), "%03d", sibling_index + 1);
        return std::string(buf);
    };

    levels.emplace_back();
    for (int r = 0; r < cfg.n_root_topics; ++r) {
        SynthTopic t;
        t.id = topic_id(topics.size());
        t.tree_number = segment(r);
        levels[0].push_back(static_cast<int>(topics.size()));
        topics.push_back(std::move(t));
    }
    for (int d = 1; d < cfg.depth; ++d) {
        levels.emplace_back();
        for (int parent : levels[static_cast<std::size_t>(d - 1)]) {
            for (int c = 0; c < cfg.branching; ++c) {
                SynthTopic t;
                t.id = topic_id(topics.size());
                t.tree_number = topics[static_cast<std::size_t>(parent)].tree_number + "." + segment(c);
                t.parent = parent;
                levels[static_cast<std::size_t>(d)].push_back(static_cast<int>(topics.size()));
                topics.push_back(std::move(t));
            }
        }
    }

    // Sibling sets for secondary-topic assignment (roots are mutual siblings).
    std::vector<std::vector<int>> by_parent;
    by_parent.resize(topics.size() + 1);
    for (std::size_t i = 0; i < topics.size(); ++i)
        by_parent[static_cast<std::size_t>(topics[i].parent + 1)].push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < topics.size(); ++i) {
        for (int peer : by_parent[static_cast<std::size_t>(topics[i].parent + 1)])
            if (peer != static_cast<int>(i)) topics[i].siblings.push_back(peer);
    }
    return topics;
}

struct TemplateDoc {
    int primary = 0;
    int secondary = -1;
};

} // namespace

SynthOutput generate(const SynthConfig& cfg, const std::string& out_dir) {
    if (cfg.n_root_topics < 1 || cfg.branching < 1 || cfg.depth < 1 || cfg.depth > kMaxDepth)
        throw InputError("synth: invalid tree shape");
    if (cfg.years.last < cfg.years.first) throw InputError("synth: invalid year range");
    if (cfg.planted_lag < 0 || cfg.planted_lag >= cfg.years.span())
        throw InputError("synth: planted_lag must be smaller than the year span");
    if (cfg.docs_per_topic_year < 1 || cfg.embedding_dim < 2) throw InputError("synth: invalid counts");
    if (cfg.noise_level < 0 || cfg.cluster_drift < 0) throw InputError("synth: negative noise or drift");

    std::filesystem::create_directories(out_dir);
    auto topics = build_tree(cfg);
    auto n_topics = topics.size();
    int lag = cfg.planted_lag;
    int first_u = cfg.years.first - lag; // science intensities start early enough to seed industry
    int n_years = cfg.years.last - first_u + 1;

    Rng rng(cfg.seed);

    // Bounded random-walk intensity per topic over the extended year axis.
    // The walk jumps to a per-topic activity peak for one year and then
    // reverts to a low base, so every series carries one pronounced interior
    // bump. The bump is what makes the planted lag identifiable after
    // min-max scaling: a monotone or flat walk correlates almost equally
    // well at neighboring shifts.
    std::vector<int> peak_year(n_topics);
    {
        // Each root's whole subtree peaks in the same year; roots take peak
        // slots round-robin, so peak activity spreads as evenly as the slot
        // count allows. Slots stay one year clear of both windows' edges:
        // the one-year bump must be fully visible in the science window at p
        // and in the industry window at p + lag, or the truncated shape
        // drags the correlation argmax toward a neighboring lag.
        int lo = cfg.years.first + 1;
        int hi = std::max(lo, cfg.years.last - lag - 1);
        int slots = hi - lo + 1;
        auto rotation = static_cast<int>(rng.below(static_cast<std::uint64_t>(slots)));
        std::vector<int> root_peak(static_cast<std::size_t>(cfg.n_root_topics));
        for (int r = 0; r < cfg.n_root_topics; ++r)
            root_peak[static_cast<std::size_t>(r)] = lo + (r + rotation) % slots;
        for (std::size_t m = 0; m < n_topics; ++m) {
            int root = static_cast<int>(m);
            while (topics[static_cast<std::size_t>(root)].parent >= 0)
                root = topics[static_cast<std::size_t>(root)].parent;
            peak_year[m] = root_peak[static_cast<std::size_t>(root)];
        }
    }

    // The off-peak base must stay below the count-rounding threshold. Any
    // uniform base activity puts a scaled plateau of at least the per-year
    // peaked fraction into every series, and the plateau cross products bias
    // the CCAUC ratio below 1 for topics whose peak falls early; a quiet
    // base keeps the negative-lag mass at exactly zero when noise is zero.
    constexpr double kBase = 0.004;
    std::vector<std::vector<double>> intensity(n_topics, std::vector<double>(static_cast<std::size_t>(n_years)));
    for (std::size_t m = 0; m < n_topics; ++m) {
        auto& walk = intensity[m];
        int p = peak_year[m] - first_u;
        double v = kBase + rng.uniform(0.0, 0.003);
        for (int u = 0; u < n_years; ++u) {
            walk[static_cast<std::size_t>(u)] = v;
            double wiggle = rng.uniform(-0.003, 0.003);
            double next;
            if (u == p - 1)
                next = 0.9 + 10.0 * wiggle; // climb into the peak
            else if (u == p)
                next = kBase + wiggle; // fall off it
            else
                next = v + 0.7 * (kBase - v) + wiggle; // revert to base
            v = u == p - 1 ? std::clamp(next, 0.5, 1.0) : std::clamp(next, 0.0, 0.009);
        }
    }

    // Drifting embedding centroid per topic over the extended year axis.
    double step_sigma = cfg.cluster_drift / std::sqrt(static_cast<double>(cfg.embedding_dim));
    double jitter_sigma = 0.25 * cfg.cluster_drift + 0.05;
    std::vector<std::vector<std::vector<double>>> centroid(n_topics);
    for (auto& path : centroid) {
        path.assign(static_cast<std::size_t>(n_years), std::vector<double>(static_cast<std::size_t>(cfg.embedding_dim)));
        for (auto& x : path[0]) x = 3.0 * rng.normal();
        for (std::size_t u = 1; u < path.size(); ++u)
            for (std::size_t j = 0; j < path[u].size(); ++j) path[u][j] = path[u - 1][j] + step_sigma * rng.normal();
    }

    // Science template stream: the per-(topic, year) documents with their
    // topic sets. Industry year t replays the templates of year t - lag.
    // Counts round to zero in quiet years; the peak year always yields at
    // least one document, which keeps every topic present in both corpora.
    auto count_for = [&](double level) {
        return static_cast<int>(std::floor(std::max(0.0, level) * cfg.docs_per_topic_year + 0.5));
    };
    std::vector<std::vector<std::vector<TemplateDoc>>> templates(static_cast<std::size_t>(n_years));
    for (int u = 0; u < n_years; ++u) {
        templates[static_cast<std::size_t>(u)].resize(n_topics);
        for (std::size_t m = 0; m < n_topics; ++m) {
            auto& bucket = templates[static_cast<std::size_t>(u)][m];
            bucket.resize(static_cast<std::size_t>(count_for(intensity[m][static_cast<std::size_t>(u)])));
            for (auto& doc : bucket) {
                doc.primary = static_cast<int>(m);
                if (!topics[m].siblings.empty() && rng.uniform01() < 0.15)
                    doc.secondary = topics[m].siblings[rng.below(topics[m].siblings.size())];
            }
        }
    }

    SynthOutput out;
    out.n_topics = n_topics;
    auto path_of = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    out.taxonomy_path = path_of("taxonomy.jsonl");
    out.documents_path = path_of("documents.jsonl");
    out.embeddings_path = path_of("embeddings.bin");
    out.manifest_path = path_of("manifest.json");

    {
        std::ofstream tax(out.taxonomy_path, std::ios::binary);
        if (!tax) throw InputError("cannot open for writing: " + out.taxonomy_path);
        for (const auto& t : topics)
            tax << "{\"id\":\"" << t.id << "\",\"label\":\"synthetic topic " << t.id << "\",\"tree_numbers\":[\""
                << t.tree_number << "\"]}\n";
    }

    std::ofstream docs(out.documents_path, std::ios::binary);
    if (!docs) throw InputError("cannot open for writing: " + out.documents_path);
    EmbeddingTable embeddings(static_cast<std::uint32_t>(cfg.embedding_dim));
    std::vector<float> emb_buf(static_cast<std::size_t>(cfg.embedding_dim));

    auto emit = [&](const std::string& id, const char* corpus, int year, const TemplateDoc& doc, double weight,
                    int centroid_year_index) {
        docs << "{\"id\":\"" << id << "\",\"corpus\":\"" << corpus << "\",\"year\":" << year
             << ",\"topics\":[\"" << topics[static_cast<std::size_t>(doc.primary)].id << "\"";
        if (doc.secondary >= 0) docs << ",\"" << topics[static_cast<std::size_t>(doc.secondary)].id << "\"";
        docs << "],\"weight\":" << format_double(weight) << "}\n";

        const auto& c = centroid[static_cast<std::size_t>(doc.primary)][static_cast<std::size_t>(centroid_year_index)];
        for (std::size_t j = 0; j < emb_buf.size(); ++j)
            emb_buf[j] = static_cast<float>(c[j] + jitter_sigma * rng.normal());
        embeddings.add(id, emb_buf);
        ++out.n_documents;
    };

    char idbuf[64];
    // Science documents: template years inside the analysis range.
    for (int year = cfg.years.first; year <= cfg.years.last; ++year) {
        int u = year - first_u;
        for (std::size_t m = 0; m < n_topics; ++m) {
            const auto& bucket = templates[static_cast<std::size_t>(u)][m];
            for (std::size_t k = 0; k < bucket.size(); ++k) {
                std::snprintf(idbuf, sizeof(idbuf), "sci-%s-%d-%03zu", topics[m].id.c_str(), year, k);
                emit(idbuf, "science", year, bucket[k], std::floor(rng.lognormal(2.0, 1.2)), u);
            }
        }
    }

    // Industry documents: lag-shifted replay. With noise, industry counts
    // derive from the noise-perturbed intensity; at noise 0 they replay the
    // science stream of year - lag document for document.
    for (int year = cfg.years.first; year <= cfg.years.last; ++year) {
        int u = year - lag - first_u;
        for (std::size_t m = 0; m < n_topics; ++m) {
            const auto& bucket = templates[static_cast<std::size_t>(u)][m];
            int n = static_cast<int>(bucket.size());
            if (cfg.noise_level > 0) {
                double level = intensity[m][static_cast<std::size_t>(u)] + cfg.noise_level * rng.uniform(-1.0, 1.0);
                n = count_for(level);
                if (!bucket.empty()) n = std::max(1, n); // keep every topic industry-present
            }
            for (int k = 0; k < n; ++k) {
                TemplateDoc doc{static_cast<int>(m), -1};
                if (!bucket.empty()) doc = bucket[static_cast<std::size_t>(k) % bucket.size()];
                std::snprintf(idbuf, sizeof(idbuf), "ind-%s-%d-%03d", topics[m].id.c_str(), year, k);
                emit(idbuf, "industry", year, doc, rng.lognormal(11.5, 1.0), u);
            }
        }
    }
    docs.close();
    write_embeddings_binary(embeddings, out.embeddings_path);

    {
        nlohmann::ordered_json manifest;
        manifest["generator"] = "mt19937_64+box-muller";
        manifest["config"] = {{"seed", cfg.seed},
                              {"n_root_topics", cfg.n_root_topics},
                              {"branching", cfg.branching},
                              {"depth", cfg.depth},
                              {"years", {cfg.years.first, cfg.years.last}},
                              {"planted_lag", cfg.planted_lag},
                              {"noise_level", cfg.noise_level},
                              {"docs_per_topic_year", cfg.docs_per_topic_year},
                              {"embedding_dim", cfg.embedding_dim},
                              {"cluster_drift", cfg.cluster_drift}};
        manifest["counts"] = {{"topics", out.n_topics}, {"documents", out.n_documents}};
        nlohmann::ordered_json per_topic = nlohmann::ordered_json::array();
        for (const auto& t : topics) per_topic.push_back({{"id", t.id}, {"true_lag", cfg.planted_lag}});
        manifest["topics"] = std::move(per_topic);
        std::ofstream mf(out.manifest_path, std::ios::binary);
        if (!mf) throw InputError("cannot open for writing: " + out.manifest_path);
        mf << manifest.dump(2) << '\n';
    }
    return out;
}

} // namespace leadlag
