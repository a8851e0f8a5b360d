#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "leadlag/common.hpp"
#include "leadlag/corpus.hpp"
#include "leadlag/taxonomy.hpp"

namespace leadlag {

enum class Representation { frequency, impact };

inline const char* representation_name(Representation r) {
    return r == Representation::frequency ? "frequency" : "impact";
}

// A single topic, or an interdisciplinary pair treated as a pseudo-topic
// (a document matches a pair only if it matches both members).
struct TopicKey {
    std::string a;
    std::string b; // empty for single topics

    bool is_pair() const { return !b.empty(); }
    std::string label() const { return is_pair() ? a + "|" + b : a; }

    static TopicKey single(std::string id) { return {std::move(id), {}}; }
    static TopicKey pair(std::string x, std::string y) {
        if (y < x) std::swap(x, y);
        return {std::move(x), std::move(y)};
    }

    bool operator==(const TopicKey&) const = default;
    auto operator<=>(const TopicKey&) const = default;
};

// Per-topic, per-corpus yearly series. values[i] belongs to years.first + i.
struct TopicSignal {
    TopicKey topic;
    Corpus corpus = Corpus::science;
    Representation representation = Representation::frequency;
    YearRange years;
    std::vector<double> values;
    bool scaled = false;
};

// 1 iff the document's topic set intersects descendants(m); the Heaviside
// step in the matching rule evaluates to 1 at zero, so a single match counts.
int indicator(const Document& doc, const std::string& m, const Taxonomy& taxonomy);

// Per-document match flags for a topic or pair, subtree semantics.
std::vector<char> match_mask(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key);

// f^X(t, m): matching-document count over N^X(t); zero-document years give 0.
TopicSignal frequency_signal(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key, Corpus corpus);

// Min-max scaling to [0, 1]; a constant series maps to all zeros.
TopicSignal minmax(const TopicSignal& raw);

// Quartile boundaries per (year, root ancestor) for one corpus, nearest-rank
// 25/50/75th percentiles over the weights of documents whose topic set
// intersects the ancestor's subtree. Also caches each document's quartile
// under its primary ancestor and the per-year normalization constants K^X(t).
class QuartileQuantizer {
  public:
    struct Pool {
        double q1 = 0, q2 = 0, q3 = 0;
        std::uint32_t size = 0;
    };

    Corpus corpus() const { return corpus_; }

    bool has_pool(int year, const std::string& root) const { return pools_.count({year, root}) != 0; }
    const Pool& pool(int year, const std::string& root) const;

    // Quartile position {1,2,3,4} of a weight in pool (year, root).
    // Throws NumericError when the pool is absent.
    int quantize(double weight, int year, const std::string& root) const;

    // Cached quartile of a document of this corpus (0 for the other corpus).
    int document_quartile(std::uint32_t doc_index) const { return doc_quartile_[doc_index]; }

    // K^X(t): sum of quartile values over all documents of this corpus in t.
    double normalization(int year_index) const { return k_[static_cast<std::size_t>(year_index)]; }

  private:
    friend QuartileQuantizer build_quantizer(const CorpusStore&, const Taxonomy&, Corpus);

    Corpus corpus_ = Corpus::science;
    std::map<std::pair<int, std::string>, Pool> pools_;
    std::vector<int> doc_quartile_;
    std::vector<double> k_;
};

QuartileQuantizer build_quantizer(const CorpusStore& store, const Taxonomy& taxonomy, Corpus corpus);

// The root ancestor a document is quantized under: the lexicographically
// smallest top ancestor of its lexicographically first topic. Topics missing
// from the taxonomy are skipped; if none resolves, the empty string.
std::string primary_ancestor(const Document& doc, const Taxonomy& taxonomy);

// g^X(t, m): sum of cached quartile values over matching documents, divided
// by K^X(t); years with K = 0 give 0.
TopicSignal impact_signal(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key, Corpus corpus,
                          const QuartileQuantizer& quantizer);

void export_signals_csv(const std::vector<TopicSignal>& raw, const std::vector<TopicSignal>& scaled,
                        const std::string& path);

} // namespace leadlag
