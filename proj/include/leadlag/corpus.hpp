#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leadlag/common.hpp"

namespace leadlag {

class Taxonomy;
class EmbeddingTable;

// One abstract: a PubMed-style paper (corpus=science, weight=citations) or an
// SBIR-style award (corpus=industry, weight=dollars).
struct Document {
    std::string id;
    Corpus corpus = Corpus::science;
    int year = 0;
    std::vector<std::string> topics; // sorted, unique, non-empty
    double weight = 0.0;
    bool has_embedding = false;

    bool operator==(const Document&) const = default;
};

struct Rejection {
    std::size_t line = 0;
    std::string id;
    std::string reason;
};

struct LoadReport {
    std::size_t accepted[2] = {0, 0}; // indexed by Corpus
    std::vector<Rejection> rejections;
};

// Immutable after load. Documents are indexed by (corpus, year) and by direct
// topic annotation so signal construction can enumerate candidates cheaply.
class CorpusStore {
  public:
    const YearRange& years() const { return years_; }
    const std::vector<Document>& documents() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    std::size_t count(Corpus c) const { return counts_[static_cast<int>(c)]; }

    // N^X(t): number of documents of corpus X in year t.
    std::uint32_t total(Corpus c, int year) const {
        return totals_[static_cast<int>(c)][static_cast<std::size_t>(years_.index(year))];
    }

    const std::vector<std::uint32_t>& docs_in_year(Corpus c, int year) const {
        return by_year_[static_cast<int>(c)][static_cast<std::size_t>(years_.index(year))];
    }

    const Document* find(const std::string& id) const {
        auto it = id_index_.find(id);
        return it == id_index_.end() ? nullptr : &docs_[it->second];
    }

    // Documents directly annotated with `topic` (no subtree expansion).
    const std::vector<std::uint32_t>& directly_annotated(const std::string& topic) const;

    // Topic ids that occur as direct annotations, sorted.
    std::vector<std::string> annotated_topics() const;

    bool operator==(const CorpusStore& other) const { return docs_ == other.docs_ && years_ == other.years_; }

  private:
    friend CorpusStore load_documents(const std::string&, YearRange, LoadReport*);
    friend EmbeddingTable load_embeddings(const std::string&, std::uint32_t, CorpusStore*);

    YearRange years_;
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::uint32_t> id_index_;
    std::size_t counts_[2] = {0, 0};
    std::vector<std::uint32_t> totals_[2];                // [corpus][year index]
    std::vector<std::vector<std::uint32_t>> by_year_[2];  // [corpus][year index] -> doc indices
    std::unordered_map<std::string, std::vector<std::uint32_t>> topic_docs_;
};

// Parses one JSON record per line: {"id","corpus","year","topics","weight"}.
// Invalid records (malformed line, duplicate id, year outside range, negative
// or non-finite weight, empty topics) are rejected and reported, never loaded.
CorpusStore load_documents(const std::string& path, YearRange years, LoadReport* report = nullptr);

void write_rejection_report(const LoadReport& report, const std::string& path);

// Dense row-major float32 embedding store keyed by document id.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;
    EmbeddingTable(std::uint32_t dimension) : dimension_(dimension) {}

    std::uint32_t dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    bool contains(const std::string& id) const { return row_of_.count(id) != 0; }

    std::span<const float> row(const std::string& id) const;
    std::span<const float> row_at(std::size_t i) const { return {data_.data() + i * dimension_, dimension_}; }

    void add(const std::string& id, std::span<const float> vec);

    bool operator==(const EmbeddingTable& other) const {
        return dimension_ == other.dimension_ && ids_ == other.ids_ && data_ == other.data_;
    }

  private:
    std::uint32_t dimension_ = 0;
    std::vector<float> data_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> row_of_;
};

// Reads either the JSONL schema ({"id","vector"} per line) or the binary
// sidecar (16-byte header: magic "LLEMB001", u32 dimension, u32 rows, then
// row-major float32 with ids in <path>.ids). Throws InputError on dimension
// mismatch, non-finite entries, duplicate ids, and -- when a store is given --
// ids that do not occur in the store. When a store is given, matching
// documents get has_embedding = true.
EmbeddingTable load_embeddings(const std::string& path, std::uint32_t expected_dim, CorpusStore* store = nullptr);

void write_embeddings_jsonl(const EmbeddingTable& table, const std::string& path);
void write_embeddings_binary(const EmbeddingTable& table, const std::string& path);

struct ValidationReport {
    std::vector<std::pair<std::string, std::string>> unknown_topics; // (doc id, topic id)
    std::map<int, std::size_t> year_counts[2];                       // per corpus: year -> docs
    std::map<std::string, std::size_t> topic_coverage;               // topic -> directly annotated docs
};

ValidationReport validate(const CorpusStore& store, const Taxonomy& taxonomy);

void write_validation_report(const ValidationReport& report, const std::string& path);

} // namespace leadlag
