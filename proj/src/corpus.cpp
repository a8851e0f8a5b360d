#include "leadlag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "leadlag/csv.hpp"
#include "leadlag/taxonomy.hpp"

namespace leadlag {

using nlohmann::json;

namespace {

const std::vector<std::uint32_t> kNoDocs;

constexpr char kEmbeddingMagic[8] = {'L', 'L', 'E', 'M', 'B', '0', '0', '1'};

// Returns an empty string on success, otherwise the rejection reason.
std::string parse_document(const json& rec, YearRange years, Document& out) {
    if (!rec.is_object()) return "record is not an object";
    if (!rec.contains("id") || !rec["id"].is_string()) return "missing or non-string id";
    out.id = rec["id"].get<std::string>();
    if (out.id.empty()) return "empty id";

    if (!rec.contains("corpus") || !rec["corpus"].is_string()) return "missing corpus";
    std::string corpus = rec["corpus"].get<std::string>();
    if (corpus == "science")
        out.corpus = Corpus::science;
    else if (corpus == "industry")
        out.corpus = Corpus::industry;
    else
        return "unknown corpus \"" + corpus + "\"";

    if (!rec.contains("year") || !rec["year"].is_number_integer()) return "missing or non-integer year";
    out.year = rec["year"].get<int>();
    if (!years.contains(out.year)) return "year outside range";

    if (!rec.contains("topics") || !rec["topics"].is_array()) return "missing topics array";
    out.topics.clear();
    for (const auto& t : rec["topics"]) {
        if (!t.is_string()) return "non-string topic";
        out.topics.push_back(t.get<std::string>());
    }
    std::sort(out.topics.begin(), out.topics.end());
    out.topics.erase(std::unique(out.topics.begin(), out.topics.end()), out.topics.end());
    if (out.topics.empty()) return "empty topic set";

    if (!rec.contains("weight") || !rec["weight"].is_number()) return "missing or non-numeric weight";
    out.weight = rec["weight"].get<double>();
    if (!std::isfinite(out.weight)) return "non-finite weight";
    if (out.weight < 0) return "negative weight";

    out.has_embedding = false;
    return {};
}

} // namespace

const std::vector<std::uint32_t>& CorpusStore::directly_annotated(const std::string& topic) const {
    auto it = topic_docs_.find(topic);
    return it == topic_docs_.end() ? kNoDocs : it->second;
}

std::vector<std::string> CorpusStore::annotated_topics() const {
    std::vector<std::string> out;
    out.reserve(topic_docs_.size());
    for (const auto& [topic, _] : topic_docs_) out.push_back(topic);
    std::sort(out.begin(), out.end());
    return out;
}

CorpusStore load_documents(const std::string& path, YearRange years, LoadReport* report) {
    if (years.last < years.first) throw InputError("invalid year range");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open document file: " + path);

    CorpusStore store;
    store.years_ = years;
    for (int c = 0; c < 2; ++c) {
        store.totals_[c].assign(static_cast<std::size_t>(years.span()), 0);
        store.by_year_[c].assign(static_cast<std::size_t>(years.span()), {});
    }

    LoadReport local;
    LoadReport& rep = report ? *report : local;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) {
            rep.rejections.push_back({line_no, "", "malformed line"});
            continue;
        }
        Document doc;
        std::string reason = parse_document(rec, years, doc);
        if (reason.empty() && store.id_index_.count(doc.id)) reason = "duplicate id";
        if (!reason.empty()) {
            rep.rejections.push_back({line_no, doc.id, reason});
            continue;
        }

        auto idx = static_cast<std::uint32_t>(store.docs_.size());
        int c = static_cast<int>(doc.corpus);
        std::size_t y = static_cast<std::size_t>(years.index(doc.year));
        store.id_index_.emplace(doc.id, idx);
        store.totals_[c][y] += 1;
        store.by_year_[c][y].push_back(idx);
        store.counts_[c] += 1;
        rep.accepted[c] += 1;
        for (const auto& t : doc.topics) store.topic_docs_[t].push_back(idx);
        store.docs_.push_back(std::move(doc));
    }
    return store;
}

void write_rejection_report(const LoadReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    for (const auto& r : report.rejections) {
        out << "line " << r.line << ": " << r.reason;
        if (!r.id.empty()) out << " (id=" << r.id << ")";
        out << '\n';
    }
}

std::span<const float> EmbeddingTable::row(const std::string& id) const {
    auto it = row_of_.find(id);
    if (it == row_of_.end()) throw InputError("no embedding for id: " + id);
    return row_at(it->second);
}

void EmbeddingTable::add(const std::string& id, std::span<const float> vec) {
    if (vec.size() != dimension_)
        throw InputError("dimension mismatch for id " + id + ": got " + std::to_string(vec.size()) +
                         ", expected " + std::to_string(dimension_));
    for (float v : vec)
        if (!std::isfinite(v)) throw InputError("non-finite embedding entry for id: " + id);
    if (!row_of_.emplace(id, static_cast<std::uint32_t>(ids_.size())).second)
        throw InputError("duplicate embedding id: " + id);
    ids_.push_back(id);
    data_.insert(data_.end(), vec.begin(), vec.end());
}

namespace {

EmbeddingTable load_embeddings_binary(std::ifstream& in, const std::string& path, std::uint32_t expected_dim) {
    char magic[8];
    std::uint32_t dim = 0, rows = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&rows), 4);
    if (!in || std::memcmp(magic, kEmbeddingMagic, 8) != 0)
        throw InputError("bad embedding header: " + path);
    if (dim != expected_dim)
        throw InputError("dimension mismatch in " + path + ": file has " + std::to_string(dim) +
                         ", expected " + std::to_string(expected_dim));

    std::ifstream ids_in(path + ".ids", std::ios::binary);
    if (!ids_in) throw InputError("cannot open embedding id index: " + path + ".ids");

    EmbeddingTable table(dim);
    std::vector<float> buf(dim);
    std::string id;
    for (std::uint32_t r = 0; r < rows; ++r) {
        if (!std::getline(ids_in, id)) throw InputError("embedding id index shorter than row count: " + path);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(sizeof(float) * dim));
        if (!in) throw InputError("truncated embedding file: " + path);
        table.add(id, buf);
    }
    return table;
}

EmbeddingTable load_embeddings_jsonl(std::ifstream& in, const std::string& path, std::uint32_t expected_dim) {
    EmbeddingTable table(expected_dim);
    std::string line;
    std::size_t line_no = 0;
    std::vector<float> buf;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("id") || !rec["id"].is_string() || !rec.contains("vector") ||
            !rec["vector"].is_array())
            throw InputError("malformed embedding record at " + path + ":" + std::to_string(line_no));
        buf.clear();
        for (const auto& v : rec["vector"]) {
            if (!v.is_number()) throw InputError("non-numeric embedding entry at " + path + ":" + std::to_string(line_no));
            buf.push_back(v.get<float>());
        }
        table.add(rec["id"].get<std::string>(), buf);
    }
    return table;
}

} // namespace

EmbeddingTable load_embeddings(const std::string& path, std::uint32_t expected_dim, CorpusStore* store) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open embedding file: " + path);

    char magic[8] = {};
    in.read(magic, 8);
    bool binary = in.gcount() == 8 && std::memcmp(magic, kEmbeddingMagic, 8) == 0;
    in.clear();
    in.seekg(0);

    EmbeddingTable table =
        binary ? load_embeddings_binary(in, path, expected_dim) : load_embeddings_jsonl(in, path, expected_dim);

    if (store) {
        for (const auto& id : table.ids()) {
            auto it = store->id_index_.find(id);
            if (it == store->id_index_.end()) throw InputError("embedding references unknown document id: " + id);
            store->docs_[it->second].has_embedding = true;
        }
    }
    return table;
}

void write_embeddings_jsonl(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << "{\"id\":\"" << table.ids()[i] << "\",\"vector\":[";
        auto row = table.row_at(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << format_double(row[j]);
        }
        out << "]}\n";
    }
}

void write_embeddings_binary(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    std::uint32_t dim = table.dimension();
    std::uint32_t rows = static_cast<std::uint32_t>(table.size());
    out.write(kEmbeddingMagic, 8);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto row = table.row_at(i);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(sizeof(float) * dim));
    }
    std::ofstream ids_out(path + ".ids", std::ios::binary);
    if (!ids_out) throw InputError("cannot open for writing: " + path + ".ids");
    for (const auto& id : table.ids()) ids_out << id << '\n';
}

ValidationReport validate(const CorpusStore& store, const Taxonomy& taxonomy) {
    ValidationReport report;
    for (const auto& doc : store.documents()) {
        report.year_counts[static_cast<int>(doc.corpus)][doc.year] += 1;
        for (const auto& t : doc.topics) {
            if (!taxonomy.contains(t)) report.unknown_topics.emplace_back(doc.id, t);
            report.topic_coverage[t] += 1;
        }
    }
    return report;
}

void write_validation_report(const ValidationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "unknown_topic_references " << report.unknown_topics.size() << '\n';
    for (const auto& [doc, topic] : report.unknown_topics) out << "unknown " << doc << ' ' << topic << '\n';
    for (int c = 0; c < 2; ++c)
        for (const auto& [year, n] : report.year_counts[c])
            out << "year_count " << corpus_name(static_cast<Corpus>(c)) << ' ' << year << ' ' << n << '\n';
    for (const auto& [topic, n] : report.topic_coverage) out << "coverage " << topic << ' ' << n << '\n';
}

} // namespace leadlag
