#include "leadlag/signals.hpp"

#include <algorithm>
#include <cmath>

#include "leadlag/csv.hpp"

namespace leadlag {

namespace {

// Nearest-rank percentile: the ceil(p * n)-th smallest value (1-based).
double nearest_rank(const std::vector<double>& sorted, double p) {
    auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

// Marks every document whose topic set intersects descendants(m).
void mark_matches(const CorpusStore& store, const Taxonomy& taxonomy, const std::string& m, std::vector<char>& mask) {
    const auto& desc = taxonomy.descendant_indices(taxonomy.node_index(m));
    for (auto d : desc)
        for (auto doc : store.directly_annotated(taxonomy.nodes()[d].id)) mask[doc] = 1;
}

} // namespace

int indicator(const Document& doc, const std::string& m, const Taxonomy& taxonomy) {
    const auto& desc = taxonomy.descendant_indices(taxonomy.node_index(m));
    for (const auto& t : doc.topics) {
        if (!taxonomy.contains(t)) continue;
        auto idx = taxonomy.node_index(t);
        if (std::binary_search(desc.begin(), desc.end(), idx)) return 1;
    }
    return 0;
}

std::vector<char> match_mask(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key) {
    std::vector<char> mask(store.size(), 0);
    mark_matches(store, taxonomy, key.a, mask);
    if (key.is_pair()) {
        std::vector<char> other(store.size(), 0);
        mark_matches(store, taxonomy, key.b, other);
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && other[i];
    }
    return mask;
}

TopicSignal frequency_signal(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key, Corpus corpus) {
    auto mask = match_mask(store, taxonomy, key);

    TopicSignal sig;
    sig.topic = key;
    sig.corpus = corpus;
    sig.representation = Representation::frequency;
    sig.years = store.years();
    sig.values.assign(static_cast<std::size_t>(sig.years.span()), 0.0);

    for (int y = sig.years.first; y <= sig.years.last; ++y) {
        auto total = store.total(corpus, y);
        if (total == 0) continue;
        std::uint32_t matches = 0;
        for (auto doc : store.docs_in_year(corpus, y)) matches += mask[doc];
        sig.values[static_cast<std::size_t>(sig.years.index(y))] = static_cast<double>(matches) / total;
    }
    return sig;
}

TopicSignal minmax(const TopicSignal& raw) {
    TopicSignal out = raw;
    out.scaled = true;
    if (raw.values.empty()) return out;
    auto [lo_it, hi_it] = std::minmax_element(raw.values.begin(), raw.values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (auto& v : out.values) v = (v - lo) / (hi - lo);
    return out;
}

const QuartileQuantizer::Pool& QuartileQuantizer::pool(int year, const std::string& root) const {
    auto it = pools_.find({year, root});
    if (it == pools_.end())
        throw NumericError("no quartile pool for year " + std::to_string(year) + ", ancestor " + root);
    return it->second;
}

int QuartileQuantizer::quantize(double weight, int year, const std::string& root) const {
    const Pool& p = pool(year, root);
    if (weight <= p.q1) return 1;
    if (weight <= p.q2) return 2;
    if (weight <= p.q3) return 3;
    return 4;
}

std::string primary_ancestor(const Document& doc, const Taxonomy& taxonomy) {
    for (const auto& t : doc.topics) { // topics are sorted ascending
        if (!taxonomy.contains(t)) continue;
        auto roots = taxonomy.top_ancestors(t); // sorted
        if (!roots.empty()) return roots.front();
    }
    return {};
}

QuartileQuantizer build_quantizer(const CorpusStore& store, const Taxonomy& taxonomy, Corpus corpus) {
    QuartileQuantizer q;
    q.corpus_ = corpus;
    q.doc_quartile_.assign(store.size(), 0);
    q.k_.assign(static_cast<std::size_t>(store.years().span()), 0.0);

    // Pool weights per (year, root ancestor): a document joins the pool of
    // every root whose subtree its topics intersect.
    std::map<std::pair<int, std::string>, std::vector<double>> pool_weights;
    const auto& docs = store.documents();
    std::vector<std::string> doc_primary(store.size());

    for (std::uint32_t i = 0; i < docs.size(); ++i) {
        const Document& doc = docs[i];
        if (doc.corpus != corpus) continue;
        std::vector<std::string> roots;
        for (const auto& t : doc.topics) {
            if (!taxonomy.contains(t)) continue;
            for (auto r : taxonomy.top_ancestor_indices(taxonomy.node_index(t)))
                roots.push_back(taxonomy.nodes()[r].id);
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        for (const auto& r : roots) pool_weights[{doc.year, r}].push_back(doc.weight);
        doc_primary[i] = primary_ancestor(doc, taxonomy);
    }

    for (auto& [key, weights] : pool_weights) {
        std::sort(weights.begin(), weights.end());
        QuartileQuantizer::Pool p;
        p.size = static_cast<std::uint32_t>(weights.size());
        p.q1 = nearest_rank(weights, 0.25);
        p.q2 = nearest_rank(weights, 0.50);
        p.q3 = nearest_rank(weights, 0.75);
        q.pools_.emplace(key, p);
    }

    for (std::uint32_t i = 0; i < docs.size(); ++i) {
        const Document& doc = docs[i];
        if (doc.corpus != corpus || doc_primary[i].empty()) continue;
        int quartile = q.quantize(doc.weight, doc.year, doc_primary[i]);
        q.doc_quartile_[i] = quartile;
        q.k_[static_cast<std::size_t>(store.years().index(doc.year))] += quartile;
    }
    return q;
}

TopicSignal impact_signal(const CorpusStore& store, const Taxonomy& taxonomy, const TopicKey& key, Corpus corpus,
                          const QuartileQuantizer& quantizer) {
    if (quantizer.corpus() != corpus) throw NumericError("impact_signal: quantizer built for the other corpus");
    auto mask = match_mask(store, taxonomy, key);

    TopicSignal sig;
    sig.topic = key;
    sig.corpus = corpus;
    sig.representation = Representation::impact;
    sig.years = store.years();
    sig.values.assign(static_cast<std::size_t>(sig.years.span()), 0.0);

    for (int y = sig.years.first; y <= sig.years.last; ++y) {
        auto yi = static_cast<std::size_t>(sig.years.index(y));
        double k = quantizer.normalization(static_cast<int>(yi));
        if (k <= 0.0) continue;
        double numerator = 0.0;
        for (auto doc : store.docs_in_year(corpus, y))
            if (mask[doc]) numerator += quantizer.document_quartile(doc);
        sig.values[yi] = numerator / k;
    }
    return sig;
}

void export_signals_csv(const std::vector<TopicSignal>& raw, const std::vector<TopicSignal>& scaled,
                        const std::string& path) {
    if (raw.size() != scaled.size()) throw NumericError("export_signals_csv: raw/scaled size mismatch");
    CsvWriter csv(path, {"topic", "corpus", "representation", "year", "raw", "scaled"});
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const TopicSignal& r = raw[i];
        const TopicSignal& s = scaled[i];
        for (int y = r.years.first; y <= r.years.last; ++y) {
            auto yi = static_cast<std::size_t>(r.years.index(y));
            csv.write_row({r.topic.label(), corpus_name(r.corpus), representation_name(r.representation),
                           std::to_string(y), format_double(r.values[yi]), format_double(s.values[yi])});
        }
    }
}

} // namespace leadlag
