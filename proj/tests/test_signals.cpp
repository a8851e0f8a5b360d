#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "leadlag/rng.hpp"
#include "leadlag/signals.hpp"

#include "helpers.hpp"

using namespace leadlag;
using namespace testutil;

namespace {

// Fixture: two roots (A, B), a small subtree under A.
//   A (C01) -> A1 (C01.1) -> A1a (C01.1.1); A2 (C01.2); B (D05) -> B1 (D05.1)
Taxonomy fixture_taxonomy(const std::string& dir) {
    return load_taxonomy(write_lines(dir, "tax.jsonl",
                                     {topic_line("A", {"C01"}), topic_line("A1", {"C01.1"}),
                                      topic_line("A1a", {"C01.1.1"}), topic_line("A2", {"C01.2"}),
                                      topic_line("B", {"D05"}), topic_line("B1", {"D05.1"})}));
}

// Brute-force subtree membership by prefix on tree numbers, independent of
// the Taxonomy descendant tables.
bool oracle_on_topic(const Taxonomy& tax, const Document& doc, const std::string& m) {
    std::set<std::string> roots(tax.node(m).tree_numbers.begin(), tax.node(m).tree_numbers.end());
    for (const auto& t : doc.topics) {
        if (!tax.contains(t)) continue;
        for (const auto& pos : tax.node(t).tree_numbers) {
            for (const auto& r : roots) {
                if (pos == r) return true;
                if (pos.size() > r.size() && pos.compare(0, r.size(), r) == 0 && pos[r.size()] == '.') return true;
            }
        }
    }
    return false;
}

} // namespace

TEST_CASE("indicator handles single matches, misses, and multi-matches") {
    auto dir = fresh_dir("sig");
    Taxonomy tax = fixture_taxonomy(dir);

    Document exact{"d1", Corpus::science, 2012, {"A"}, 1.0, false};
    CHECK(indicator(exact, "A", tax) == 1); // step(0) = 1: one match suffices

    Document miss{"d2", Corpus::science, 2012, {"B"}, 1.0, false};
    CHECK(indicator(miss, "A", tax) == 0);

    Document multi{"d3", Corpus::science, 2012, {"A", "A1", "A1a"}, 1.0, false};
    CHECK(indicator(multi, "A", tax) == 1); // capped at 1, not 3

    Document child_only{"d4", Corpus::science, 2012, {"A1a"}, 1.0, false};
    CHECK(indicator(child_only, "A", tax) == 1);
    CHECK(indicator(child_only, "A2", tax) == 0);
}

TEST_CASE("frequency signal: hand counts and zero-document years") {
    auto dir = fresh_dir("sig");
    Taxonomy tax = fixture_taxonomy(dir);
    auto docs = write_lines(dir, "docs.jsonl",
                            {doc_line("s1", "science", 2010, {"A1"}, 1.0),
                             doc_line("s2", "science", 2010, {"A2"}, 1.0),
                             doc_line("s3", "science", 2010, {"B"}, 1.0),
                             doc_line("s4", "science", 2011, {"B1"}, 1.0)});
    CorpusStore store = load_documents(docs, {2010, 2012});

    TopicSignal fa = frequency_signal(store, tax, TopicKey::single("A"), Corpus::science);
    CHECK(fa.values[0] == doctest::Approx(2.0 / 3.0)); // 2 of 3 docs match the A subtree
    CHECK(fa.values[1] == 0.0);
    CHECK(fa.values[2] == 0.0); // no documents in 2012 at all

    TopicSignal none = frequency_signal(store, tax, TopicKey::single("A1a"), Corpus::science);
    CHECK(std::all_of(none.values.begin(), none.values.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("minmax scaling and its edge cases") {
    TopicSignal s;
    s.years = {2010, 2012};
    s.values = {1, 2, 3};
    CHECK(minmax(s).values == std::vector<double>{0, 0.5, 1});

    s.values = {5, 5, 5};
    CHECK(minmax(s).values == std::vector<double>{0, 0, 0}); // degenerate rule

    s.years = {2010, 2013};
    s.values = {0, 4, 8, 2};
    CHECK(minmax(s).values == std::vector<double>{0, 0.5, 1, 0.25});

    // idempotent on already-scaled non-constant input; argmax preserved
    s.values = {0.3, 0.9, 0.1, 0.4};
    auto once = minmax(s);
    auto twice = minmax(once);
    for (std::size_t i = 0; i < once.values.size(); ++i)
        CHECK(twice.values[i] == doctest::Approx(once.values[i]).epsilon(1e-12));
    auto argmax = [](const std::vector<double>& v) {
        return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    CHECK(argmax(once.values) == argmax(s.values));
}

TEST_CASE("quantizer boundaries: nearest-rank on 0..99 and degenerate pools") {
    auto dir = fresh_dir("quant");
    Taxonomy tax = fixture_taxonomy(dir);
    std::vector<std::string> lines;
    for (int i = 0; i < 100; ++i)
        lines.push_back(doc_line("d" + std::to_string(i), "science", 2010, {"A"}, static_cast<double>(i)));
    lines.push_back(doc_line("lone", "science", 2011, {"A"}, 42.0));
    lines.push_back(doc_line("bdoc", "science", 2010, {"B"}, 7.0));
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2012});

    QuartileQuantizer q = build_quantizer(store, tax, Corpus::science);
    const auto& pool = q.pool(2010, "A");
    CHECK(pool.q1 == 24.0);
    CHECK(pool.q2 == 49.0);
    CHECK(pool.q3 == 74.0);

    CHECK(q.quantize(10, 2010, "A") == 1);
    CHECK(q.quantize(30, 2010, "A") == 2);
    CHECK(q.quantize(60, 2010, "A") == 3);
    CHECK(q.quantize(90, 2010, "A") == 4);
    CHECK(q.quantize(-5, 2010, "A") == 1);   // below pool minimum
    CHECK(q.quantize(1e9, 2010, "A") == 4);  // above pool maximum

    // single-document pool: all boundaries collapse onto its weight
    const auto& lone = q.pool(2011, "A");
    CHECK(lone.q1 == 42.0);
    CHECK(lone.q2 == 42.0);
    CHECK(lone.q3 == 42.0);

    // disjoint ancestors quantize independently
    const auto& bpool = q.pool(2010, "B");
    CHECK(bpool.size == 1);
    CHECK(bpool.q2 == 7.0);

    CHECK(!q.has_pool(2012, "A"));
    CHECK_THROWS_AS(q.quantize(1, 2012, "A"), NumericError);
}

TEST_CASE("impact signal arithmetic on a tiny corpus") {
    auto dir = fresh_dir("impact");
    Taxonomy tax = fixture_taxonomy(dir);
    // weights 1..8 under root A in 2010: quartiles q1=2, q2=4, q3=6
    std::vector<std::string> lines;
    for (int i = 1; i <= 8; ++i)
        lines.push_back(doc_line("d" + std::to_string(i), "science", 2010,
                                 {i <= 4 ? "A1" : "A2"}, static_cast<double>(i)));
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2010});
    QuartileQuantizer q = build_quantizer(store, tax, Corpus::science);

    // quartile values: weights 1,2 -> 1; 3,4 -> 2; 5,6 -> 3; 7,8 -> 4. K = 20.
    CHECK(q.normalization(0) == doctest::Approx(20.0));
    TopicSignal a1 = impact_signal(store, tax, TopicKey::single("A1"), Corpus::science, q);
    CHECK(a1.values[0] == doctest::Approx((1 + 1 + 2 + 2) / 20.0));
    TopicSignal a = impact_signal(store, tax, TopicKey::single("A"), Corpus::science, q);
    CHECK(a.values[0] == doctest::Approx(1.0));
    TopicSignal b = impact_signal(store, tax, TopicKey::single("B"), Corpus::science, q);
    CHECK(b.values[0] == 0.0); // no matching documents
}

TEST_CASE("signals match an independent nested-loop oracle on a random corpus") {
    auto dir = fresh_dir("oracle");
    Taxonomy tax = fixture_taxonomy(dir);
    Rng rng(2024);
    const char* topic_ids[] = {"A", "A1", "A1a", "A2", "B", "B1"};
    std::vector<std::string> lines;
    for (int i = 0; i < 500; ++i) {
        std::set<std::string> topics;
        auto n = 1 + rng.below(3);
        for (std::size_t k = 0; k < n; ++k) topics.insert(topic_ids[rng.below(6)]);
        lines.push_back(doc_line("d" + std::to_string(i), rng.uniform01() < 0.6 ? "science" : "industry",
                                 2010 + static_cast<int>(rng.below(4)),
                                 std::vector<std::string>(topics.begin(), topics.end()),
                                 std::floor(rng.uniform(0, 200))));
    }
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2013});
    QuartileQuantizer sci_q = build_quantizer(store, tax, Corpus::science);
    QuartileQuantizer ind_q = build_quantizer(store, tax, Corpus::industry);

    // Oracle quartile: nearest-rank percentile from a freshly sorted pool.
    auto oracle_quartile = [&](const Document& doc, Corpus corpus) {
        std::string root = primary_ancestor(doc, tax);
        std::vector<double> pool;
        for (const auto& other : store.documents()) {
            if (other.corpus != corpus || other.year != doc.year) continue;
            // pool = docs intersecting the root's subtree
            if (oracle_on_topic(tax, other, root)) pool.push_back(other.weight);
        }
        std::sort(pool.begin(), pool.end());
        auto nr = [&](double p) {
            auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(pool.size())));
            return pool[std::max<std::size_t>(rank, 1) - 1];
        };
        if (doc.weight <= nr(0.25)) return 1;
        if (doc.weight <= nr(0.50)) return 2;
        if (doc.weight <= nr(0.75)) return 3;
        return 4;
    };

    for (Corpus corpus : {Corpus::science, Corpus::industry}) {
        const QuartileQuantizer& q = corpus == Corpus::science ? sci_q : ind_q;
        // per-document quartiles match the oracle exactly
        for (std::uint32_t i = 0; i < store.size(); ++i) {
            const Document& doc = store.documents()[i];
            if (doc.corpus != corpus) continue;
            CHECK(q.document_quartile(i) == oracle_quartile(doc, corpus));
        }

        for (const char* m : topic_ids) {
            TopicSignal freq = frequency_signal(store, tax, TopicKey::single(m), corpus);
            TopicSignal impact = impact_signal(store, tax, TopicKey::single(m), corpus, q);
            for (int y = 2010; y <= 2013; ++y) {
                int matches = 0, total = 0;
                double num = 0.0, k = 0.0;
                for (std::uint32_t i = 0; i < store.size(); ++i) {
                    const Document& doc = store.documents()[i];
                    if (doc.corpus != corpus || doc.year != y) continue;
                    ++total;
                    int quartile = oracle_quartile(doc, corpus);
                    k += quartile;
                    if (oracle_on_topic(tax, doc, m)) {
                        ++matches;
                        num += quartile;
                    }
                }
                double want_freq = total > 0 ? static_cast<double>(matches) / total : 0.0;
                double want_impact = k > 0 ? num / k : 0.0;
                CHECK(freq.values[static_cast<std::size_t>(y - 2010)] == doctest::Approx(want_freq).epsilon(1e-12));
                CHECK(impact.values[static_cast<std::size_t>(y - 2010)] ==
                      doctest::Approx(want_impact).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rejected records never affect downstream signals") {
    auto dir = fresh_dir("rejects");
    Taxonomy tax = fixture_taxonomy(dir);
    std::vector<std::string> clean = {doc_line("a", "science", 2010, {"A"}, 3.0),
                                      doc_line("b", "science", 2011, {"A1"}, 5.0)};
    std::vector<std::string> dirty = clean;
    dirty.push_back(doc_line("bad", "science", 2010, {"A"}, -1.0));
    dirty.push_back(doc_line("late", "science", 2030, {"A"}, 1.0));

    CorpusStore s1 = load_documents(write_lines(dir, "clean.jsonl", clean), {2010, 2012});
    CorpusStore s2 = load_documents(write_lines(dir, "dirty.jsonl", dirty), {2010, 2012});
    QuartileQuantizer q1 = build_quantizer(s1, tax, Corpus::science);
    QuartileQuantizer q2 = build_quantizer(s2, tax, Corpus::science);

    for (const char* m : {"A", "A1"}) {
        auto f1 = frequency_signal(s1, tax, TopicKey::single(m), Corpus::science);
        auto f2 = frequency_signal(s2, tax, TopicKey::single(m), Corpus::science);
        CHECK(f1.values == f2.values);
        auto g1 = impact_signal(s1, tax, TopicKey::single(m), Corpus::science, q1);
        auto g2 = impact_signal(s2, tax, TopicKey::single(m), Corpus::science, q2);
        CHECK(g1.values == g2.values);
    }
}

TEST_CASE("subtree monotonicity: parent frequency dominates child frequency") {
    auto dir = fresh_dir("mono");
    Taxonomy tax = fixture_taxonomy(dir);
    Rng rng(5);
    std::vector<std::string> lines;
    const char* topic_ids[] = {"A", "A1", "A1a", "A2", "B", "B1"};
    for (int i = 0; i < 300; ++i)
        lines.push_back(doc_line("d" + std::to_string(i), "science", 2010 + static_cast<int>(rng.below(3)),
                                 {topic_ids[rng.below(6)]}, 1.0));
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2012});

    auto parent = frequency_signal(store, tax, TopicKey::single("A"), Corpus::science);
    for (const char* child : {"A1", "A1a", "A2"}) {
        auto c = frequency_signal(store, tax, TopicKey::single(child), Corpus::science);
        for (std::size_t i = 0; i < c.values.size(); ++i) CHECK(parent.values[i] >= c.values[i]);
    }
}
