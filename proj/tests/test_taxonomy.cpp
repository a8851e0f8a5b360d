#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "leadlag/corpus.hpp"
#include "leadlag/rng.hpp"
#include "leadlag/taxonomy.hpp"

#include "helpers.hpp"

using namespace leadlag;
using namespace testutil;

namespace {

// Independent closure oracle: derives topic-level parent/child edges from
// the raw tree numbers and takes the BFS transitive closure.
std::set<std::string> closure_oracle(const std::vector<std::pair<std::string, std::vector<std::string>>>& shape,
                                     const std::string& id) {
    std::map<std::string, std::string> owner; // position -> id
    for (const auto& [nid, positions] : shape)
        for (const auto& p : positions) owner[p] = nid;
    std::map<std::string, std::set<std::string>> children;
    for (const auto& [pos, nid] : owner) {
        auto dot = pos.rfind('.');
        if (dot == std::string::npos) continue;
        const std::string& parent = owner.at(pos.substr(0, dot));
        if (parent != nid) children[parent].insert(nid);
    }
    std::set<std::string> out;
    std::vector<std::string> queue = {id};
    while (!queue.empty()) {
        std::string cur = std::move(queue.back());
        queue.pop_back();
        if (!out.insert(cur).second) continue;
        for (const auto& ch : children[cur]) queue.push_back(ch);
    }
    return out;
}

} // namespace

TEST_CASE("depths follow the minimum-segment rule") {
    auto dir = fresh_dir("tax");
    auto path = write_lines(dir, "tax.jsonl",
                            {topic_line("A", {"C01"}), topic_line("B", {"C01.100"}),
                             topic_line("C", {"C01.100.200"}),
                             topic_line("multi", {"C01.100.200.300", "C01.200"})});
    Taxonomy tax = load_taxonomy(path);
    CHECK(tax.node("A").depth == 1);
    CHECK(tax.node("B").depth == 2);
    CHECK(tax.node("C").depth == 3);
    CHECK(tax.node("multi").depth == 2); // minimum across positions
    CHECK(tax.max_depth() == 3);
}

TEST_CASE("taxonomy load errors") {
    auto dir = fresh_dir("tax");
    auto dangling = write_lines(dir, "dangling.jsonl", {topic_line("A", {"C01"}), topic_line("B", {"C01.5.9"})});
    CHECK_THROWS_AS(load_taxonomy(dangling), InputError);

    auto dup = write_lines(dir, "dup.jsonl", {topic_line("A", {"C01"}), topic_line("A", {"C02"})});
    CHECK_THROWS_AS(load_taxonomy(dup), InputError);

    auto deep = write_lines(dir, "deep.jsonl",
                            {topic_line("A", {"1"}), topic_line("B", {"1.2.3.4.5.6.7.8.9.10.11.12.13.14"})});
    CHECK_THROWS_AS(load_taxonomy(deep), InputError);
}

TEST_CASE("descendants cover subtrees, diamonds, and leaves") {
    auto dir = fresh_dir("tax");
    // diamond: D sits under both B and C
    auto path = write_lines(dir, "tax.jsonl",
                            {topic_line("A", {"C01"}), topic_line("B", {"C01.100"}),
                             topic_line("C", {"C01.200"}), topic_line("D", {"C01.100.10", "C01.200.10"})});
    Taxonomy tax = load_taxonomy(path);

    CHECK(tax.descendants("D") == std::vector<std::string>{"D"}); // leaf: just itself
    CHECK(tax.descendants("B") == std::vector<std::string>{"B", "D"});
    CHECK(tax.descendants("C") == std::vector<std::string>{"C", "D"});
    CHECK(tax.descendants("A") == std::vector<std::string>{"A", "B", "C", "D"}); // set semantics, D once

    CHECK(tax.top_ancestors("D") == std::vector<std::string>{"A"});
    CHECK_THROWS_AS(tax.descendants("nope"), InputError);
}

TEST_CASE("top ancestors cover every branch of a multi-rooted topic") {
    auto dir = fresh_dir("tax");
    auto path = write_lines(dir, "tax.jsonl",
                            {topic_line("C", {"C05"}), topic_line("D", {"D12"}), topic_line("E", {"E07"}),
                             topic_line("span", {"C05.1", "D12.9"})});
    Taxonomy tax = load_taxonomy(path);
    CHECK(tax.top_ancestors("span") == std::vector<std::string>{"C", "D"});
    CHECK(tax.top_ancestors("C") == std::vector<std::string>{"C"}); // root maps to itself
}

TEST_CASE("random trees match the closure oracle and keep properties") {
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        // grow a random tree of ~200 nodes, occasionally adding extra positions
        std::vector<std::pair<std::string, std::vector<std::string>>> shape;
        std::vector<std::string> positions;
        for (int r = 0; r < 3; ++r) {
            std::string pos = "R" + std::to_string(r);
            shape.push_back({"n" + std::to_string(shape.size()), {pos}});
            positions.push_back(pos);
        }
        while (shape.size() < 200) {
            const auto& parent = positions[rng.below(positions.size())];
            if (std::count(parent.begin(), parent.end(), '.') >= 11) continue;
            std::string pos = parent + "." + std::to_string(positions.size());
            std::vector<std::string> node_positions = {pos};
            if (rng.uniform01() < 0.08) { // multi-position node
                const auto& other = positions[rng.below(positions.size())];
                if (std::count(other.begin(), other.end(), '.') < 11)
                    node_positions.push_back(other + ".x" + std::to_string(positions.size()));
            }
            shape.push_back({"n" + std::to_string(shape.size()), node_positions});
            for (const auto& p : node_positions) positions.push_back(p);
        }

        auto dir = fresh_dir("tax_rand");
        std::vector<std::string> lines;
        for (const auto& [id, pos] : shape) lines.push_back(topic_line(id, pos));
        Taxonomy tax = load_taxonomy(write_lines(dir, "tax.jsonl", lines));

        for (int probe = 0; probe < 20; ++probe) {
            const auto& id = shape[rng.below(shape.size())].first;
            auto got = tax.descendants(id);
            auto want = closure_oracle(shape, id);
            CHECK(std::set<std::string>(got.begin(), got.end()) == want);

            // transitivity: descendants of members are contained
            for (const auto& member : got) {
                auto inner = tax.descendants(member);
                CHECK(std::includes(got.begin(), got.end(), inner.begin(), inner.end()));
            }
        }

        // depth is stable under input permutation
        std::vector<std::string> shuffled = lines;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        Taxonomy tax2 = load_taxonomy(write_lines(dir, "tax2.jsonl", shuffled));
        for (const auto& [id, _] : shape) CHECK(tax.node(id).depth == tax2.node(id).depth);

        // topics_at_depth is cumulative and monotone
        for (int d = 1; d < kMaxDepth; ++d) {
            auto lo = tax.topics_at_depth(d);
            auto hi = tax.topics_at_depth(d + 1);
            CHECK(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
        }
        CHECK(tax.topics_at_depth(kMaxDepth).size() == tax.size());
    }
}

TEST_CASE("topics_at_depth boundaries") {
    auto dir = fresh_dir("tax");
    auto path = write_lines(dir, "tax.jsonl",
                            {topic_line("A", {"C01"}), topic_line("B", {"D01"}), topic_line("C", {"C01.1"})});
    Taxonomy tax = load_taxonomy(path);
    CHECK(tax.topics_at_depth(1) == std::vector<std::string>{"A", "B"});
    CHECK(tax.topics_at_depth(13) == std::vector<std::string>{"A", "B", "C"});
    CHECK_THROWS_AS(tax.topics_at_depth(0), InputError);
    CHECK_THROWS_AS(tax.topics_at_depth(14), InputError);
    CHECK(tax.root_topics() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("pareto pairs: counting, ties, and fraction") {
    auto dir = fresh_dir("pairs");
    std::vector<std::string> lines;
    // 10 distinct pairs with counts 10,9,...,1
    const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"};
    int next_id = 0;
    for (int p = 0; p < 10; ++p) {
        for (int n = 0; n < 10 - p; ++n)
            lines.push_back(doc_line("d" + std::to_string(next_id++), "science", 2012,
                                     {names[0], names[p + 1]}, 1.0));
    }
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2021});
    auto top = pareto_pairs(store, 0.2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].a == "a");
    CHECK(top[0].b == "b");
    CHECK(top[0].count == 10);
    CHECK(top[1].b == "c");
    CHECK(top[1].count == 9);

    // a document with three topics contributes all three pairs once
    auto tri = load_documents(
        write_lines(dir, "tri.jsonl", {doc_line("t", "science", 2012, {"x", "y", "z"}, 1.0)}), {2010, 2021});
    auto all = pareto_pairs(tri, 1.0);
    REQUIRE(all.size() == 3);
    for (const auto& p : all) CHECK(p.count == 1);

    CHECK_THROWS_AS(pareto_pairs(tri, 0.0), InputError);
}

TEST_CASE("pareto pair counts match a nested-loop co-occurrence oracle") {
    Rng rng(31);
    auto dir = fresh_dir("pairs_rand");
    std::vector<std::string> lines;
    std::vector<std::vector<std::string>> doc_topics;
    for (int i = 0; i < 400; ++i) {
        std::set<std::string> topics;
        auto n = 1 + rng.below(4);
        for (std::size_t k = 0; k < n; ++k) topics.insert("t" + std::to_string(rng.below(12)));
        doc_topics.emplace_back(topics.begin(), topics.end());
        lines.push_back(doc_line("d" + std::to_string(i), rng.uniform01() < 0.5 ? "science" : "industry", 2015,
                                 doc_topics.back(), 1.0));
    }
    CorpusStore store = load_documents(write_lines(dir, "docs.jsonl", lines), {2010, 2021});

    std::map<std::pair<std::string, std::string>, std::uint64_t> oracle;
    for (const auto& topics : doc_topics)
        for (std::size_t i = 0; i < topics.size(); ++i)
            for (std::size_t j = i + 1; j < topics.size(); ++j) oracle[{topics[i], topics[j]}] += 1;

    auto pairs = pareto_pairs(store, 1.0);
    CHECK(pairs.size() == oracle.size());
    for (const auto& p : pairs) CHECK(oracle.at({p.a, p.b}) == p.count);

    // determinism
    auto pairs2 = pareto_pairs(store, 1.0);
    CHECK(pairs == pairs2);
}
