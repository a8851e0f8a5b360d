#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "leadlag/common.hpp"

namespace leadlag {

class CorpusStore;

// Deepest layer a topic tree may have (MeSH convention).
inline constexpr int kMaxDepth = 13;

struct TopicNode {
    std::string id;
    std::string label;
    std::vector<std::string> tree_numbers; // dot-separated positions, e.g. "C01.252.400"
    int depth = 0;                         // 1 + minimum segment count above root
};

// Hierarchical topic vocabulary. A topic may sit at several tree positions;
// it stays a single analytic entity: depth is the minimum over positions and
// the descendant set is the union of its subtrees (always including itself).
class Taxonomy {
  public:
    std::size_t size() const { return nodes_.size(); }
    const std::vector<TopicNode>& nodes() const { return nodes_; }
    int max_depth() const { return max_depth_; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    const TopicNode& node(const std::string& id) const;
    std::uint32_t node_index(const std::string& id) const;

    // Descendant topic indices (self included), sorted ascending.
    const std::vector<std::uint32_t>& descendant_indices(std::uint32_t node) const { return descendants_[node]; }
    std::vector<std::string> descendants(const std::string& id) const;

    // Cumulative set: every topic with depth <= d, sorted by id.
    std::vector<std::string> topics_at_depth(int d) const;

    // Root-level topic id for every tree position of `id`, sorted.
    std::vector<std::string> top_ancestors(const std::string& id) const;
    const std::vector<std::uint32_t>& top_ancestor_indices(std::uint32_t node) const { return roots_[node]; }

    // Sorted ids of root-level topics.
    std::vector<std::string> root_topics() const;

  private:
    friend Taxonomy load_taxonomy(const std::string&);
    void build_tables();

    std::vector<TopicNode> nodes_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::map<std::string, std::uint32_t> position_owner_;        // tree number -> node index
    std::vector<std::vector<std::uint32_t>> descendants_;        // node -> sorted node indices
    std::vector<std::vector<std::uint32_t>> roots_;              // node -> sorted root node indices
    int max_depth_ = 0;
};

// Parses one JSON record per line: {"id","label","tree_numbers"}. Throws
// InputError on duplicate ids, dangling tree numbers (parent path missing),
// empty position lists, or depth beyond 13 layers.
Taxonomy load_taxonomy(const std::string& path);

// Unordered topic pair with a < b, counted over co-occurrences in documents.
struct TopicPair {
    std::string a;
    std::string b;
    std::uint64_t count = 0;

    bool operator==(const TopicPair&) const = default;
};

// Counts every unordered pair of directly co-annotated topics (once per
// document) across both corpora, then keeps the top ceil(fraction * distinct)
// pairs by count, ties broken lexicographically by (a, b).
std::vector<TopicPair> pareto_pairs(const CorpusStore& store, double fraction = 0.2);

} // namespace leadlag
