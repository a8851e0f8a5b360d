#include "leadlag/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "leadlag/corpus.hpp"

namespace leadlag {

using nlohmann::json;

namespace {

int segment_count(const std::string& tree_number) {
    return 1 + static_cast<int>(std::count(tree_number.begin(), tree_number.end(), '.'));
}

std::string parent_path(const std::string& tree_number) {
    auto pos = tree_number.rfind('.');
    return pos == std::string::npos ? std::string() : tree_number.substr(0, pos);
}

std::string root_segment(const std::string& tree_number) {
    auto pos = tree_number.find('.');
    return pos == std::string::npos ? tree_number : tree_number.substr(0, pos);
}

} // namespace

const TopicNode& Taxonomy::node(const std::string& id) const {
    return nodes_[node_index(id)];
}

std::uint32_t Taxonomy::node_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown topic id: " + id);
    return it->second;
}

std::vector<std::string> Taxonomy::descendants(const std::string& id) const {
    const auto& idx = descendants_[node_index(id)];
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(nodes_[i].id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Taxonomy::topics_at_depth(int d) const {
    if (d < 1 || d > kMaxDepth) throw InputError("depth out of range: " + std::to_string(d));
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.depth <= d) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Taxonomy::top_ancestors(const std::string& id) const {
    const auto& idx = roots_[node_index(id)];
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(nodes_[i].id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Taxonomy::root_topics() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.depth == 1) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

void Taxonomy::build_tables() {
    // Topic-level child adjacency from position parenthood: x is a child of
    // m when any tree position of x extends a position of m by one segment.
    // Descendants are the transitive closure of that relation, so a node
    // reached through one of its positions contributes its entire identity
    // (all of its subtrees elsewhere included). This keeps descendants
    // transitive even for multi-position topics.
    std::vector<std::vector<std::uint32_t>> children(nodes_.size());
    for (const auto& [pos, owner] : position_owner_) {
        std::string parent = parent_path(pos);
        if (parent.empty()) continue;
        auto it = position_owner_.find(parent);
        if (it == position_owner_.end())
            throw InputError("dangling tree number " + pos + ": parent path " + parent + " missing");
        if (it->second != owner) children[it->second].push_back(owner);
    }

    descendants_.assign(nodes_.size(), {});
    roots_.assign(nodes_.size(), {});

    std::vector<std::uint32_t> visited(nodes_.size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        std::vector<std::uint32_t> desc;
        std::vector<std::uint32_t> stack = {i};
        visited[i] = i;
        while (!stack.empty()) {
            std::uint32_t cur = stack.back();
            stack.pop_back();
            desc.push_back(cur);
            for (auto ch : children[cur]) {
                if (visited[ch] != i) {
                    visited[ch] = i;
                    stack.push_back(ch);
                }
            }
        }
        std::sort(desc.begin(), desc.end());
        descendants_[i] = std::move(desc);

        std::vector<std::uint32_t> roots;
        for (const auto& pos : nodes_[i].tree_numbers) roots.push_back(position_owner_.at(root_segment(pos)));
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        roots_[i] = std::move(roots);
    }
}

Taxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open taxonomy file: " + path);

    Taxonomy tax;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
            !rec.contains("tree_numbers") || !rec["tree_numbers"].is_array())
            throw InputError("malformed taxonomy record at " + path + ":" + std::to_string(line_no));

        TopicNode node;
        node.id = rec["id"].get<std::string>();
        if (rec.contains("label") && rec["label"].is_string()) node.label = rec["label"].get<std::string>();
        for (const auto& t : rec["tree_numbers"]) {
            if (!t.is_string() || t.get<std::string>().empty())
                throw InputError("bad tree number for topic " + node.id);
            node.tree_numbers.push_back(t.get<std::string>());
        }
        if (node.tree_numbers.empty()) throw InputError("topic without tree numbers: " + node.id);

        node.depth = kMaxDepth + 1;
        for (const auto& pos : node.tree_numbers) {
            if (segment_count(pos) > kMaxDepth)
                throw InputError("tree number " + pos + " deeper than " + std::to_string(kMaxDepth) + " layers");
            node.depth = std::min(node.depth, segment_count(pos));
        }

        auto idx = static_cast<std::uint32_t>(tax.nodes_.size());
        if (!tax.index_.emplace(node.id, idx).second) throw InputError("duplicate topic id: " + node.id);
        for (const auto& pos : node.tree_numbers)
            if (!tax.position_owner_.emplace(pos, idx).second)
                throw InputError("tree number claimed twice: " + pos);
        tax.max_depth_ = std::max(tax.max_depth_, node.depth);
        tax.nodes_.push_back(std::move(node));
    }

    tax.build_tables();
    return tax;
}

std::vector<TopicPair> pareto_pairs(const CorpusStore& store, double fraction) {
    if (store.size() == 0) throw InputError("pareto_pairs: empty store");
    if (!(fraction > 0.0) || fraction > 1.0) throw InputError("pareto_pairs: fraction must be in (0, 1]");

    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    for (const auto& doc : store.documents()) {
        const auto& t = doc.topics; // sorted unique, so pairs come out canonical
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j < t.size(); ++j) counts[{t[i], t[j]}] += 1;
    }

    std::vector<TopicPair> pairs;
    pairs.reserve(counts.size());
    for (const auto& [key, n] : counts) pairs.push_back({key.first, key.second, n});
    std::sort(pairs.begin(), pairs.end(), [](const TopicPair& x, const TopicPair& y) {
        if (x.count != y.count) return x.count > y.count;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pairs.size())));
    if (keep < pairs.size()) pairs.resize(keep);
    return pairs;
}

} // namespace leadlag
