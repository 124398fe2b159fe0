#include "mechsynth/traversal.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

double pair_weight(const EdgeWeights& weights, const NodeId& a, const NodeId& b) {
    auto it = weights.find({a, b});
    if (it == weights.end()) return 1.0;
    if (it->second <= 0.0) throw std::invalid_argument("edge weights must be positive");
    return it->second;
}

void require_node(const ConceptGraph& graph, const NodeId& id) {
    if (!graph.has_node(id)) throw std::invalid_argument("unknown node: " + id);
}

using Costed = std::pair<double, std::vector<NodeId>>;

// Uniform-cost search whose heap priority is (cost, node sequence); with
// strictly positive weights the first pop of a node is its unique minimum
// under that total order, so closed-set pruning preserves the tie-break.
std::optional<Costed> ucs(const ConceptGraph& graph, const NodeId& source,
                          const NodeId& target, const EdgeWeights& weights,
                          const std::set<NodeId>& banned_nodes,
                          const std::set<std::pair<NodeId, NodeId>>& banned_edges) {
    if (banned_nodes.count(source) || banned_nodes.count(target)) return std::nullopt;

    std::priority_queue<Costed, std::vector<Costed>, std::greater<>> frontier;
    frontier.push({0.0, {source}});
    std::set<NodeId> closed;

    while (!frontier.empty()) {
        auto [cost, path] = frontier.top();
        frontier.pop();
        const NodeId& v = path.back();
        if (closed.count(v)) continue;
        closed.insert(v);
        if (v == target) return Costed{cost, path};
        for (const NodeId& w : graph.successors(v)) {
            if (closed.count(w) || banned_nodes.count(w)) continue;
            if (banned_edges.count({v, w})) continue;
            auto next = path;
            next.push_back(w);
            frontier.push({cost + pair_weight(weights, v, w), std::move(next)});
        }
    }
    return std::nullopt;
}

bool label_matches(const ConceptNode& node, const std::string& folded_filter) {
    if (folded_filter.empty()) return true;
    if (fold_case(node.canonical_label).find(folded_filter) != std::string::npos) return true;
    for (const auto& a : node.aliases) {
        if (fold_case(a).find(folded_filter) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

double path_cost(const std::vector<NodeId>& nodes, const EdgeWeights& weights) {
    double cost = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        cost += pair_weight(weights, nodes[i], nodes[i + 1]);
    return cost;
}

std::set<NodeId> get_neighbors(const ConceptGraph& graph, const NodeId& node,
                               Direction direction) {
    require_node(graph, node);
    switch (direction) {
        case Direction::Out: return graph.successors(node);
        case Direction::In: return graph.predecessors(node);
        case Direction::Both: {
            auto out = graph.successors(node);
            const auto in = graph.predecessors(node);
            out.insert(in.begin(), in.end());
            return out;
        }
    }
    return {};
}

std::optional<ReasoningPath> shortest_path(const ConceptGraph& graph, const NodeId& source,
                                           const NodeId& target, const EdgeWeights& weights) {
    require_node(graph, source);
    require_node(graph, target);
    auto found = ucs(graph, source, target, weights, {}, {});
    if (!found) return std::nullopt;
    return ReasoningPath{std::move(found->second), "shortest_path"};
}

std::vector<ReasoningPath> k_shortest_paths(const ConceptGraph& graph, const NodeId& source,
                                            const NodeId& target, std::size_t k,
                                            const EdgeWeights& weights) {
    require_node(graph, source);
    require_node(graph, target);
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    std::vector<Costed> accepted;
    auto first = ucs(graph, source, target, weights, {}, {});
    if (!first) return {};
    accepted.push_back(*first);

    std::set<Costed> candidates;
    while (accepted.size() < k) {
        // Yen: branch off every prefix of the latest accepted path.
        const std::vector<NodeId> prev = accepted.back().second;
        for (std::size_t j = 0; j + 1 < prev.size(); ++j) {
            const std::vector<NodeId> root(prev.begin(), prev.begin() + j + 1);
            std::set<std::pair<NodeId, NodeId>> banned_edges;
            for (const auto& [_, p] : accepted) {
                if (p.size() > j + 1 &&
                    std::equal(root.begin(), root.end(), p.begin(), p.begin() + j + 1)) {
                    banned_edges.insert({p[j], p[j + 1]});
                }
            }
            const std::set<NodeId> banned_nodes(root.begin(), root.end() - 1);
            auto spur = ucs(graph, root.back(), target, weights, banned_nodes, banned_edges);
            if (!spur) continue;
            std::vector<NodeId> total(root.begin(), root.end() - 1);
            total.insert(total.end(), spur->second.begin(), spur->second.end());
            candidates.insert({path_cost(total, weights), std::move(total)});
        }
        // Cheapest unseen candidate becomes the next accepted path.
        bool extended = false;
        while (!candidates.empty()) {
            auto best = *candidates.begin();
            candidates.erase(candidates.begin());
            if (std::none_of(accepted.begin(), accepted.end(),
                             [&](const Costed& a) { return a.second == best.second; })) {
                accepted.push_back(std::move(best));
                extended = true;
                break;
            }
        }
        if (!extended) break;
    }

    std::vector<ReasoningPath> result;
    result.reserve(accepted.size());
    for (auto& [_, nodes] : accepted)
        result.push_back({std::move(nodes), "k_shortest"});
    return result;
}

ReasoningPath random_walk(const ConceptGraph& graph, const NodeId& start,
                          std::size_t max_hops, std::uint64_t seed) {
    require_node(graph, start);
    std::mt19937_64 rng(seed);
    std::vector<NodeId> path{start};
    std::set<NodeId> visited{start};

    while (path.size() - 1 < max_hops) {
        std::vector<NodeId> options;
        for (const NodeId& w : graph.successors(path.back())) {
            if (!visited.count(w)) options.push_back(w);
        }
        if (options.empty()) break;
        // Rejection-sampled bound keeps the sequence platform-independent.
        const std::uint64_t n = options.size();
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = rng();
        } while (x >= limit);
        const NodeId& next = options[x % n];
        visited.insert(next);
        path.push_back(next);
    }
    return {std::move(path), "random_walk"};
}

std::vector<ReasoningPath> find_paths(const ConceptGraph& graph, const NodeId& source,
                                      const NodeId& target, std::size_t max_hops,
                                      std::size_t max_results) {
    require_node(graph, source);
    require_node(graph, target);
    if (max_hops < 1 || max_results < 1)
        throw std::invalid_argument("find_paths bounds must be >= 1");

    std::vector<std::vector<NodeId>> found;
    std::vector<NodeId> path{source};
    std::set<NodeId> on_path{source};

    auto dfs = [&](auto&& self, const NodeId& v) -> void {
        if (v == target) {
            found.push_back(path);
            return;
        }
        if (path.size() - 1 >= max_hops) return;
        for (const NodeId& w : graph.successors(v)) {
            if (on_path.count(w)) continue;
            path.push_back(w);
            on_path.insert(w);
            self(self, w);
            on_path.erase(w);
            path.pop_back();
        }
    };
    dfs(dfs, source);

    std::sort(found.begin(), found.end(),
              [](const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    if (found.size() > max_results) found.resize(max_results);

    std::vector<ReasoningPath> result;
    result.reserve(found.size());
    for (auto& nodes : found) result.push_back({std::move(nodes), "find_paths"});
    return result;
}

LensedGraph inject_lens(const ConceptGraph& graph, const LensSpec& lens) {
    if (trim(lens.lens_label).empty())
        throw std::invalid_argument("lens label must be non-empty");
    if (lens.bias_weight <= 0.0 || lens.bias_weight > 1.0)
        throw std::invalid_argument("lens bias_weight must be in (0, 1]");

    LensedGraph out{graph, {}, {}};
    const std::string folded = fold_case(trim(lens.concept_filter));

    // Rank matching nodes by out-degree, ties by id.
    std::vector<NodeId> matches;
    for (const auto& [id, node] : graph.nodes()) {
        if (label_matches(node, folded)) matches.push_back(id);
    }
    std::stable_sort(matches.begin(), matches.end(), [&](const NodeId& a, const NodeId& b) {
        const auto da = graph.out_degree(a), db = graph.out_degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    if (matches.size() > lens.attach_top_m) matches.resize(lens.attach_top_m);

    out.lens_node = out.graph.add_concept(lens.lens_label);
    for (const NodeId& id : matches) {
        if (id == out.lens_node) continue;
        out.graph.add_relation(out.lens_node, id, "lens_focus", {}, EdgeOrigin::Lens);
        out.graph.add_relation(id, out.lens_node, "lens_focus", {}, EdgeOrigin::Lens);
        out.weights[{out.lens_node, id}] = lens.bias_weight;
        out.weights[{id, out.lens_node}] = lens.bias_weight;
    }
    return out;
}

}  // namespace mechsynth
