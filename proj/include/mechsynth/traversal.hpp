#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mechsynth/concept_graph.hpp"

namespace mechsynth {

// Ordered node sequence produced by traversal; the symbolic artifact that
// strategies hand to the realization client.
struct ReasoningPath {
    std::vector<NodeId> nodes;
    std::string strategy_tag;

    std::size_t length_nodes() const { return nodes.size(); }
    std::size_t length_hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }

    bool operator==(const ReasoningPath&) const = default;
};

// Per-ordered-pair edge weights; pairs absent from the map cost 1.
using EdgeWeights = std::map<std::pair<NodeId, NodeId>, double>;

double path_cost(const std::vector<NodeId>& nodes, const EdgeWeights& weights);

// Seed-node injection that biases weighted routing toward a focus concept.
struct LensSpec {
    std::string lens_label;
    double bias_weight = 0.4;          // lens-incident edge weight, in (0, 1]
    std::string concept_filter;        // substring match; empty matches all
    std::size_t attach_top_m = 3;      // highest out-degree matches attached
};

struct LensedGraph {
    ConceptGraph graph;
    EdgeWeights weights;  // only lens-incident pairs; everything else 1
    NodeId lens_node;
};

enum class Direction { Out, In, Both };

std::set<NodeId> get_neighbors(const ConceptGraph& graph, const NodeId& node,
                               Direction direction);

// Minimum-weight simple path under (weight, lexicographic node sequence)
// order, or absent when the target is unreachable. Weights must be
// strictly positive.
std::optional<ReasoningPath> shortest_path(const ConceptGraph& graph, const NodeId& source,
                                           const NodeId& target,
                                           const EdgeWeights& weights = {});

// Up to k cheapest loopless paths in (weight, lexicographic) order.
std::vector<ReasoningPath> k_shortest_paths(const ConceptGraph& graph, const NodeId& source,
                                            const NodeId& target, std::size_t k,
                                            const EdgeWeights& weights = {});

// Seeded uniform walk over out-edges; never revisits a node, stops at
// max_hops or when no unvisited successor remains.
ReasoningPath random_walk(const ConceptGraph& graph, const NodeId& start,
                          std::size_t max_hops, std::uint64_t seed);

// All simple paths within max_hops, in (hops, lexicographic) order,
// truncated to max_results.
std::vector<ReasoningPath> find_paths(const ConceptGraph& graph, const NodeId& source,
                                      const NodeId& target, std::size_t max_hops,
                                      std::size_t max_results);

// Adds a lens node attached bidirectionally to the top-m out-degree nodes
// matching the concept filter; lens-incident edges carry bias_weight so
// weighted routing prefers passing through the lens.
LensedGraph inject_lens(const ConceptGraph& graph, const LensSpec& lens);

}  // namespace mechsynth
