#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mechsynth/concept_graph.hpp"

namespace mechsynth {

struct Partition {
    std::map<NodeId, int> assignment;
    int community_count = 0;

    bool operator==(const Partition&) const = default;
};

struct StructuralHole {
    int community_a = 0;  // always < community_b
    int community_b = 0;
    std::size_t inter_edge_count = 0;
    std::vector<std::pair<NodeId, NodeId>> candidate_pairs;
};

// Newman modularity with a resolution parameter, computed on the binary
// undirected symmetrization (self-loops ignored). Zero-edge graphs score 0.
// Throws if the partition does not cover every node.
double modularity(const ConceptGraph& graph, const Partition& partition,
                  double resolution = 1.0);

// Seeded Louvain on the symmetrized graph. The node sweep order is a
// seeded shuffle, several derived starts run and the best-Q result wins,
// so a fixed (graph, resolution, seed) always yields the same partition.
// Community ids are dense, ordered by smallest member node id. Throws on
// an empty graph.
Partition louvain(const ConceptGraph& graph, double resolution = 1.0,
                  std::uint64_t seed = 0);

// Unordered community pairs with at most max_inter_edges cross edges,
// each carrying up to top_pairs candidate bridge endpoints ranked by the
// product of within-community degree.
std::vector<StructuralHole> structural_holes(const ConceptGraph& graph,
                                             const Partition& partition,
                                             std::size_t max_inter_edges = 0,
                                             std::size_t top_pairs = 3);

}  // namespace mechsynth
