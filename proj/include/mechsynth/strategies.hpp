#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mechsynth/community.hpp"
#include "mechsynth/concept_graph.hpp"
#include "mechsynth/traversal.hpp"

namespace mechsynth {

enum class StrategyKind { FullDiversity, ShortestPath, RandomWalk, RagBaseline };

std::string to_string(StrategyKind kind);
// Accepts both the long names and the CLI short forms
// (full, shortest, walk, rag).
StrategyKind strategy_from_string(const std::string& s);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FullDiversity;
    std::size_t k = 5;                 // candidate paths per endpoint pair
    double overlap_threshold = 0.30;   // diversity filter acceptance bound
    std::size_t walk_count = 5;
    std::size_t max_hops = 6;
    std::uint64_t seed = 0;
    std::size_t min_path_nodes = 3;    // enforces at least two hops
};

struct SymbolicResult {
    std::vector<ReasoningPath> paths;
    std::vector<std::pair<NodeId, NodeId>> endpoint_pairs;
    bool bridge_attempted = false;

    bool operator==(const SymbolicResult&) const = default;
};

// Greedy scan over preference-ordered candidates: a candidate is kept iff
// its node-set Jaccard similarity with every kept path stays at or below
// overlap_threshold. Stops once max_keep paths are kept.
std::vector<ReasoningPath> select_diverse(const std::vector<ReasoningPath>& candidates,
                                          double overlap_threshold, std::size_t max_keep);

// Runs one reasoning strategy over the endpoint pairs. rag_baseline
// ignores the graph and yields no symbolic paths; the other kinds filter
// out paths shorter than min_path_nodes. bridge_attempted is true iff any
// endpoint pair spans two communities of the partition (never for
// rag_baseline). Edge weights bias the shortest-path kinds, as with a lens.
SymbolicResult run_strategy(const ConceptGraph& graph,
                            const std::vector<std::pair<NodeId, NodeId>>& endpoints,
                            const StrategyConfig& config, const Partition& partition,
                            const EdgeWeights& weights = {});

}  // namespace mechsynth
