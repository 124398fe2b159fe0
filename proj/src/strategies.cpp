#include "mechsynth/strategies.hpp"

#include <set>
#include <stdexcept>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

std::set<std::string> node_set(const ReasoningPath& p) {
    return {p.nodes.begin(), p.nodes.end()};
}

void validate(const StrategyConfig& config) {
    if (config.k < 1) throw std::invalid_argument("k must be >= 1");
    if (config.overlap_threshold < 0.0 || config.overlap_threshold > 1.0)
        throw std::invalid_argument("overlap_threshold outside [0,1]");
    if (config.min_path_nodes < 2)
        throw std::invalid_argument("min_path_nodes must be >= 2");
}

}  // namespace

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FullDiversity: return "full_diversity";
        case StrategyKind::ShortestPath: return "shortest_path";
        case StrategyKind::RandomWalk: return "random_walk";
        case StrategyKind::RagBaseline: return "rag_baseline";
    }
    return "full_diversity";
}

StrategyKind strategy_from_string(const std::string& s) {
    if (s == "full" || s == "full_diversity") return StrategyKind::FullDiversity;
    if (s == "shortest" || s == "shortest_path") return StrategyKind::ShortestPath;
    if (s == "walk" || s == "random_walk") return StrategyKind::RandomWalk;
    if (s == "rag" || s == "rag_baseline") return StrategyKind::RagBaseline;
    throw std::invalid_argument("unknown strategy: " + s);
}

std::vector<ReasoningPath> select_diverse(const std::vector<ReasoningPath>& candidates,
                                          double overlap_threshold, std::size_t max_keep) {
    if (overlap_threshold < 0.0 || overlap_threshold > 1.0)
        throw std::invalid_argument("overlap_threshold outside [0,1]");

    std::vector<ReasoningPath> kept;
    std::vector<std::set<std::string>> kept_sets;
    for (const auto& candidate : candidates) {
        if (kept.size() >= max_keep) break;
        const auto cs = node_set(candidate);
        bool accept = true;
        for (const auto& ks : kept_sets) {
            if (jaccard(cs, ks) > overlap_threshold) {
                accept = false;
                break;
            }
        }
        if (accept) {
            kept.push_back(candidate);
            kept_sets.push_back(cs);
        }
    }
    return kept;
}

SymbolicResult run_strategy(const ConceptGraph& graph,
                            const std::vector<std::pair<NodeId, NodeId>>& endpoints,
                            const StrategyConfig& config, const Partition& partition,
                            const EdgeWeights& weights) {
    validate(config);
    if (endpoints.empty() && config.kind != StrategyKind::RagBaseline)
        throw std::invalid_argument("endpoints required for graph-constrained strategies");
    for (const auto& [s, t] : endpoints) {
        if (!graph.has_node(s)) throw std::invalid_argument("unknown endpoint: " + s);
        if (!graph.has_node(t)) throw std::invalid_argument("unknown endpoint: " + t);
    }

    SymbolicResult result;
    result.endpoint_pairs = endpoints;

    const auto long_enough = [&](const ReasoningPath& p) {
        return p.length_nodes() >= config.min_path_nodes;
    };

    switch (config.kind) {
        case StrategyKind::ShortestPath: {
            for (const auto& [s, t] : endpoints) {
                auto p = shortest_path(graph, s, t, weights);
                if (p && long_enough(*p)) {
                    p->strategy_tag = to_string(config.kind);
                    result.paths.push_back(std::move(*p));
                }
            }
            break;
        }
        case StrategyKind::FullDiversity: {
            std::vector<ReasoningPath> candidates;
            for (const auto& [s, t] : endpoints) {
                for (auto& p : k_shortest_paths(graph, s, t, config.k, weights)) {
                    if (long_enough(p)) candidates.push_back(std::move(p));
                }
            }
            result.paths = select_diverse(candidates, config.overlap_threshold, config.k);
            for (auto& p : result.paths) p.strategy_tag = to_string(config.kind);
            break;
        }
        case StrategyKind::RandomWalk: {
            // Walks start from the endpoint sources, cycling in order.
            std::vector<NodeId> sources;
            for (const auto& [s, _] : endpoints) sources.push_back(s);
            for (std::size_t i = 0; i < config.walk_count; ++i) {
                const NodeId& start = sources[i % sources.size()];
                auto p = random_walk(graph, start, config.max_hops,
                                     config.seed + 0x9E3779B97F4A7C15ull * i);
                if (long_enough(p)) {
                    p.strategy_tag = to_string(config.kind);
                    result.paths.push_back(std::move(p));
                }
            }
            break;
        }
        case StrategyKind::RagBaseline:
            break;
    }

    if (config.kind != StrategyKind::RagBaseline) {
        for (const auto& [s, t] : endpoints) {
            auto is = partition.assignment.find(s);
            auto it = partition.assignment.find(t);
            if (is == partition.assignment.end() || it == partition.assignment.end())
                throw std::invalid_argument("partition does not cover endpoints");
            if (is->second != it->second) {
                result.bridge_attempted = true;
                break;
            }
        }
    }
    return result;
}

}  // namespace mechsynth
