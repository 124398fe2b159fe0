#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mechsynth/concept_graph.hpp"
#include "mechsynth/traversal.hpp"

namespace mechsynth {

// Causal chain as stated by a hypothesis, resolved against the graph.
// grounded_length is the longest contiguous run of resolved labels whose
// consecutive pairs are connected; that run is what depth and collapse
// are measured on.
struct GroundedChain {
    std::vector<std::string> nodes;       // labels in stated order
    std::vector<NodeId> mapped_node_ids;  // resolved labels, order preserved
    std::size_t grounded_length = 0;

    bool operator==(const GroundedChain&) const = default;
};

struct GroundingConfig {
    double similarity_threshold = 0.85;  // label resolution, same measure as normalize
    bool either_direction = true;        // connectivity slack for consecutive pairs
};

struct BehavioralReport {
    std::string query_id;
    double d_sym = 0.0;
    double d_ground = 0.0;
    std::optional<double> drop_rate;          // absent without a symbolic baseline
    std::optional<double> failure_rate;       // absent when no hypotheses
    std::optional<double> diversity_jaccard;  // absent below two concept sets
    bool bridge_attempted = false;
    bool abstention = false;  // no hypotheses produced
    std::size_t n_paths = 0;
    std::size_t n_hypotheses = 0;

    nlohmann::json to_json() const;
    static BehavioralReport from_json(const nlohmann::json& j);

    bool operator==(const BehavioralReport&) const = default;
};

// Mean path length in nodes; 0 for an empty list.
double symbolic_depth(const std::vector<ReasoningPath>& paths);

// Mean grounded_length over chains, counting collapsed chains as zero;
// 0 for an empty list.
double grounded_depth(const std::vector<GroundedChain>& chains);

// max(0, 1 - d_ground/d_sym). A zero d_sym yields 0 when d_ground is also
// zero and no value (undefined) otherwise.
std::optional<double> drop_rate(double d_sym, double d_ground);

// A chain whose grounded run has fewer than two nodes.
bool is_collapsed(const GroundedChain& chain);

// Collapsed fraction; rejects an empty list.
double failure_rate(const std::vector<GroundedChain>& chains);

// Mean pairwise Jaccard similarity over the concept sets; lower means
// more diverse. Rejects fewer than two sets.
double diversity_jaccard(const std::vector<std::set<std::string>>& concept_sets);

// Resolves each stated label to a canonical node (exact case-folded
// label/alias match first, then best token-set similarity at or above the
// configured threshold) and measures the longest connected resolved run.
GroundedChain ground_chain(const std::vector<std::string>& stated_labels,
                           const ConceptGraph& graph, const GroundingConfig& config = {});

BehavioralReport build_report(const std::string& query_id,
                              const std::vector<ReasoningPath>& paths,
                              const std::vector<GroundedChain>& chains,
                              const std::vector<std::set<std::string>>& concept_sets,
                              bool bridge_attempted);

}  // namespace mechsynth
