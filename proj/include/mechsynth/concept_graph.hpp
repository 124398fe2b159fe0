#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mechsynth {

using NodeId = std::string;
using EdgeId = std::string;

struct ConceptNode {
    NodeId id;
    std::string canonical_label;
    std::set<std::string> aliases;
    std::set<std::string> provenance;  // document ids
};

struct EvidenceSpan {
    std::string doc_id;
    std::string excerpt;

    bool operator==(const EvidenceSpan&) const = default;
};

enum class EdgeOrigin { Extraction, Densification, Lens };

std::string to_string(EdgeOrigin origin);
EdgeOrigin edge_origin_from_string(const std::string& s);

struct RelationEdge {
    EdgeId id;
    NodeId source;
    NodeId target;
    std::string relation_label;
    std::vector<EvidenceSpan> evidence;
    EdgeOrigin origin = EdgeOrigin::Extraction;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;

    bool operator==(const GraphStats&) const = default;
};

// Directed query-local concept graph. Node and edge storage is ordered by
// id so every iteration order, and therefore every derived artifact, is
// deterministic. Construction is single-writer; a fully built graph is an
// immutable value that may be read concurrently.
class ConceptGraph {
public:
    ConceptGraph() = default;
    explicit ConceptGraph(std::string query_id, bool allow_self_loops = false);

    const std::string& query_id() const { return query_id_; }
    bool allow_self_loops() const { return allow_self_loops_; }

    // Inserts a concept, or returns the existing node whose canonical label
    // or alias matches `label` after case folding. Throws
    // std::invalid_argument on an empty label.
    NodeId add_concept(const std::string& label,
                       const std::set<std::string>& aliases = {},
                       const std::set<std::string>& provenance = {});

    // Inserts a directed relation. A repeated (source, target, label) triple
    // merges into the existing edge, appending the new evidence. Throws
    // std::invalid_argument on unknown endpoints or on a self-loop when
    // self-loops are disabled.
    EdgeId add_relation(const NodeId& source, const NodeId& target,
                        const std::string& relation_label,
                        const std::vector<EvidenceSpan>& evidence,
                        EdgeOrigin origin = EdgeOrigin::Extraction);

    bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
    const ConceptNode& node(const NodeId& id) const;
    const RelationEdge& edge(const EdgeId& id) const;

    // Case-folded lookup over canonical labels and aliases.
    std::optional<NodeId> find_by_label(const std::string& label) const;

    const std::map<NodeId, ConceptNode>& nodes() const { return nodes_; }
    const std::map<EdgeId, RelationEdge>& edges() const { return edges_; }

    // Successor / predecessor node ids (deduplicated, sorted).
    std::set<NodeId> successors(const NodeId& id) const;
    std::set<NodeId> predecessors(const NodeId& id) const;
    std::vector<EdgeId> out_edges(const NodeId& id) const;

    bool has_edge_between(const NodeId& a, const NodeId& b) const;

    std::size_t out_degree(const NodeId& id) const;
    std::size_t degree(const NodeId& id) const;  // undirected, deduplicated

    nlohmann::json to_json() const;
    static ConceptGraph from_json(const nlohmann::json& j,
                                  const std::string& query_id = {},
                                  bool allow_self_loops = false);

    bool operator==(const ConceptGraph& other) const;

private:
    NodeId fresh_node_id();
    EdgeId fresh_edge_id();
    void index_label(const std::string& label, const NodeId& id);

    friend ConceptGraph normalize(const ConceptGraph&, double);
    friend ConceptGraph cleanup(const ConceptGraph&, std::size_t);

    std::string query_id_;
    bool allow_self_loops_ = false;
    std::map<NodeId, ConceptNode> nodes_;
    std::map<EdgeId, RelationEdge> edges_;
    std::map<std::string, NodeId> label_index_;  // folded label/alias -> node
    std::map<NodeId, std::vector<EdgeId>> out_;
    std::map<NodeId, std::vector<EdgeId>> in_;
    unsigned next_node_ = 0;
    unsigned next_edge_ = 0;
};

// Merges surface variants whose case-folded token-set Jaccard similarity
// reaches `similarity_threshold`. Clusters are the connected components of
// the pairwise-similarity relation; the surviving node of a cluster is the
// one with the smallest id, and the other labels become its aliases.
// Incident edges are re-targeted and duplicate triples merge their
// evidence. Throws std::invalid_argument if the threshold is outside [0,1].
ConceptGraph normalize(const ConceptGraph& graph, double similarity_threshold);

// Drops nodes with malformed labels, then drops every weakly connected
// component smaller than `min_component_size`. Throws on
// min_component_size == 0.
ConceptGraph cleanup(const ConceptGraph& graph, std::size_t min_component_size);

GraphStats graph_stats(const ConceptGraph& graph);

}  // namespace mechsynth
