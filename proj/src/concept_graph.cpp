#include "mechsynth/concept_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

// Union-find over dense indices.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void merge(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

std::string counter_id(char prefix, unsigned n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%04u", prefix, n);
    return buf;
}

}  // namespace

std::string to_string(EdgeOrigin origin) {
    switch (origin) {
        case EdgeOrigin::Extraction: return "extraction";
        case EdgeOrigin::Densification: return "densification";
        case EdgeOrigin::Lens: return "lens";
    }
    return "extraction";
}

EdgeOrigin edge_origin_from_string(const std::string& s) {
    if (s == "extraction") return EdgeOrigin::Extraction;
    if (s == "densification") return EdgeOrigin::Densification;
    if (s == "lens") return EdgeOrigin::Lens;
    throw std::invalid_argument("unknown edge origin: " + s);
}

ConceptGraph::ConceptGraph(std::string query_id, bool allow_self_loops)
    : query_id_(std::move(query_id)), allow_self_loops_(allow_self_loops) {}

NodeId ConceptGraph::fresh_node_id() {
    NodeId id = counter_id('c', next_node_++);
    while (nodes_.count(id)) id = counter_id('c', next_node_++);
    return id;
}

EdgeId ConceptGraph::fresh_edge_id() {
    EdgeId id = counter_id('e', next_edge_++);
    while (edges_.count(id)) id = counter_id('e', next_edge_++);
    return id;
}

void ConceptGraph::index_label(const std::string& label, const NodeId& id) {
    label_index_.emplace(fold_case(label), id);
}

NodeId ConceptGraph::add_concept(const std::string& label,
                                 const std::set<std::string>& aliases,
                                 const std::set<std::string>& provenance) {
    if (trim(label).empty()) throw std::invalid_argument("empty concept label");

    if (auto existing = find_by_label(label)) {
        ConceptNode& node = nodes_.at(*existing);
        for (const auto& a : aliases) {
            if (fold_case(a) != fold_case(node.canonical_label)) {
                node.aliases.insert(a);
                index_label(a, node.id);
            }
        }
        node.provenance.insert(provenance.begin(), provenance.end());
        return *existing;
    }

    ConceptNode node;
    node.id = fresh_node_id();
    node.canonical_label = trim(label);
    node.provenance = provenance;
    for (const auto& a : aliases) {
        if (fold_case(a) != fold_case(node.canonical_label)) node.aliases.insert(a);
    }
    index_label(node.canonical_label, node.id);
    for (const auto& a : node.aliases) index_label(a, node.id);
    const NodeId id = node.id;
    nodes_.emplace(id, std::move(node));
    out_[id];
    in_[id];
    return id;
}

EdgeId ConceptGraph::add_relation(const NodeId& source, const NodeId& target,
                                  const std::string& relation_label,
                                  const std::vector<EvidenceSpan>& evidence,
                                  EdgeOrigin origin) {
    if (!has_node(source)) throw std::invalid_argument("unknown source node: " + source);
    if (!has_node(target)) throw std::invalid_argument("unknown target node: " + target);
    if (source == target && !allow_self_loops_)
        throw std::invalid_argument("self-loop rejected: " + source);

    // Repeated triples merge instead of creating parallel edges.
    for (const EdgeId& eid : out_.at(source)) {
        RelationEdge& e = edges_.at(eid);
        if (e.target == target && e.relation_label == relation_label) {
            e.evidence.insert(e.evidence.end(), evidence.begin(), evidence.end());
            return eid;
        }
    }

    RelationEdge edge;
    edge.id = fresh_edge_id();
    edge.source = source;
    edge.target = target;
    edge.relation_label = relation_label;
    edge.evidence = evidence;
    edge.origin = origin;
    const EdgeId id = edge.id;
    edges_.emplace(id, std::move(edge));
    out_[source].push_back(id);
    in_[target].push_back(id);
    return id;
}

const ConceptNode& ConceptGraph::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::invalid_argument("unknown node: " + id);
    return it->second;
}

const RelationEdge& ConceptGraph::edge(const EdgeId& id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw std::invalid_argument("unknown edge: " + id);
    return it->second;
}

std::optional<NodeId> ConceptGraph::find_by_label(const std::string& label) const {
    auto it = label_index_.find(fold_case(label));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

std::set<NodeId> ConceptGraph::successors(const NodeId& id) const {
    std::set<NodeId> result;
    auto it = out_.find(id);
    if (it == out_.end()) return result;
    for (const EdgeId& eid : it->second) result.insert(edges_.at(eid).target);
    return result;
}

std::set<NodeId> ConceptGraph::predecessors(const NodeId& id) const {
    std::set<NodeId> result;
    auto it = in_.find(id);
    if (it == in_.end()) return result;
    for (const EdgeId& eid : it->second) result.insert(edges_.at(eid).source);
    return result;
}

std::vector<EdgeId> ConceptGraph::out_edges(const NodeId& id) const {
    auto it = out_.find(id);
    return it == out_.end() ? std::vector<EdgeId>{} : it->second;
}

bool ConceptGraph::has_edge_between(const NodeId& a, const NodeId& b) const {
    auto it = out_.find(a);
    if (it == out_.end()) return false;
    for (const EdgeId& eid : it->second) {
        if (edges_.at(eid).target == b) return true;
    }
    return false;
}

std::size_t ConceptGraph::out_degree(const NodeId& id) const {
    auto it = out_.find(id);
    return it == out_.end() ? 0 : it->second.size();
}

std::size_t ConceptGraph::degree(const NodeId& id) const {
    std::set<NodeId> neighbors = successors(id);
    const auto preds = predecessors(id);
    neighbors.insert(preds.begin(), preds.end());
    neighbors.erase(id);
    return neighbors.size();
}

nlohmann::json ConceptGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, node] : nodes_) {
        nodes.push_back({{"id", id},
                         {"canonical_label", node.canonical_label},
                         {"aliases", node.aliases},
                         {"provenance", node.provenance}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [id, e] : edges_) {
        nlohmann::json spans = nlohmann::json::array();
        for (const auto& span : e.evidence) {
            spans.push_back({{"doc_id", span.doc_id}, {"excerpt", span.excerpt}});
        }
        edges.push_back({{"source", e.source},
                         {"target", e.target},
                         {"relation_label", e.relation_label},
                         {"evidence", spans},
                         {"origin", to_string(e.origin)}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

ConceptGraph ConceptGraph::from_json(const nlohmann::json& j, const std::string& query_id,
                                     bool allow_self_loops) {
    ConceptGraph g(query_id, allow_self_loops);
    for (const auto& n : j.at("nodes")) {
        ConceptNode node;
        node.id = n.at("id").get<std::string>();
        node.canonical_label = n.at("canonical_label").get<std::string>();
        if (n.contains("aliases")) node.aliases = n.at("aliases").get<std::set<std::string>>();
        if (n.contains("provenance"))
            node.provenance = n.at("provenance").get<std::set<std::string>>();
        if (g.nodes_.count(node.id))
            throw std::invalid_argument("duplicate node id: " + node.id);
        g.index_label(node.canonical_label, node.id);
        for (const auto& a : node.aliases) g.index_label(a, node.id);
        g.out_[node.id];
        g.in_[node.id];
        g.nodes_.emplace(node.id, std::move(node));
    }
    for (const auto& e : j.at("edges")) {
        std::vector<EvidenceSpan> spans;
        if (e.contains("evidence")) {
            for (const auto& s : e.at("evidence")) {
                spans.push_back({s.at("doc_id").get<std::string>(),
                                 s.at("excerpt").get<std::string>()});
            }
        }
        g.add_relation(e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                       e.at("relation_label").get<std::string>(), spans,
                       edge_origin_from_string(e.value("origin", std::string("extraction"))));
    }
    return g;
}

bool ConceptGraph::operator==(const ConceptGraph& other) const {
    return query_id_ == other.query_id_ && to_json() == other.to_json();
}

ConceptGraph normalize(const ConceptGraph& graph, double similarity_threshold) {
    if (similarity_threshold < 0.0 || similarity_threshold > 1.0)
        throw std::invalid_argument("similarity threshold outside [0,1]");

    std::vector<NodeId> ids;
    ids.reserve(graph.nodes_.size());
    for (const auto& [id, _] : graph.nodes_) ids.push_back(id);

    DisjointSets sets(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const double sim = label_similarity(graph.nodes_.at(ids[i]).canonical_label,
                                                graph.nodes_.at(ids[j]).canonical_label);
            if (sim >= similarity_threshold) sets.merge(i, j);
        }
    }

    // Representative of a cluster = smallest node id in it.
    std::map<std::size_t, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < ids.size(); ++i) clusters[sets.find(i)].push_back(i);

    std::map<NodeId, NodeId> canonical_of;
    ConceptGraph result(graph.query_id_, graph.allow_self_loops_);
    result.next_node_ = graph.next_node_;

    for (const auto& [_, members] : clusters) {
        const NodeId& rep = ids[*std::min_element(members.begin(), members.end(),
                                                  [&](std::size_t a, std::size_t b) {
                                                      return ids[a] < ids[b];
                                                  })];
        ConceptNode merged;
        merged.id = rep;
        merged.canonical_label = graph.nodes_.at(rep).canonical_label;
        for (std::size_t m : members) {
            const ConceptNode& src = graph.nodes_.at(ids[m]);
            canonical_of[src.id] = rep;
            if (src.id != rep) merged.aliases.insert(src.canonical_label);
            merged.aliases.insert(src.aliases.begin(), src.aliases.end());
            merged.provenance.insert(src.provenance.begin(), src.provenance.end());
        }
        merged.aliases.erase(merged.canonical_label);
        result.index_label(merged.canonical_label, rep);
        for (const auto& a : merged.aliases) result.index_label(a, rep);
        result.out_[rep];
        result.in_[rep];
        result.nodes_.emplace(rep, std::move(merged));
    }

    // Re-target edges onto cluster representatives; identical triples merge
    // their evidence in edge-id order so the result is deterministic.
    struct MergedEdge {
        std::vector<EvidenceSpan> evidence;
        EdgeOrigin origin;
    };
    std::map<std::tuple<NodeId, NodeId, std::string>, MergedEdge> merged_edges;
    for (const auto& [_, e] : graph.edges_) {
        const NodeId src = canonical_of.at(e.source);
        const NodeId tgt = canonical_of.at(e.target);
        if (src == tgt && !graph.allow_self_loops_) continue;
        auto key = std::make_tuple(src, tgt, e.relation_label);
        auto it = merged_edges.find(key);
        if (it == merged_edges.end()) {
            merged_edges.emplace(key, MergedEdge{e.evidence, e.origin});
        } else {
            it->second.evidence.insert(it->second.evidence.end(), e.evidence.begin(),
                                       e.evidence.end());
        }
    }
    for (const auto& [key, me] : merged_edges) {
        result.add_relation(std::get<0>(key), std::get<1>(key), std::get<2>(key), me.evidence,
                            me.origin);
    }
    return result;
}

ConceptGraph cleanup(const ConceptGraph& graph, std::size_t min_component_size) {
    if (min_component_size < 1) throw std::invalid_argument("min_component_size must be >= 1");

    std::vector<NodeId> ids;
    std::map<NodeId, std::size_t> index_of;
    for (const auto& [id, node] : graph.nodes_) {
        if (!well_formed_label(node.canonical_label)) continue;
        index_of[id] = ids.size();
        ids.push_back(id);
    }

    DisjointSets sets(ids.size());
    for (const auto& [_, e] : graph.edges_) {
        auto a = index_of.find(e.source);
        auto b = index_of.find(e.target);
        if (a != index_of.end() && b != index_of.end()) sets.merge(a->second, b->second);
    }

    std::map<std::size_t, std::size_t> component_size;
    for (std::size_t i = 0; i < ids.size(); ++i) ++component_size[sets.find(i)];

    std::set<NodeId> kept;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (component_size[sets.find(i)] >= min_component_size) kept.insert(ids[i]);
    }

    ConceptGraph result(graph.query_id_, graph.allow_self_loops_);
    result.next_node_ = graph.next_node_;
    result.next_edge_ = graph.next_edge_;
    for (const NodeId& id : kept) {
        const ConceptNode& node = graph.nodes_.at(id);
        result.index_label(node.canonical_label, id);
        for (const auto& a : node.aliases) result.index_label(a, id);
        result.out_[id];
        result.in_[id];
        result.nodes_.emplace(id, node);
    }
    for (const auto& [eid, e] : graph.edges_) {
        if (!kept.count(e.source) || !kept.count(e.target)) continue;
        result.edges_.emplace(eid, e);
        result.out_[e.source].push_back(eid);
        result.in_[e.target].push_back(eid);
    }
    return result;
}

GraphStats graph_stats(const ConceptGraph& graph) {
    return {graph.nodes().size(), graph.edges().size()};
}

}  // namespace mechsynth
