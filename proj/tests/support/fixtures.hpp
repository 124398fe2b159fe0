#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mechsynth/concept_graph.hpp"
#include "support/random.hpp"

namespace testsupport {

using mechsynth::ConceptGraph;
using mechsynth::NodeId;

struct LabeledGraph {
    ConceptGraph g{"test"};
    std::map<std::string, NodeId> id;

    NodeId at(const std::string& label) const { return id.at(label); }

    std::vector<NodeId> ids(const std::vector<std::string>& labels) const {
        std::vector<NodeId> out;
        for (const auto& l : labels) out.push_back(id.at(l));
        return out;
    }
};

inline LabeledGraph make_graph(const std::vector<std::string>& labels,
                               const std::vector<std::pair<std::string, std::string>>& edges) {
    LabeledGraph lg;
    for (const auto& l : labels) lg.id[l] = lg.g.add_concept(l);
    for (const auto& [a, b] : edges) {
        lg.g.add_relation(lg.id.at(a), lg.id.at(b), "rel", {{"doc", a + " to " + b}});
    }
    return lg;
}

// Random digraph over n distinct single-letter labels.
inline LabeledGraph random_digraph(std::mt19937_64& rng, std::size_t max_nodes,
                                   double edge_prob) {
    const std::size_t n = 2 + bounded(rng, max_nodes - 1);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(1, 'A' + char(i)));
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && unit_real(rng) < edge_prob) edges.push_back({labels[i], labels[j]});
        }
    }
    return make_graph(labels, edges);
}

}  // namespace testsupport
