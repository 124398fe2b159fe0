#include "mechsynth/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

std::optional<NodeId> resolve_label(const std::string& label, const ConceptGraph& graph,
                                    double similarity_threshold) {
    if (auto exact = graph.find_by_label(label)) return exact;
    std::optional<NodeId> best;
    double best_sim = 0.0;
    for (const auto& [id, node] : graph.nodes()) {
        double sim = label_similarity(label, node.canonical_label);
        for (const auto& alias : node.aliases) {
            sim = std::max(sim, label_similarity(label, alias));
        }
        if (sim >= similarity_threshold && sim > best_sim + 1e-12) {
            best = id;
            best_sim = sim;
        }
    }
    return best;
}

bool connected(const ConceptGraph& graph, const NodeId& a, const NodeId& b,
               bool either_direction) {
    if (graph.has_edge_between(a, b)) return true;
    return either_direction && graph.has_edge_between(b, a);
}

std::optional<double> report_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

double symbolic_depth(const std::vector<ReasoningPath>& paths) {
    if (paths.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : paths) sum += static_cast<double>(p.length_nodes());
    return sum / static_cast<double>(paths.size());
}

double grounded_depth(const std::vector<GroundedChain>& chains) {
    if (chains.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : chains) {
        // A collapsed chain has no surviving causal structure; it counts
        // as zero depth, not as a one-node residue.
        if (!is_collapsed(c)) sum += static_cast<double>(c.grounded_length);
    }
    return sum / static_cast<double>(chains.size());
}

std::optional<double> drop_rate(double d_sym, double d_ground) {
    if (d_sym <= 0.0) {
        if (d_ground <= 0.0) return 0.0;
        return std::nullopt;
    }
    return std::max(0.0, 1.0 - d_ground / d_sym);
}

bool is_collapsed(const GroundedChain& chain) { return chain.grounded_length < 2; }

double failure_rate(const std::vector<GroundedChain>& chains) {
    if (chains.empty()) throw std::invalid_argument("failure_rate over zero hypotheses");
    std::size_t collapsed = 0;
    for (const auto& c : chains) {
        if (is_collapsed(c)) ++collapsed;
    }
    return static_cast<double>(collapsed) / static_cast<double>(chains.size());
}

double diversity_jaccard(const std::vector<std::set<std::string>>& concept_sets) {
    if (concept_sets.size() < 2)
        throw std::invalid_argument("diversity needs at least two concept sets");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < concept_sets.size(); ++i) {
        for (std::size_t j = i + 1; j < concept_sets.size(); ++j) {
            sum += jaccard(concept_sets[i], concept_sets[j]);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

GroundedChain ground_chain(const std::vector<std::string>& stated_labels,
                           const ConceptGraph& graph, const GroundingConfig& config) {
    GroundedChain chain;
    chain.nodes = stated_labels;
    for (const auto& label : stated_labels) {
        if (auto id = resolve_label(label, graph, config.similarity_threshold)) {
            chain.mapped_node_ids.push_back(*id);
        }
    }

    // Longest contiguous run of resolved nodes whose consecutive pairs are
    // connected in the graph.
    std::size_t best = chain.mapped_node_ids.empty() ? 0 : 1;
    std::size_t run = chain.mapped_node_ids.empty() ? 0 : 1;
    for (std::size_t i = 0; i + 1 < chain.mapped_node_ids.size(); ++i) {
        if (connected(graph, chain.mapped_node_ids[i], chain.mapped_node_ids[i + 1],
                      config.either_direction)) {
            ++run;
        } else {
            run = 1;
        }
        best = std::max(best, run);
    }
    chain.grounded_length = best;
    return chain;
}

BehavioralReport build_report(const std::string& query_id,
                              const std::vector<ReasoningPath>& paths,
                              const std::vector<GroundedChain>& chains,
                              const std::vector<std::set<std::string>>& concept_sets,
                              bool bridge_attempted) {
    BehavioralReport report;
    report.query_id = query_id;
    report.n_paths = paths.size();
    report.n_hypotheses = chains.size();
    report.d_sym = symbolic_depth(paths);
    report.d_ground = grounded_depth(chains);
    report.bridge_attempted = bridge_attempted;
    report.abstention = chains.empty();

    if (report.n_paths > 0 && report.d_sym > 0.0) {
        report.drop_rate = std::max(0.0, 1.0 - report.d_ground / report.d_sym);
    }
    if (!chains.empty()) report.failure_rate = failure_rate(chains);
    if (concept_sets.size() >= 2) report.diversity_jaccard = diversity_jaccard(concept_sets);
    return report;
}

nlohmann::json BehavioralReport::to_json() const {
    nlohmann::json j{{"query_id", query_id},
                     {"d_sym", round6(d_sym)},
                     {"d_ground", round6(d_ground)},
                     {"bridge_attempted", bridge_attempted},
                     {"abstention", abstention},
                     {"n_paths", n_paths},
                     {"n_hypotheses", n_hypotheses}};
    j["drop_rate"] = drop_rate ? nlohmann::json(round6(*drop_rate)) : nlohmann::json();
    j["failure_rate"] =
        failure_rate ? nlohmann::json(round6(*failure_rate)) : nlohmann::json();
    j["diversity_jaccard"] =
        diversity_jaccard ? nlohmann::json(round6(*diversity_jaccard)) : nlohmann::json();
    return j;
}

BehavioralReport BehavioralReport::from_json(const nlohmann::json& j) {
    BehavioralReport report;
    report.query_id = j.at("query_id").get<std::string>();
    report.d_sym = j.at("d_sym").get<double>();
    report.d_ground = j.at("d_ground").get<double>();
    report.drop_rate = report_double(j, "drop_rate");
    report.failure_rate = report_double(j, "failure_rate");
    report.diversity_jaccard = report_double(j, "diversity_jaccard");
    report.bridge_attempted = j.at("bridge_attempted").get<bool>();
    report.abstention = j.value("abstention", false);
    report.n_paths = j.at("n_paths").get<std::size_t>();
    report.n_hypotheses = j.at("n_hypotheses").get<std::size_t>();
    return report;
}

}  // namespace mechsynth
