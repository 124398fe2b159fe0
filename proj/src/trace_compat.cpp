#include "mechsynth/trace_compat.hpp"

#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mechsynth/metrics.hpp"

namespace mechsynth {

namespace {

// Key sets the adapter understands at each level of the external layout.
const std::set<std::string> kTopKeys = {"query_id", "query",  "strategy",
                                        "graph",    "paths",  "causal_chains",
                                        "metrics"};
const std::set<std::string> kGraphKeys = {"nodes", "edges"};
const std::set<std::string> kNodeKeys = {"id", "label"};
const std::set<std::string> kEdgeKeys = {"source", "target", "relation"};
const std::set<std::string> kMetricKeys = {"avg_sym_depth", "avg_ground_depth", "drop_rate",
                                           "failure_rate"};

void note_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                       const std::string& prefix, std::set<std::string>& unmapped) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key())) unmapped.insert(prefix + it.key());
}

}  // namespace

CompatResult read_external_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open external trace file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw TraceError(path + ": " + e.what());
    }
    if (!j.is_object()) throw TraceError(path + ": top level is not an object");

    CompatResult result;
    std::set<std::string> unmapped;
    note_unknown_keys(j, kTopKeys, "", unmapped);

    TraceRecord& record = result.record;
    record.query_id = j.value("query_id", std::string{"external"});
    record.query_text = j.value("query", std::string{});
    record.strategy_tag = j.value("strategy", std::string{});
    record.config = {{"imported_from", "external"}};

    ConceptGraph graph(record.query_id);
    std::map<std::string, NodeId> by_external_id;
    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        note_unknown_keys(g, kGraphKeys, "graph.", unmapped);
        for (const auto& n : g.value("nodes", nlohmann::json::array())) {
            note_unknown_keys(n, kNodeKeys, "graph.nodes[].", unmapped);
            const std::string label = n.value("label", std::string{});
            if (label.empty()) {
                result.warnings.push_back("node without label skipped");
                continue;
            }
            const NodeId id = graph.add_concept(label);
            if (n.contains("id")) by_external_id[n.at("id").get<std::string>()] = id;
        }
        for (const auto& e : g.value("edges", nlohmann::json::array())) {
            note_unknown_keys(e, kEdgeKeys, "graph.edges[].", unmapped);
            const auto s = by_external_id.find(e.value("source", std::string{}));
            const auto t = by_external_id.find(e.value("target", std::string{}));
            if (s == by_external_id.end() || t == by_external_id.end()) {
                result.warnings.push_back("edge with unknown endpoint skipped");
                continue;
            }
            graph.add_relation(s->second, t->second, e.value("relation", std::string{"related to"}),
                               {}, EdgeOrigin::Extraction);
        }
    }
    record.graph_passes.emplace_back("final", graph.to_json());

    for (const auto& p : j.value("paths", nlohmann::json::array())) {
        ReasoningPath rp;
        rp.strategy_tag = record.strategy_tag;
        bool ok = true;
        for (const auto& label : p) {
            const auto id = graph.find_by_label(label.get<std::string>());
            if (!id) {
                result.warnings.push_back("path label not in graph: " + label.get<std::string>());
                ok = false;
                break;
            }
            rp.nodes.push_back(*id);
        }
        if (ok) record.paths.push_back(std::move(rp));
    }

    for (const auto& c : j.value("causal_chains", nlohmann::json::array())) {
        std::vector<std::string> labels;
        for (const auto& label : c) labels.push_back(label.get<std::string>());
        record.chains.push_back(ground_chain(labels, graph));
    }

    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        note_unknown_keys(m, kMetricKeys, "metrics.", unmapped);
        if (m.contains("avg_sym_depth")) result.stored.avg_sym_depth = m.at("avg_sym_depth");
        if (m.contains("avg_ground_depth"))
            result.stored.avg_ground_depth = m.at("avg_ground_depth");
        if (m.contains("drop_rate")) result.stored.drop_rate = m.at("drop_rate");
        if (m.contains("failure_rate")) result.stored.failure_rate = m.at("failure_rate");
    }

    std::vector<std::set<std::string>> concept_sets;
    for (const auto& p : record.paths)
        concept_sets.emplace_back(p.nodes.begin(), p.nodes.end());
    record.report =
        build_report(record.query_id, record.paths, record.chains, concept_sets, false);

    result.unmapped_fields.assign(unmapped.begin(), unmapped.end());
    return result;
}

}  // namespace mechsynth
