#include "mechsynth/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "mechsynth/mock_clients.hpp"
#include "mechsynth/pipeline.hpp"

namespace mechsynth {

namespace {

nlohmann::json path_to_json(const ReasoningPath& p) {
    return nlohmann::json{{"nodes", p.nodes}, {"strategy", p.strategy_tag}};
}

ReasoningPath path_from_json(const nlohmann::json& j) {
    ReasoningPath p;
    p.nodes = j.at("nodes").get<std::vector<NodeId>>();
    p.strategy_tag = j.value("strategy", std::string{});
    return p;
}

nlohmann::json chain_to_json(const GroundedChain& c) {
    return nlohmann::json{{"nodes", c.nodes},
                          {"mapped_node_ids", c.mapped_node_ids},
                          {"grounded_length", c.grounded_length}};
}

GroundedChain chain_from_json(const nlohmann::json& j) {
    GroundedChain c;
    c.nodes = j.at("nodes").get<std::vector<std::string>>();
    c.mapped_node_ids = j.at("mapped_node_ids").get<std::vector<NodeId>>();
    c.grounded_length = j.at("grounded_length").get<std::size_t>();
    return c;
}

std::string shown(const nlohmann::json& v) {
    const std::string s = v.dump();
    if (s.size() <= 48) return s;
    return s.substr(0, 48) + "...";
}

}  // namespace

nlohmann::json trace_to_json(const TraceRecord& record) {
    nlohmann::json j;
    j["schema_version"] = record.schema_version;
    j["query_id"] = record.query_id;
    j["query_text"] = record.query_text;
    j["refined_query"] = record.refined_query;
    j["config"] = record.config;

    j["search_calls"] = nlohmann::json::array();
    for (const auto& c : record.search_calls) j["search_calls"].push_back(c.to_json());
    j["corpus"] = nlohmann::json::array();
    for (const auto& d : record.corpus) j["corpus"].push_back(d.to_json());
    j["exchanges"] = nlohmann::json::array();
    for (const auto& e : record.exchanges) j["exchanges"].push_back(e.to_json());

    j["graph_passes"] = nlohmann::json::array();
    for (const auto& [name, graph] : record.graph_passes)
        j["graph_passes"].push_back({{"stage", name}, {"graph", graph}});
    j["partition"] = record.partition;
    j["holes"] = record.holes;

    j["exploration"] = nlohmann::json::array();
    for (const auto& t : record.exploration)
        j["exploration"].push_back({{"request", t.request}, {"result", t.result}});

    j["endpoints"] = nlohmann::json::array();
    for (const auto& [s, t] : record.endpoints) j["endpoints"].push_back({s, t});
    j["strategy"] = record.strategy_tag;
    j["paths"] = nlohmann::json::array();
    for (const auto& p : record.paths) j["paths"].push_back(path_to_json(p));

    j["hypotheses"] = nlohmann::json::array();
    for (const auto& h : record.hypotheses) j["hypotheses"].push_back(h.to_json());
    j["chains"] = nlohmann::json::array();
    for (const auto& c : record.chains) j["chains"].push_back(chain_to_json(c));

    j["report"] = record.report.to_json();
    j["events"] = nlohmann::json::array();
    for (const auto& e : record.events)
        j["events"].push_back({{"kind", e.kind}, {"detail", e.detail}});
    j["failure_stage"] = record.failure_stage;
    j["started_at"] = record.started_at;
    j["finished_at"] = record.finished_at;
    return j;
}

TraceRecord trace_from_json(const nlohmann::json& j) {
    TraceRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    r.query_id = j.at("query_id").get<std::string>();
    r.query_text = j.value("query_text", std::string{});
    r.refined_query = j.value("refined_query", std::string{});
    r.config = j.value("config", nlohmann::json::object());
    for (const auto& c : j.value("search_calls", nlohmann::json::array()))
        r.search_calls.push_back(SearchCall::from_json(c));
    for (const auto& d : j.value("corpus", nlohmann::json::array()))
        r.corpus.push_back(Document::from_json(d));
    for (const auto& e : j.value("exchanges", nlohmann::json::array()))
        r.exchanges.push_back(ChatExchange::from_json(e));
    for (const auto& g : j.value("graph_passes", nlohmann::json::array()))
        r.graph_passes.emplace_back(g.at("stage").get<std::string>(), g.at("graph"));
    r.partition = j.value("partition", nlohmann::json::object());
    r.holes = j.value("holes", nlohmann::json::array());
    for (const auto& t : j.value("exploration", nlohmann::json::array()))
        r.exploration.push_back({t.at("request").get<std::string>(), t.at("result")});
    for (const auto& e : j.value("endpoints", nlohmann::json::array()))
        r.endpoints.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    r.strategy_tag = j.value("strategy", std::string{});
    for (const auto& p : j.value("paths", nlohmann::json::array()))
        r.paths.push_back(path_from_json(p));
    for (const auto& h : j.value("hypotheses", nlohmann::json::array()))
        r.hypotheses.push_back(Hypothesis::from_json(h));
    for (const auto& c : j.value("chains", nlohmann::json::array()))
        r.chains.push_back(chain_from_json(c));
    if (j.contains("report")) r.report = BehavioralReport::from_json(j.at("report"));
    for (const auto& e : j.value("events", nlohmann::json::array()))
        r.events.push_back({e.at("kind").get<std::string>(), e.at("detail").get<std::string>()});
    r.failure_stage = j.value("failure_stage", std::string{});
    r.started_at = j.value("started_at", std::string{});
    r.finished_at = j.value("finished_at", std::string{});
    return r;
}

void write_trace(const TraceRecord& record, const std::string& path) {
    std::set<std::string> corpus_ids;
    for (const auto& d : record.corpus) corpus_ids.insert(d.doc_id);
    for (std::size_t i = 0; i < record.hypotheses.size(); ++i) {
        for (const auto& ref : record.hypotheses[i].evidence_refs) {
            if (!corpus_ids.count(ref))
                throw TraceError("hypothesis " + std::to_string(i + 1) +
                                 " cites doc '" + ref + "' absent from the trace corpus");
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TraceError("cannot write trace file: " + path);
    out << trace_to_json(record).dump(2) << "\n";
    if (!out) throw TraceError("short write to trace file: " + path);
}

TraceRecord read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open trace file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw TraceError(path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version") ||
        !j.at("schema_version").is_number_integer())
        throw TraceError(path + ": missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kTraceSchemaVersion)
        throw TraceError(path + ": unsupported schema_version " + std::to_string(version) +
                         " (expected " + std::to_string(kTraceSchemaVersion) + ")");
    try {
        return trace_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(path + ": malformed trace: " + e.what());
    }
}

std::vector<std::string> diff_json(const nlohmann::json& a,
                                   const nlohmann::json& b,
                                   double tolerance,
                                   const std::string& prefix) {
    std::vector<std::string> out;
    const std::string where = prefix.empty() ? "$" : prefix;

    if (a.is_number() && b.is_number()) {
        if (a.is_number_float() || b.is_number_float()) {
            if (std::abs(a.get<double>() - b.get<double>()) > tolerance)
                out.push_back(where + ": " + shown(a) + " vs " + shown(b));
        } else if (a != b) {
            out.push_back(where + ": " + shown(a) + " vs " + shown(b));
        }
        return out;
    }
    if (a.type() != b.type()) {
        out.push_back(where + ": type " + std::string(a.type_name()) + " vs " +
                      std::string(b.type_name()));
        return out;
    }
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) {
                out.push_back(where + "." + it.key() + ": only in first");
                continue;
            }
            auto sub = diff_json(it.value(), b.at(it.key()), tolerance, where + "." + it.key());
            out.insert(out.end(), sub.begin(), sub.end());
        }
        for (auto it = b.begin(); it != b.end(); ++it)
            if (!a.contains(it.key())) out.push_back(where + "." + it.key() + ": only in second");
        return out;
    }
    if (a.is_array()) {
        if (a.size() != b.size())
            out.push_back(where + ": array size " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto sub = diff_json(a[i], b[i], tolerance, where + "[" + std::to_string(i) + "]");
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    if (a != b) out.push_back(where + ": " + shown(a) + " vs " + shown(b));
    return out;
}

ReplayResult replay_trace(const TraceRecord& record) {
    const RunConfig config = RunConfig::from_json(record.config);
    RecordedTextClient text(record.exchanges);
    RecordedSearchClient search(record.search_calls);
    ClientSuite suite;
    suite.refinement = &text;
    suite.extraction = &text;
    suite.densification = &text;
    suite.exploration = &text;
    suite.synthesis = &text;
    suite.retrieval = &search;

    ReplayResult result;
    result.recomputed = run_query(record.query_text, config, suite);

    nlohmann::json stored = trace_to_json(record);
    nlohmann::json recomputed = trace_to_json(result.recomputed);
    for (auto* j : {&stored, &recomputed}) {
        j->erase("started_at");
        j->erase("finished_at");
    }
    result.divergences = diff_json(stored, recomputed, 5e-3);
    return result;
}

Comparison compare_runs(const std::vector<TraceRecord>& traces) {
    std::map<std::string, std::vector<const TraceRecord*>> groups;
    for (const auto& t : traces) {
        const std::string tag = t.strategy_tag.empty() ? "unknown" : t.strategy_tag;
        groups[tag].push_back(&t);
    }

    Comparison cmp;
    for (const auto& [tag, members] : groups) {
        std::vector<const TraceRecord*> completed;
        for (const auto* t : members)
            if (t->completed()) completed.push_back(t);
        if (completed.empty()) {
            cmp.warnings.push_back("strategy " + tag + ": no completed runs; row omitted");
            continue;
        }

        StrategySummary row;
        row.strategy = tag;
        row.runs = completed.size();
        double drop_sum = 0.0, diversity_sum = 0.0;
        std::size_t collapsed = 0;
        for (const auto* t : completed) {
            row.mean_sym_depth += t->report.d_sym;
            row.mean_ground_depth += t->report.d_ground;
            if (t->report.drop_rate) {
                drop_sum += *t->report.drop_rate;
                ++row.drop_defined_runs;
            }
            if (t->report.diversity_jaccard) {
                diversity_sum += *t->report.diversity_jaccard;
                ++row.diversity_defined_runs;
            }
            for (const auto& c : t->chains) {
                ++row.chains_total;
                if (is_collapsed(c)) ++collapsed;
            }
        }
        row.mean_sym_depth /= static_cast<double>(row.runs);
        row.mean_ground_depth /= static_cast<double>(row.runs);
        if (row.drop_defined_runs > 0)
            row.drop_mean_of_ratios = drop_sum / static_cast<double>(row.drop_defined_runs);
        if (row.mean_sym_depth > 0.0)
            row.drop_ratio_of_means =
                std::max(0.0, 1.0 - row.mean_ground_depth / row.mean_sym_depth);
        if (row.chains_total > 0)
            row.failure_rate = static_cast<double>(collapsed) / static_cast<double>(row.chains_total);
        if (row.diversity_defined_runs > 0)
            row.mean_diversity = diversity_sum / static_cast<double>(row.diversity_defined_runs);
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

std::string comparison_to_csv(const Comparison& comparison) {
    const auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    std::string csv =
        "strategy,runs,mean_sym_depth,mean_ground_depth,drop_mean_of_ratios,"
        "drop_ratio_of_means,failure_rate,mean_diversity\n";
    for (const auto& row : comparison.rows) {
        csv += row.strategy + "," + std::to_string(row.runs) + "," + num(row.mean_sym_depth) +
               "," + num(row.mean_ground_depth) + ",";
        csv += row.drop_defined_runs > 0 ? num(row.drop_mean_of_ratios) : std::string{};
        csv += "," + num(row.drop_ratio_of_means) + ",";
        csv += row.chains_total > 0 ? num(row.failure_rate) : std::string{};
        csv += ",";
        csv += row.diversity_defined_runs > 0 ? num(row.mean_diversity) : std::string{};
        csv += "\n";
    }
    return csv;
}

}  // namespace mechsynth
