#include "mechsynth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

constexpr const char* kRefineSystem =
    "You rewrite research questions as boolean search expressions for a "
    "scholarly index. Reply with the expression only.";

constexpr const char* kExtractSystem =
    "You extract concept mentions and directed relations from one document. "
    "Reply with JSON only: {\"mentions\":[{\"label\":...,\"excerpt\":...,"
    "\"stance\":\"support|contradict|neutral\"}],\"triples\":[{\"source_label\":...,"
    "\"target_label\":...,\"relation\":...,\"excerpt\":...}]}. Every excerpt must be "
    "copied verbatim from the document, and triples may only connect concepts "
    "listed under mentions.";

constexpr const char* kDensifySystem =
    "You connect existing concepts with additional directed relations that the "
    "listed documents state. Reply with JSON only: {\"edges\":[{\"source_label\":...,"
    "\"target_label\":...,\"relation\":...,\"doc_id\":...,\"excerpt\":...}]}. Use only "
    "concepts from the list, cite a listed document, and copy excerpts verbatim. "
    "Do not introduce new concepts.";

constexpr const char* kExploreSystem =
    "You explore a concept graph with tools. Reply with one JSON action per "
    "turn: {\"action\":\"get_neighbors\",\"node\":<label>,\"direction\":\"out|in|both\"}, "
    "{\"action\":\"find_paths\",\"source\":<label>,\"target\":<label>,\"max_hops\":<n>}, "
    "{\"action\":\"degree\",\"node\":<label>}, {\"action\":\"communities\"}, or "
    "{\"action\":\"stop\"}.";

constexpr const char* kSynthesizeSystem =
    "You write mechanistic hypotheses grounded in the given reasoning paths and "
    "documents. For each hypothesis emit a block:\n"
    "HYPOTHESIS <n>\n"
    "Statement: <one sentence>\n"
    "Causal Chain: <concept -> concept -> concept>\n"
    "Evidence Summary: <one sentence>\n"
    "Evidence: <comma-separated doc ids>\n"
    "Novelty: <0..1>\nFeasibility: <0..1>\nTestability: <0..1>";

void push_event(TraceRecord& trace, const std::string& kind, const std::string& detail) {
    trace.events.push_back({kind, detail});
}

std::string snippet(const std::string& s) {
    if (s.size() <= 60) return s;
    return s.substr(0, 60) + "...";
}

std::string call_client(TextClient& client, const std::string& stage,
                        const std::string& system, const std::string& user,
                        const RunConfig& config, TraceRecord& trace) {
    ChatRequest request;
    request.stage = stage;
    request.messages = {{"system", system}, {"user", user}};
    request.temperature = config.temperature;
    request.model_id = config.model_id;
    const std::string response = client.complete(request);
    trace.exchanges.push_back({request, response});
    return response;
}

bool verbatim_in(const Document& doc, const std::string& excerpt) {
    if (trim(excerpt).empty()) return false;
    const std::string text = doc.title + "\n" + doc.body;
    return text.find(excerpt) != std::string::npos;
}

std::string utc_timestamp(bool deterministic) {
    if (deterministic) return "1970-01-01T00:00:00Z";
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string stance_or_neutral(const std::string& s) {
    if (s == "support" || s == "contradict" || s == "neutral") return s;
    return "neutral";
}

void tally_stance(StanceCounts& counts, const std::string& stance) {
    if (stance == "support")
        ++counts.support;
    else if (stance == "contradict")
        ++counts.contradict;
    else
        ++counts.neutral;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j{{"query_id", query_id},
                     {"mode", mode},
                     {"strategy",
                      {{"kind", to_string(strategy.kind)},
                       {"k", strategy.k},
                       {"overlap_threshold", round6(strategy.overlap_threshold)},
                       {"walk_count", strategy.walk_count},
                       {"max_hops", strategy.max_hops},
                       {"seed", strategy.seed},
                       {"min_path_nodes", strategy.min_path_nodes}}},
                     {"max_papers", max_papers},
                     {"temperature", round6(temperature)},
                     {"model_id", model_id},
                     {"deterministic", deterministic},
                     {"label_merge_threshold", round6(label_merge_threshold)},
                     {"min_component_size", min_component_size},
                     {"grounding",
                      {{"similarity_threshold", round6(grounding.similarity_threshold)},
                       {"either_direction", grounding.either_direction}}},
                     {"max_turns", max_turns},
                     {"max_hypotheses", max_hypotheses},
                     {"controversy_augment", controversy_augment},
                     {"louvain_resolution", round6(louvain_resolution)},
                     {"max_endpoint_pairs", max_endpoint_pairs}};
    if (lens) {
        j["lens"] = {{"lens_label", lens->lens_label},
                     {"bias_weight", round6(lens->bias_weight)},
                     {"concept_filter", lens->concept_filter},
                     {"attach_top_m", lens->attach_top_m}};
    } else {
        j["lens"] = nullptr;
    }
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.query_id = j.value("query_id", c.query_id);
    c.mode = j.value("mode", c.mode);
    if (j.contains("strategy")) {
        const auto& s = j.at("strategy");
        c.strategy.kind = strategy_from_string(s.value("kind", std::string{"full_diversity"}));
        c.strategy.k = s.value("k", c.strategy.k);
        c.strategy.overlap_threshold = s.value("overlap_threshold", c.strategy.overlap_threshold);
        c.strategy.walk_count = s.value("walk_count", c.strategy.walk_count);
        c.strategy.max_hops = s.value("max_hops", c.strategy.max_hops);
        c.strategy.seed = s.value("seed", c.strategy.seed);
        c.strategy.min_path_nodes = s.value("min_path_nodes", c.strategy.min_path_nodes);
    }
    c.max_papers = j.value("max_papers", c.max_papers);
    c.temperature = j.value("temperature", c.temperature);
    c.model_id = j.value("model_id", c.model_id);
    if (j.contains("lens") && !j.at("lens").is_null()) {
        const auto& l = j.at("lens");
        LensSpec lens;
        lens.lens_label = l.value("lens_label", std::string{});
        lens.bias_weight = l.value("bias_weight", lens.bias_weight);
        lens.concept_filter = l.value("concept_filter", std::string{});
        lens.attach_top_m = l.value("attach_top_m", lens.attach_top_m);
        c.lens = lens;
    }
    c.deterministic = j.value("deterministic", c.deterministic);
    c.label_merge_threshold = j.value("label_merge_threshold", c.label_merge_threshold);
    c.min_component_size = j.value("min_component_size", c.min_component_size);
    if (j.contains("grounding")) {
        const auto& g = j.at("grounding");
        c.grounding.similarity_threshold =
            g.value("similarity_threshold", c.grounding.similarity_threshold);
        c.grounding.either_direction = g.value("either_direction", c.grounding.either_direction);
    }
    c.max_turns = j.value("max_turns", c.max_turns);
    c.max_hypotheses = j.value("max_hypotheses", c.max_hypotheses);
    c.controversy_augment = j.value("controversy_augment", c.controversy_augment);
    c.louvain_resolution = j.value("louvain_resolution", c.louvain_resolution);
    c.max_endpoint_pairs = j.value("max_endpoint_pairs", c.max_endpoint_pairs);
    return c;
}

std::string refine_query(const std::string& query_text, TextClient& client,
                         const RunConfig& config, TraceRecord& trace) {
    if (trim(query_text).empty()) throw std::invalid_argument("empty query");
    const std::string response =
        call_client(client, "refine", kRefineSystem, "QUERY: " + query_text, config, trace);
    std::string refined = trim(response);
    if (refined.empty()) {
        push_event(trace, "parse_failure", "refine: empty expression, using the query verbatim");
        refined = trim(query_text);
    }
    trace.refined_query = refined;
    return refined;
}

std::vector<Document> retrieve(const std::string& expression, SearchClient& client,
                               const RunConfig& config, TraceRecord& trace) {
    std::vector<std::string> expressions{expression};
    if (config.controversy_augment)
        expressions.push_back(expression + " AND (controversy OR debate OR conflicting)");

    std::vector<Document> merged;
    std::set<std::string> seen;
    for (const std::string& expr : expressions) {
        SearchCall call;
        call.expression = expr;
        call.max_results = config.max_papers;
        call.results = client.search(expr, config.max_papers);
        for (const Document& doc : call.results) {
            if (merged.size() < config.max_papers && seen.insert(doc.doc_id).second)
                merged.push_back(doc);
        }
        trace.search_calls.push_back(std::move(call));
    }
    return merged;
}

void extract_concepts(ConceptGraph& graph, const Document& doc, TextClient& client,
                      const RunConfig& config, TraceRecord& trace,
                      std::map<std::string, StanceCounts>* stance_by_doc) {
    const std::string user =
        "DOC_ID: " + doc.doc_id + "\nTITLE: " + doc.title + "\nBODY:\n" + doc.body;
    const std::string response =
        call_client(client, "extract", kExtractSystem, user, config, trace);

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
        push_event(trace, "parse_failure",
                   "extract " + doc.doc_id + ": response is not JSON (" + e.what() + ")");
        return;
    }
    if (!parsed.is_object()) {
        push_event(trace, "parse_failure", "extract " + doc.doc_id + ": response is not an object");
        return;
    }

    std::set<std::string> accepted;  // folded labels extracted from this document
    if (parsed.contains("mentions") && parsed.at("mentions").is_array()) {
        for (const auto& m : parsed.at("mentions")) {
            if (!m.is_object()) continue;
            const std::string label = trim(m.value("label", std::string{}));
            const std::string excerpt = m.value("excerpt", std::string{});
            if (!well_formed_label(label)) {
                push_event(trace, "extraction_rejection",
                           "doc " + doc.doc_id + ": malformed label '" + snippet(label) + "'");
                continue;
            }
            if (!verbatim_in(doc, excerpt)) {
                push_event(trace, "fabrication_rejection",
                           "doc " + doc.doc_id + ": mention excerpt not in document: '" +
                               snippet(excerpt) + "'");
                continue;
            }
            graph.add_concept(label, {}, {doc.doc_id});
            accepted.insert(fold_case(label));
            if (stance_by_doc)
                tally_stance((*stance_by_doc)[doc.doc_id],
                             stance_or_neutral(m.value("stance", std::string{"neutral"})));
        }
    }

    if (parsed.contains("triples") && parsed.at("triples").is_array()) {
        for (const auto& t : parsed.at("triples")) {
            if (!t.is_object()) continue;
            const std::string source = trim(t.value("source_label", std::string{}));
            const std::string target = trim(t.value("target_label", std::string{}));
            const std::string relation = trim(t.value("relation", std::string{}));
            const std::string excerpt = t.value("excerpt", std::string{});
            if (!accepted.count(fold_case(source)) || !accepted.count(fold_case(target))) {
                push_event(trace, "extraction_rejection",
                           "doc " + doc.doc_id + ": triple references a concept not extracted "
                           "from this document ('" + snippet(source) + "' -> '" +
                               snippet(target) + "')");
                continue;
            }
            if (!well_formed_label(relation)) {
                push_event(trace, "extraction_rejection",
                           "doc " + doc.doc_id + ": malformed relation '" + snippet(relation) + "'");
                continue;
            }
            if (fold_case(source) == fold_case(target)) {
                push_event(trace, "extraction_rejection",
                           "doc " + doc.doc_id + ": self-relation on '" + snippet(source) + "'");
                continue;
            }
            if (!verbatim_in(doc, excerpt)) {
                push_event(trace, "fabrication_rejection",
                           "doc " + doc.doc_id + ": triple excerpt not in document: '" +
                               snippet(excerpt) + "'");
                continue;
            }
            const auto sid = graph.find_by_label(source);
            const auto tid = graph.find_by_label(target);
            graph.add_relation(*sid, *tid, relation, {{doc.doc_id, excerpt}},
                               EdgeOrigin::Extraction);
        }
    }
}

void densify_graph(ConceptGraph& graph, const std::vector<Document>& corpus,
                   TextClient& client, const RunConfig& config, TraceRecord& trace) {
    std::string user = "CONCEPTS:\n";
    for (const auto& [id, node] : graph.nodes()) user += "- " + node.canonical_label + "\n";
    user += "DOCUMENTS:\n";
    for (const Document& doc : corpus) {
        user += "DOC_ID: " + doc.doc_id + "\nTITLE: " + doc.title + "\nBODY:\n" + doc.body + "\n";
    }
    const std::string response =
        call_client(client, "densify", kDensifySystem, user, config, trace);

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
        push_event(trace, "parse_failure",
                   std::string("densify: response is not JSON (") + e.what() + ")");
        return;
    }

    const std::size_t nodes_before = graph.nodes().size();
    std::map<std::string, const Document*> by_id;
    for (const Document& doc : corpus) by_id.emplace(doc.doc_id, &doc);

    if (parsed.is_object() && parsed.contains("edges") && parsed.at("edges").is_array()) {
        for (const auto& e : parsed.at("edges")) {
            if (!e.is_object()) continue;
            const std::string source = trim(e.value("source_label", std::string{}));
            const std::string target = trim(e.value("target_label", std::string{}));
            const std::string relation = trim(e.value("relation", std::string{}));
            const std::string doc_id = trim(e.value("doc_id", std::string{}));
            const std::string excerpt = e.value("excerpt", std::string{});

            const auto sid = graph.find_by_label(source);
            const auto tid = graph.find_by_label(target);
            if (!sid || !tid) {
                push_event(trace, "densification_rejection",
                           "unknown concept in proposed edge '" + snippet(source) + "' -> '" +
                               snippet(target) + "'");
                continue;
            }
            if (*sid == *tid) {
                push_event(trace, "densification_rejection",
                           "self-relation on '" + snippet(source) + "'");
                continue;
            }
            if (!well_formed_label(relation)) {
                push_event(trace, "densification_rejection",
                           "malformed relation '" + snippet(relation) + "'");
                continue;
            }
            const auto doc_it = by_id.find(doc_id);
            if (doc_it == by_id.end()) {
                push_event(trace, "densification_rejection",
                           "unknown document '" + snippet(doc_id) + "'");
                continue;
            }
            if (!verbatim_in(*doc_it->second, excerpt)) {
                push_event(trace, "fabrication_rejection",
                           "densify: excerpt not in " + doc_id + ": '" + snippet(excerpt) + "'");
                continue;
            }
            graph.add_relation(*sid, *tid, relation, {{doc_id, excerpt}},
                               EdgeOrigin::Densification);
        }
    }

    if (graph.nodes().size() != nodes_before)
        throw std::logic_error("densification changed the node set");
}

std::vector<ToolCall> explore_graph(const ConceptGraph& graph,
                                    const std::vector<StructuralHole>& holes,
                                    const Partition& partition, TextClient& client,
                                    const RunConfig& config, TraceRecord& trace) {
    if (config.max_turns == 0) throw std::invalid_argument("max_turns must be >= 1");

    const auto resolve = [&](const std::string& label) { return graph.find_by_label(trim(label)); };
    const auto label_of = [&](const NodeId& id) { return graph.node(id).canonical_label; };

    nlohmann::json summary;
    summary["node_count"] = graph.nodes().size();
    summary["edge_count"] = graph.edges().size();
    summary["community_count"] = partition.community_count;
    {
        std::vector<std::pair<std::size_t, NodeId>> ranked;
        for (const auto& [id, node] : graph.nodes()) ranked.emplace_back(graph.degree(id), id);
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        nlohmann::json top = nlohmann::json::array();
        for (std::size_t i = 0; i < ranked.size() && i < 5; ++i)
            top.push_back(label_of(ranked[i].second));
        summary["top_concepts"] = top;
    }
    {
        nlohmann::json hs = nlohmann::json::array();
        for (const auto& h : holes)
            hs.push_back({h.community_a, h.community_b});
        summary["structural_holes"] = hs;
    }

    std::vector<ToolCall> calls;
    std::string user = summary.dump();
    for (std::size_t turn = 0; turn < config.max_turns; ++turn) {
        const std::string response =
            call_client(client, "explore", kExploreSystem, user, config, trace);
        ToolCall call;
        call.request = response;

        nlohmann::json action;
        bool stop = false;
        try {
            action = nlohmann::json::parse(response);
            if (!action.is_object()) throw std::invalid_argument("action is not an object");
            const std::string kind = action.value("action", std::string{});
            if (kind == "stop") {
                call.result = {{"stopped", true}};
                stop = true;
            } else if (kind == "get_neighbors") {
                const auto id = resolve(action.value("node", std::string{}));
                if (!id)
                    throw std::invalid_argument("unknown node '" +
                                                action.value("node", std::string{}) + "'");
                const std::string dir = action.value("direction", std::string{"out"});
                Direction direction = Direction::Out;
                if (dir == "in")
                    direction = Direction::In;
                else if (dir == "both")
                    direction = Direction::Both;
                else if (dir != "out")
                    throw std::invalid_argument("unknown direction '" + dir + "'");
                nlohmann::json neighbors = nlohmann::json::array();
                for (const NodeId& n : get_neighbors(graph, *id, direction))
                    neighbors.push_back(label_of(n));
                call.result = {{"node", label_of(*id)}, {"neighbors", neighbors}};
            } else if (kind == "find_paths") {
                const auto s = resolve(action.value("source", std::string{}));
                const auto t = resolve(action.value("target", std::string{}));
                if (!s || !t) throw std::invalid_argument("unknown path endpoint");
                std::size_t hops = action.value("max_hops", config.strategy.max_hops);
                hops = std::min(hops, config.strategy.max_hops);
                nlohmann::json paths = nlohmann::json::array();
                for (const auto& p : find_paths(graph, *s, *t, hops, 5)) {
                    nlohmann::json labels = nlohmann::json::array();
                    for (const NodeId& n : p.nodes) labels.push_back(label_of(n));
                    paths.push_back(labels);
                }
                call.result = {{"paths", paths}};
            } else if (kind == "degree") {
                const auto id = resolve(action.value("node", std::string{}));
                if (!id)
                    throw std::invalid_argument("unknown node '" +
                                                action.value("node", std::string{}) + "'");
                call.result = {{"node", label_of(*id)}, {"degree", graph.degree(*id)}};
            } else if (kind == "communities") {
                nlohmann::json hs = nlohmann::json::array();
                for (const auto& h : holes)
                    hs.push_back({{"community_a", h.community_a},
                                  {"community_b", h.community_b},
                                  {"inter_edge_count", h.inter_edge_count}});
                call.result = {{"community_count", partition.community_count}, {"holes", hs}};
            } else {
                throw std::invalid_argument("unknown action '" + kind + "'");
            }
        } catch (const std::exception& e) {
            call.result = {{"error", e.what()}};
            push_event(trace, "tool_error", std::string("explore turn ") +
                                                std::to_string(turn + 1) + ": " + e.what());
        }

        user = call.result.dump();
        calls.push_back(std::move(call));
        trace.exploration.push_back(calls.back());
        if (stop) break;
    }
    return calls;
}

std::vector<std::pair<NodeId, NodeId>> select_endpoints(
    const ConceptGraph& graph, const std::string& query_text,
    const std::vector<StructuralHole>& holes, std::size_t max_pairs) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (max_pairs == 0) return pairs;

    const std::set<std::string> query_terms = token_set(query_text);
    std::vector<std::pair<std::size_t, NodeId>> matched;
    for (const auto& [id, node] : graph.nodes()) {
        std::set<std::string> node_terms = token_set(node.canonical_label);
        for (const std::string& alias : node.aliases)
            for (const std::string& t : token_set(alias)) node_terms.insert(t);
        bool hit = false;
        for (const std::string& t : node_terms)
            if (query_terms.count(t)) {
                hit = true;
                break;
            }
        if (hit) matched.emplace_back(graph.degree(id), id);
    }
    std::stable_sort(matched.begin(), matched.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::set<std::pair<NodeId, NodeId>> used;  // unordered form, smaller id first
    const auto add_pair = [&](const NodeId& a, const NodeId& b) {
        if (a == b || pairs.size() >= max_pairs) return;
        const auto key = std::minmax(a, b);
        if (!used.insert({key.first, key.second}).second) return;
        pairs.emplace_back(a, b);
    };

    for (std::size_t i = 0; i < matched.size() && pairs.size() < max_pairs; ++i)
        for (std::size_t j = i + 1; j < matched.size() && pairs.size() < max_pairs; ++j)
            add_pair(matched[i].second, matched[j].second);

    for (const auto& hole : holes)
        for (const auto& [a, b] : hole.candidate_pairs) add_pair(a, b);

    if (pairs.empty() && graph.nodes().size() >= 2) {
        // No query-anchored endpoints; fall back to the two highest-degree nodes.
        std::vector<std::pair<std::size_t, NodeId>> ranked;
        for (const auto& [id, node] : graph.nodes()) ranked.emplace_back(graph.degree(id), id);
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        add_pair(ranked[0].second, ranked[1].second);
    }
    return pairs;
}

std::vector<Hypothesis> synthesize_hypotheses(
    const std::vector<ReasoningPath>& paths, const ConceptGraph& graph,
    const std::vector<Document>& corpus,
    const std::map<std::string, StanceCounts>& stance_by_doc, TextClient& client,
    const RunConfig& config, TraceRecord& trace) {
    std::string user = "PATHS:\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        user += std::to_string(i + 1) + ". ";
        for (std::size_t n = 0; n < paths[i].nodes.size(); ++n) {
            if (n) user += " -> ";
            user += graph.node(paths[i].nodes[n]).canonical_label;
        }
        user += "\n";
    }
    user += "DOCUMENTS:\n";
    for (const Document& doc : corpus) user += doc.doc_id + ": " + doc.title + "\n";
    user += "Write up to " + std::to_string(config.max_hypotheses) + " hypotheses.";

    const std::string response =
        call_client(client, "synthesize", kSynthesizeSystem, user, config, trace);

    auto hypotheses = parse_hypotheses(
        response, config.max_hypotheses,
        [&](const std::string& kind, const std::string& detail) {
            push_event(trace, kind, "synthesize: " + detail);
        });

    std::set<std::string> corpus_ids;
    for (const Document& doc : corpus) corpus_ids.insert(doc.doc_id);

    for (Hypothesis& h : hypotheses) {
        std::vector<std::string> kept;
        for (const std::string& ref : h.evidence_refs) {
            if (corpus_ids.count(ref)) {
                kept.push_back(ref);
            } else {
                push_event(trace, "evidence_unresolvable",
                           "synthesize: dropped evidence ref '" + snippet(ref) + "'");
            }
        }
        h.evidence_refs = std::move(kept);
        h.stance_counts = {};
        for (const std::string& ref : h.evidence_refs) {
            const auto it = stance_by_doc.find(ref);
            if (it != stance_by_doc.end()) {
                h.stance_counts.support += it->second.support;
                h.stance_counts.contradict += it->second.contradict;
                h.stance_counts.neutral += it->second.neutral;
            }
        }
    }
    return hypotheses;
}

TraceRecord run_query(const std::string& query_text, const RunConfig& config,
                      const ClientSuite& suite) {
    if (trim(query_text).empty()) throw std::invalid_argument("empty query");
    if (!suite.refinement || !suite.extraction || !suite.densification || !suite.exploration ||
        !suite.synthesis || !suite.retrieval)
        throw std::invalid_argument("client suite is incomplete");
    if (config.max_turns == 0) throw std::invalid_argument("max_turns must be >= 1");

    TraceRecord trace;
    trace.query_id = config.query_id;
    trace.query_text = query_text;
    trace.config = config.to_json();
    trace.strategy_tag = to_string(config.strategy.kind);
    trace.report.query_id = config.query_id;
    trace.started_at = utc_timestamp(config.deterministic);
    trace.finished_at = trace.started_at;

    const auto stage = [&](const char* name, const std::function<void()>& body) {
        if (!trace.completed()) return;
        try {
            body();
        } catch (const std::exception& e) {
            trace.failure_stage = name;
            push_event(trace, "stage_failure", std::string(name) + ": " + e.what());
        }
    };

    std::string refined;
    std::vector<Document> corpus;
    ConceptGraph graph(config.query_id);
    std::map<std::string, StanceCounts> stance_by_doc;
    Partition partition;
    std::vector<StructuralHole> holes;
    ConceptGraph reasoning_graph;
    EdgeWeights weights;
    SymbolicResult symbolic;

    const auto snapshot = [&](const char* name, const ConceptGraph& g) {
        trace.graph_passes.emplace_back(name, g.to_json());
    };

    stage("refine", [&] { refined = refine_query(query_text, *suite.refinement, config, trace); });
    stage("retrieve", [&] {
        corpus = retrieve(refined, *suite.retrieval, config, trace);
        trace.corpus = corpus;
    });
    stage("extract", [&] {
        for (const Document& doc : corpus)
            extract_concepts(graph, doc, *suite.extraction, config, trace, &stance_by_doc);
        snapshot("extracted", graph);
    });
    stage("normalize", [&] {
        graph = normalize(graph, config.label_merge_threshold);
        snapshot("normalized", graph);
    });
    stage("densify", [&] {
        densify_graph(graph, corpus, *suite.densification, config, trace);
        snapshot("densified", graph);
    });
    stage("cleanup", [&] {
        graph = cleanup(graph, config.min_component_size);
        snapshot("final", graph);
    });
    stage("communities", [&] {
        if (!graph.nodes().empty()) {
            partition = louvain(graph, config.louvain_resolution, config.strategy.seed);
            holes = structural_holes(graph, partition);
            trace.partition = {
                {"assignment", partition.assignment},
                {"community_count", partition.community_count},
                {"modularity", round6(modularity(graph, partition, config.louvain_resolution))}};
        } else {
            trace.partition = {{"assignment", nlohmann::json::object()},
                               {"community_count", 0},
                               {"modularity", 0.0}};
        }
        trace.holes = nlohmann::json::array();
        for (const auto& h : holes) {
            nlohmann::json pairs = nlohmann::json::array();
            for (const auto& [a, b] : h.candidate_pairs) pairs.push_back({a, b});
            trace.holes.push_back({{"community_a", h.community_a},
                                   {"community_b", h.community_b},
                                   {"inter_edge_count", h.inter_edge_count},
                                   {"candidate_pairs", pairs}});
        }
    });
    stage("lens", [&] {
        if (config.lens) {
            LensedGraph lensed = inject_lens(graph, *config.lens);
            reasoning_graph = std::move(lensed.graph);
            weights = std::move(lensed.weights);
            snapshot("lensed", reasoning_graph);
        } else {
            reasoning_graph = graph;
        }
    });
    stage("explore", [&] {
        explore_graph(reasoning_graph, holes, partition, *suite.exploration, config, trace);
    });
    stage("paths", [&] {
        trace.endpoints = select_endpoints(graph, query_text, holes, config.max_endpoint_pairs);
        if (trace.endpoints.empty() && config.strategy.kind != StrategyKind::RagBaseline) {
            push_event(trace, "no_endpoints", "no endpoint pairs; skipping path reasoning");
        } else {
            symbolic = run_strategy(reasoning_graph, trace.endpoints, config.strategy, partition,
                                    weights);
        }
        trace.paths = symbolic.paths;
    });
    stage("synthesize", [&] {
        trace.hypotheses = synthesize_hypotheses(trace.paths, reasoning_graph, corpus,
                                                 stance_by_doc, *suite.synthesis, config, trace);
    });
    stage("ground", [&] {
        for (const Hypothesis& h : trace.hypotheses)
            trace.chains.push_back(ground_chain(h.causal_chain, graph, config.grounding));
    });
    stage("report", [&] {
        std::vector<std::set<std::string>> concept_sets;
        for (const auto& p : trace.paths)
            concept_sets.emplace_back(p.nodes.begin(), p.nodes.end());
        trace.report = build_report(config.query_id, trace.paths, trace.chains, concept_sets,
                                    symbolic.bridge_attempted);
        if (trace.chains.empty()) {
            push_event(trace, "abstention", "no hypotheses produced");
        } else if (!trace.paths.empty() &&
                   std::all_of(trace.chains.begin(), trace.chains.end(),
                               [](const GroundedChain& c) { return is_collapsed(c); })) {
            trace.report.abstention = true;
            push_event(trace, "abstention", "all causal chains collapsed");
        }
    });

    trace.finished_at = utc_timestamp(config.deterministic);
    return trace;
}

}  // namespace mechsynth
