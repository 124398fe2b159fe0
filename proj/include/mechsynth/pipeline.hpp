#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mechsynth/clients.hpp"
#include "mechsynth/community.hpp"
#include "mechsynth/concept_graph.hpp"
#include "mechsynth/hypothesis.hpp"
#include "mechsynth/metrics.hpp"
#include "mechsynth/strategies.hpp"
#include "mechsynth/trace.hpp"
#include "mechsynth/traversal.hpp"

namespace mechsynth {

struct RunConfig {
    std::string query_id = "q";
    std::string mode = "mock";  // mock | live | recorded
    StrategyConfig strategy;
    std::size_t max_papers = 10;
    double temperature = 0.0;
    std::string model_id = "mock-model";
    std::optional<LensSpec> lens;
    bool deterministic = true;  // zero timestamps in the trace
    double label_merge_threshold = 0.85;
    std::size_t min_component_size = 2;
    GroundingConfig grounding;
    std::size_t max_turns = 4;
    std::size_t max_hypotheses = 3;
    bool controversy_augment = false;
    double louvain_resolution = 1.0;
    std::size_t max_endpoint_pairs = 4;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

struct ExtractedMention {
    std::string label;
    std::string excerpt;
    std::string stance = "neutral";
};

struct ExtractedTriple {
    std::string source_label;
    std::string target_label;
    std::string relation;
    std::string excerpt;
};

struct DocExtraction {
    std::vector<ExtractedMention> mentions;
    std::vector<ExtractedTriple> triples;
};

// Asks the refinement client for a boolean search expression. Rejects an
// empty query. Logs the exchange and the refined expression into the trace.
std::string refine_query(const std::string& query_text, TextClient& client,
                         const RunConfig& config, TraceRecord& trace);

// Runs the primary search, plus a controversy-augmented one when configured.
// Results are deduplicated by doc id, capped at max_papers, and every call
// is logged for replay.
std::vector<Document> retrieve(const std::string& expression, SearchClient& client,
                               const RunConfig& config, TraceRecord& trace);

// Asks the extraction client about one document and inserts the surviving
// mentions and triples into the graph. Guards applied here: excerpts must
// occur verbatim in the document, triples may only reference this document's
// accepted mentions, labels must be well formed, and self-relations are
// dropped. Every rejection is logged as a trace event. When stance_by_doc is
// given, accepted mention stances are tallied per document.
void extract_concepts(ConceptGraph& graph, const Document& doc, TextClient& client,
                      const RunConfig& config, TraceRecord& trace,
                      std::map<std::string, StanceCounts>* stance_by_doc = nullptr);

// Asks the densification client for extra relations between existing
// concepts. Edges naming unknown concepts, unknown documents, or
// non-verbatim excerpts are rejected; the node set never changes.
void densify_graph(ConceptGraph& graph, const std::vector<Document>& corpus,
                   TextClient& client, const RunConfig& config, TraceRecord& trace);

// Runs the exploration agent for up to max_turns tool calls against the
// graph. Malformed actions produce an error result and the loop continues.
// Rejects max_turns == 0.
std::vector<ToolCall> explore_graph(const ConceptGraph& graph,
                                    const std::vector<StructuralHole>& holes,
                                    const Partition& partition, TextClient& client,
                                    const RunConfig& config, TraceRecord& trace);

// Picks endpoint pairs for path reasoning: nodes whose labels share a token
// with the query, ranked by degree, paired in rank order, then structural-hole
// candidate pairs. Returns at most max_pairs pairs.
std::vector<std::pair<NodeId, NodeId>> select_endpoints(
    const ConceptGraph& graph, const std::string& query_text,
    const std::vector<StructuralHole>& holes, std::size_t max_pairs);

// Asks the synthesis client for hypothesis blocks and parses them. Scores are
// clamped to [0, 1], unparseable blocks dropped, evidence references outside
// the corpus removed; all of it logged. Stance counts are tallied from the
// extraction stances of the cited documents.
std::vector<Hypothesis> synthesize_hypotheses(
    const std::vector<ReasoningPath>& paths, const ConceptGraph& graph,
    const std::vector<Document>& corpus,
    const std::map<std::string, StanceCounts>& stance_by_doc, TextClient& client,
    const RunConfig& config, TraceRecord& trace);

// Runs the full pipeline: refine, retrieve, extract, normalize, densify,
// cleanup, communities, optional lens injection, exploration, path strategy,
// synthesis, grounding, report. A stage failure marks failure_stage and
// returns the partial trace. Rejects an empty query or a missing client.
TraceRecord run_query(const std::string& query_text, const RunConfig& config,
                      const ClientSuite& suite);

}  // namespace mechsynth
