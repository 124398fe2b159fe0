#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mechsynth/clients.hpp"
#include "mechsynth/hypothesis.hpp"
#include "mechsynth/metrics.hpp"
#include "mechsynth/traversal.hpp"

namespace mechsynth {

inline constexpr int kTraceSchemaVersion = 1;

struct TraceEvent {
    std::string kind;
    std::string detail;

    bool operator==(const TraceEvent&) const = default;
};

// One exploration-agent turn: the raw action text and the tool's result.
struct ToolCall {
    std::string request;
    nlohmann::json result;

    bool operator==(const ToolCall&) const = default;
};

// Complete record of one pipeline run. Serializes to canonical JSON (sorted
// keys, floats rounded to six decimals) so equal runs produce equal bytes.
struct TraceRecord {
    int schema_version = kTraceSchemaVersion;
    std::string query_id;
    std::string query_text;
    std::string refined_query;
    nlohmann::json config;
    std::vector<SearchCall> search_calls;
    std::vector<Document> corpus;
    std::vector<ChatExchange> exchanges;
    std::vector<std::pair<std::string, nlohmann::json>> graph_passes;
    nlohmann::json partition = nlohmann::json::object();
    nlohmann::json holes = nlohmann::json::array();
    std::vector<ToolCall> exploration;
    std::vector<std::pair<NodeId, NodeId>> endpoints;
    std::string strategy_tag;
    std::vector<ReasoningPath> paths;
    std::vector<Hypothesis> hypotheses;
    std::vector<GroundedChain> chains;
    BehavioralReport report;
    std::vector<TraceEvent> events;
    std::string failure_stage;
    std::string started_at = "1970-01-01T00:00:00Z";
    std::string finished_at = "1970-01-01T00:00:00Z";

    bool completed() const { return failure_stage.empty(); }
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::json trace_to_json(const TraceRecord& record);
TraceRecord trace_from_json(const nlohmann::json& j);

// Writes the canonical form. Throws TraceError if a hypothesis cites a doc id
// absent from the trace corpus.
void write_trace(const TraceRecord& record, const std::string& path);

// Throws TraceError with the file path and byte position on malformed input,
// and on unsupported schema versions.
TraceRecord read_trace(const std::string& path);

// Recursively compares two JSON values. Numbers differing by more than
// `tolerance` (exact for two integers), type mismatches, and missing or extra
// keys are reported as one entry per JSON pointer path.
std::vector<std::string> diff_json(const nlohmann::json& a,
                                   const nlohmann::json& b,
                                   double tolerance,
                                   const std::string& prefix = "");

struct ReplayResult {
    TraceRecord recomputed;
    std::vector<std::string> divergences;
};

// Re-runs the recorded pipeline with clients that answer from the stored
// exchanges and search calls, then diffs the recomputed trace against the
// stored one (timestamps excluded).
ReplayResult replay_trace(const TraceRecord& record);

struct StrategySummary {
    std::string strategy;
    std::size_t runs = 0;
    double mean_sym_depth = 0.0;
    double mean_ground_depth = 0.0;
    // Mean of per-run drop rates, over runs where the drop is defined.
    double drop_mean_of_ratios = 0.0;
    std::size_t drop_defined_runs = 0;
    // 1 - mean_ground_depth / mean_sym_depth, clamped at zero.
    double drop_ratio_of_means = 0.0;
    // Collapsed chains over all chains, pooled across runs.
    double failure_rate = 0.0;
    std::size_t chains_total = 0;
    double mean_diversity = 0.0;
    std::size_t diversity_defined_runs = 0;
};

struct Comparison {
    std::vector<StrategySummary> rows;
    std::vector<std::string> warnings;
};

// Groups completed traces by strategy tag and summarizes each group. Groups
// with no completed runs are omitted with a warning.
Comparison compare_runs(const std::vector<TraceRecord>& traces);

std::string comparison_to_csv(const Comparison& comparison);

}  // namespace mechsynth
