#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mechsynth/trace.hpp"

namespace mechsynth {

// Metric values as stored in an externally formatted trace file.
struct ExternalMetrics {
    std::optional<double> avg_sym_depth;
    std::optional<double> avg_ground_depth;
    std::optional<double> drop_rate;
    std::optional<double> failure_rate;
};

struct CompatResult {
    // Adapted record: graph, paths, chains, and a report recomputed with the
    // engine's own metrics.
    TraceRecord record;
    ExternalMetrics stored;
    // Dotted paths of input fields the adapter has no mapping for.
    std::vector<std::string> unmapped_fields;
    std::vector<std::string> warnings;
};

// Reads a trace in the external layout: top-level query/query_id/strategy,
// "graph" with {nodes: [{id, label}], edges: [{source, target, relation}]},
// "paths" and "causal_chains" as label sequences, and "metrics" with
// avg_sym_depth / avg_ground_depth / drop_rate / failure_rate. Everything
// else is reported in unmapped_fields rather than silently dropped.
CompatResult read_external_trace(const std::string& path);

}  // namespace mechsynth
