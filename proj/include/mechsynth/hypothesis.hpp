#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mechsynth {

struct StanceCounts {
    std::size_t support = 0;
    std::size_t contradict = 0;
    std::size_t neutral = 0;

    bool operator==(const StanceCounts&) const = default;
};

struct Hypothesis {
    std::string statement;
    std::vector<std::string> causal_chain;
    std::string evidence_summary;
    std::vector<std::string> evidence_refs;
    double novelty = 0.0;
    double feasibility = 0.0;
    double testability = 0.0;
    StanceCounts stance_counts;

    nlohmann::json to_json() const;
    static Hypothesis from_json(const nlohmann::json& j);

    bool operator==(const Hypothesis&) const = default;
};

// Events raised while parsing: kind is "score_clamp" or "parse_failure",
// detail says which block and field.
using ParseEventSink = std::function<void(const std::string& kind, const std::string& detail)>;

// Parses synthesis-client text into hypotheses. Blocks start with a line
// "HYPOTHESIS <n>"; fields are "Statement:", "Causal Chain:" (steps joined by
// "->"), "Evidence Summary:", "Evidence:" (comma-separated doc ids),
// "Novelty:", "Feasibility:", "Testability:". Scores outside [0, 1] are
// clamped; blocks without a statement or with unparseable scores are dropped.
// At most max_hypotheses blocks are kept.
std::vector<Hypothesis> parse_hypotheses(const std::string& text,
                                         std::size_t max_hypotheses,
                                         const ParseEventSink& events = {});

}  // namespace mechsynth
