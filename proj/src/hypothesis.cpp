#include "mechsynth/hypothesis.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mechsynth/text.hpp"

namespace mechsynth {

nlohmann::json Hypothesis::to_json() const {
    return nlohmann::json{{"statement", statement},
                          {"causal_chain", causal_chain},
                          {"evidence_summary", evidence_summary},
                          {"evidence_refs", evidence_refs},
                          {"novelty", round6(novelty)},
                          {"feasibility", round6(feasibility)},
                          {"testability", round6(testability)},
                          {"stance_counts",
                           {{"support", stance_counts.support},
                            {"contradict", stance_counts.contradict},
                            {"neutral", stance_counts.neutral}}}};
}

Hypothesis Hypothesis::from_json(const nlohmann::json& j) {
    Hypothesis h;
    h.statement = j.at("statement").get<std::string>();
    h.causal_chain = j.at("causal_chain").get<std::vector<std::string>>();
    h.evidence_summary = j.value("evidence_summary", std::string{});
    if (j.contains("evidence_refs"))
        h.evidence_refs = j.at("evidence_refs").get<std::vector<std::string>>();
    h.novelty = j.value("novelty", 0.0);
    h.feasibility = j.value("feasibility", 0.0);
    h.testability = j.value("testability", 0.0);
    if (j.contains("stance_counts")) {
        const auto& s = j.at("stance_counts");
        h.stance_counts.support = s.value("support", std::size_t{0});
        h.stance_counts.contradict = s.value("contradict", std::size_t{0});
        h.stance_counts.neutral = s.value("neutral", std::size_t{0});
    }
    return h;
}

namespace {

bool is_block_header(const std::string& line) {
    const std::string t = trim(line);
    if (t.rfind("HYPOTHESIS", 0) != 0) return false;
    const std::string rest = trim(t.substr(10));
    if (rest.empty()) return false;
    for (char c : rest)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// Returns the value if the line reads "<key>: <value>" (key match is exact).
bool field_value(const std::string& line, const std::string& key, std::string& out) {
    const std::string t = trim(line);
    if (t.size() <= key.size() + 1) return false;
    if (t.compare(0, key.size(), key) != 0 || t[key.size()] != ':') return false;
    out = trim(t.substr(key.size() + 1));
    return true;
}

std::vector<std::string> split_list(const std::string& text, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(sep, pos);
        const std::string piece =
            trim(next == std::string::npos ? text.substr(pos) : text.substr(pos, next - pos));
        if (!piece.empty()) parts.push_back(piece);
        if (next == std::string::npos) break;
        pos = next + sep.size();
    }
    return parts;
}

bool parse_score(const std::string& text, double& out) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    out = v;
    return true;
}

void emit(const ParseEventSink& events, const std::string& kind, const std::string& detail) {
    if (events) events(kind, detail);
}

}  // namespace

std::vector<Hypothesis> parse_hypotheses(const std::string& text,
                                         std::size_t max_hypotheses,
                                         const ParseEventSink& events) {
    std::vector<std::vector<std::string>> blocks;
    {
        std::istringstream in(text);
        std::string line;
        bool in_block = false;
        while (std::getline(in, line)) {
            if (is_block_header(line)) {
                blocks.emplace_back();
                in_block = true;
            } else if (in_block) {
                blocks.back().push_back(line);
            }
        }
    }

    std::vector<Hypothesis> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string where = "hypothesis block " + std::to_string(b + 1);
        Hypothesis h;
        bool has_statement = false;
        bool scores_ok = true;
        struct ScoreField {
            const char* key;
            double Hypothesis::* member;
        };
        static constexpr ScoreField score_fields[] = {
            {"Novelty", &Hypothesis::novelty},
            {"Feasibility", &Hypothesis::feasibility},
            {"Testability", &Hypothesis::testability},
        };
        for (const std::string& line : blocks[b]) {
            std::string value;
            if (field_value(line, "Statement", value)) {
                h.statement = value;
                has_statement = !value.empty();
            } else if (field_value(line, "Causal Chain", value)) {
                h.causal_chain = split_list(value, "->");
            } else if (field_value(line, "Evidence Summary", value)) {
                h.evidence_summary = value;
            } else if (field_value(line, "Evidence", value)) {
                h.evidence_refs = split_list(value, ",");
            } else {
                for (const auto& f : score_fields) {
                    if (!field_value(line, f.key, value)) continue;
                    double score = 0.0;
                    if (!parse_score(value, score)) {
                        emit(events, "parse_failure",
                             where + ": bad " + std::string(f.key) + " value '" + value + "'");
                        scores_ok = false;
                        break;
                    }
                    const double clamped = std::min(1.0, std::max(0.0, score));
                    if (clamped != score)
                        emit(events, "score_clamp",
                             where + ": " + std::string(f.key) + " " + value + " clamped to " +
                                 std::to_string(clamped));
                    h.*(f.member) = clamped;
                    break;
                }
            }
        }
        if (!has_statement) {
            emit(events, "parse_failure", where + ": missing statement, block dropped");
            continue;
        }
        if (!scores_ok) {
            emit(events, "parse_failure", where + ": dropped");
            continue;
        }
        out.push_back(std::move(h));
        if (out.size() == max_hypotheses) break;
    }
    return out;
}

}  // namespace mechsynth
