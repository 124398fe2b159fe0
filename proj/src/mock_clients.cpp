#include "mechsynth/mock_clients.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mechsynth/text.hpp"

namespace mechsynth {

namespace {

// Finds "<key>: <value>" in any line of any message, latest message first.
std::optional<std::string> prompt_field(const ChatRequest& request, const std::string& key) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        std::istringstream in(it->content);
        std::string line;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            if (t.size() > key.size() + 1 && t.compare(0, key.size(), key) == 0 &&
                t[key.size()] == ':')
                return trim(t.substr(key.size() + 1));
        }
    }
    return std::nullopt;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",  "and",  "are",   "as",   "at",   "be",   "between", "by",
        "can",  "do",  "does", "for",   "from", "how",  "in",   "into",    "is",
        "it",   "of",  "on",   "or",    "s",    "that", "the",  "this",    "to",
        "what", "when", "which", "why", "with"};
    return words;
}

std::optional<std::string> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

std::string TemplateRefineClient::complete(const ChatRequest& request) {
    const auto query = prompt_field(request, "QUERY");
    if (!query) return {};
    std::string expression;
    for (const std::string& term : tokenize(*query)) {
        if (stopwords().count(term)) continue;
        if (!expression.empty()) expression += " AND ";
        expression += term;
    }
    return expression;
}

FixtureSearchClient::FixtureSearchClient(std::vector<Document> corpus)
    : corpus_(std::move(corpus)) {
    std::sort(corpus_.begin(), corpus_.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
}

std::vector<Document> FixtureSearchClient::search(const std::string& expression,
                                                  std::size_t max_results) {
    std::set<std::string> terms;
    for (const std::string& t : tokenize(expression))
        if (t != "and" && t != "or" && t != "not") terms.insert(t);

    std::vector<Document> out;
    for (const Document& doc : corpus_) {
        if (out.size() == max_results) break;
        std::set<std::string> doc_terms;
        if (!doc.retrieval_keywords.empty()) {
            for (const std::string& kw : doc.retrieval_keywords)
                for (const std::string& t : tokenize(kw)) doc_terms.insert(t);
        } else {
            doc_terms = token_set(doc.title + " " + doc.body);
        }
        bool hit = false;
        for (const std::string& t : terms)
            if (doc_terms.count(t)) {
                hit = true;
                break;
            }
        if (hit) out.push_back(doc);
    }
    return out;
}

PerDocumentClient::PerDocumentClient(std::map<std::string, std::string> responses_by_doc)
    : responses_(std::move(responses_by_doc)) {}

PerDocumentClient PerDocumentClient::from_directory(const std::string& dir) {
    std::map<std::string, std::string> responses;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (auto text = slurp(entry.path()))
            responses[entry.path().stem().string()] = *text;
    }
    return PerDocumentClient(std::move(responses));
}

std::string PerDocumentClient::complete(const ChatRequest& request) {
    const auto doc_id = prompt_field(request, "DOC_ID");
    if (doc_id) {
        const auto it = responses_.find(*doc_id);
        if (it != responses_.end()) return it->second;
    }
    return "{}";
}

StaticTextClient::StaticTextClient(std::string response) : response_(std::move(response)) {}

std::string StaticTextClient::complete(const ChatRequest&) { return response_; }

ScriptedTextClient::ScriptedTextClient(std::vector<std::string> responses, std::string fallback)
    : responses_(std::move(responses)), fallback_(std::move(fallback)) {}

std::string ScriptedTextClient::complete(const ChatRequest&) {
    if (next_ < responses_.size()) return responses_[next_++];
    return fallback_;
}

RecordedTextClient::RecordedTextClient(const std::vector<ChatExchange>& exchanges) {
    for (const ChatExchange& e : exchanges)
        responses_by_stage_[e.request.stage].push_back(e.response);
}

std::string RecordedTextClient::complete(const ChatRequest& request) {
    auto& next = next_by_stage_[request.stage];
    const auto it = responses_by_stage_.find(request.stage);
    const std::size_t available = it == responses_by_stage_.end() ? 0 : it->second.size();
    if (next >= available)
        throw std::runtime_error("replay: no recorded exchange for stage '" + request.stage +
                                 "' call " + std::to_string(next + 1));
    return it->second[next++];
}

RecordedSearchClient::RecordedSearchClient(std::vector<SearchCall> calls)
    : calls_(std::move(calls)) {}

std::vector<Document> RecordedSearchClient::search(const std::string&, std::size_t) {
    if (next_ >= calls_.size())
        throw std::runtime_error("replay: no recorded search call " + std::to_string(next_ + 1));
    return calls_[next_++].results;
}

ClientSuite MockSuite::view() const {
    ClientSuite suite;
    suite.refinement = refinement.get();
    suite.extraction = extraction.get();
    suite.densification = densification.get();
    suite.exploration = exploration.get();
    suite.synthesis = synthesis.get();
    suite.retrieval = retrieval.get();
    return suite;
}

MockSuite make_mock_suite(const std::string& fixture_dir) {
    const std::filesystem::path dir(fixture_dir);
    MockSuite suite;
    suite.refinement = std::make_unique<TemplateRefineClient>();

    std::vector<Document> corpus;
    if (auto text = slurp(dir / "docs.json")) {
        for (const auto& j : nlohmann::json::parse(*text))
            corpus.push_back(Document::from_json(j));
    }
    suite.retrieval = std::make_unique<FixtureSearchClient>(std::move(corpus));

    suite.extraction = std::make_unique<PerDocumentClient>(
        PerDocumentClient::from_directory((dir / "gold").string()));

    suite.densification =
        std::make_unique<StaticTextClient>(slurp(dir / "densify.txt").value_or("{}"));

    std::vector<std::string> actions;
    if (auto text = slurp(dir / "explore.txt")) {
        std::istringstream in(*text);
        std::string line;
        while (std::getline(in, line))
            if (!trim(line).empty()) actions.push_back(trim(line));
    }
    suite.exploration = std::make_unique<ScriptedTextClient>(std::move(actions),
                                                             "{\"action\":\"stop\"}");

    suite.synthesis =
        std::make_unique<StaticTextClient>(slurp(dir / "synthesize.txt").value_or(""));
    return suite;
}

}  // namespace mechsynth
