#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mechsynth/clients.hpp"

namespace mechsynth {

// Answers refinement prompts with the query terms joined by AND. The query is
// read from the prompt line starting with "QUERY:".
class TemplateRefineClient : public TextClient {
public:
    std::string complete(const ChatRequest& request) override;
};

// Serves a fixed corpus. A document matches when any search term appears in
// its keywords, title, or body tokens. Results are ordered by doc id.
class FixtureSearchClient : public SearchClient {
public:
    explicit FixtureSearchClient(std::vector<Document> corpus);

    std::vector<Document> search(const std::string& expression,
                                 std::size_t max_results) override;

private:
    std::vector<Document> corpus_;
};

// Replies to extraction-style prompts with a canned response per document.
// The document is identified by the prompt line starting with "DOC_ID:";
// unknown documents get an empty extraction.
class PerDocumentClient : public TextClient {
public:
    explicit PerDocumentClient(std::map<std::string, std::string> responses_by_doc);

    // Loads <dir>/<doc_id>.json files as responses.
    static PerDocumentClient from_directory(const std::string& dir);

    std::string complete(const ChatRequest& request) override;

private:
    std::map<std::string, std::string> responses_;
};

// Always returns the same response.
class StaticTextClient : public TextClient {
public:
    explicit StaticTextClient(std::string response);

    std::string complete(const ChatRequest& request) override;

private:
    std::string response_;
};

// Returns scripted responses in order, then the fallback.
class ScriptedTextClient : public TextClient {
public:
    explicit ScriptedTextClient(std::vector<std::string> responses,
                                std::string fallback = {});

    std::string complete(const ChatRequest& request) override;

private:
    std::vector<std::string> responses_;
    std::string fallback_;
    std::size_t next_ = 0;
};

// Answers from stored exchanges, consuming them per stage in order. Throws
// std::runtime_error naming the stage and call index when a stage runs out.
class RecordedTextClient : public TextClient {
public:
    explicit RecordedTextClient(const std::vector<ChatExchange>& exchanges);

    std::string complete(const ChatRequest& request) override;

private:
    std::map<std::string, std::vector<std::string>> responses_by_stage_;
    std::map<std::string, std::size_t> next_by_stage_;
};

// Replays stored search calls in order; throws when exhausted.
class RecordedSearchClient : public SearchClient {
public:
    explicit RecordedSearchClient(std::vector<SearchCall> calls);

    std::vector<Document> search(const std::string& expression,
                                 std::size_t max_results) override;

private:
    std::vector<SearchCall> calls_;
    std::size_t next_ = 0;
};

// Owns a full set of deterministic fixture-driven clients.
struct MockSuite {
    std::unique_ptr<TextClient> refinement;
    std::unique_ptr<TextClient> extraction;
    std::unique_ptr<TextClient> densification;
    std::unique_ptr<TextClient> exploration;
    std::unique_ptr<TextClient> synthesis;
    std::unique_ptr<SearchClient> retrieval;

    ClientSuite view() const;
};

// Builds a MockSuite from a fixture directory containing docs.json,
// gold/<doc_id>.json extraction responses, densify.txt, explore.txt (one
// scripted action per line), and synthesize.txt.
MockSuite make_mock_suite(const std::string& fixture_dir);

}  // namespace mechsynth
