#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mechsynth {

enum class DocumentSource { ScholarlyApi, WebSearch, LocalFixture };

std::string to_string(DocumentSource source);
DocumentSource document_source_from_string(const std::string& s);

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    DocumentSource source = DocumentSource::LocalFixture;
    std::vector<std::string> retrieval_keywords;

    nlohmann::json to_json() const;
    static Document from_json(const nlohmann::json& j);

    bool operator==(const Document&) const = default;
};

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

// One language-model call. `stage` tags which pipeline step issued it so
// recorded exchanges can be replayed per stage.
struct ChatRequest {
    std::string stage;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::string model_id;

    bool operator==(const ChatRequest&) const = default;
};

struct ChatExchange {
    ChatRequest request;
    std::string response;

    nlohmann::json to_json() const;
    static ChatExchange from_json(const nlohmann::json& j);

    bool operator==(const ChatExchange&) const = default;
};

// One retrieval call with its results, logged for replay.
struct SearchCall {
    std::string expression;
    std::size_t max_results = 0;
    std::vector<Document> results;

    nlohmann::json to_json() const;
    static SearchCall from_json(const nlohmann::json& j);

    bool operator==(const SearchCall&) const = default;
};

class TextClient {
public:
    virtual ~TextClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<Document> search(const std::string& expression,
                                         std::size_t max_results) = 0;
};

// Non-owning bundle of the clients a pipeline run needs.
struct ClientSuite {
    TextClient* refinement = nullptr;
    TextClient* extraction = nullptr;
    TextClient* densification = nullptr;
    TextClient* exploration = nullptr;
    TextClient* synthesis = nullptr;
    SearchClient* retrieval = nullptr;
};

}  // namespace mechsynth
