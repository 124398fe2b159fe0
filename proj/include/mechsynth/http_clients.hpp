#pragma once

#include <string>

#include "mechsynth/clients.hpp"

namespace mechsynth {

// Chat-completions client for an OpenAI-style endpoint. Throws
// std::runtime_error on transport errors, non-200 statuses, and responses
// without a message body. Requires a non-empty api key.
class HttpChatClient : public TextClient {
public:
    HttpChatClient(std::string base_url, std::string api_key,
                   std::string path = "/v1/chat/completions");

    std::string complete(const ChatRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
    std::string path_;
};

// Scholarly works search over an OpenAlex-style endpoint:
// GET <path>?search=<expression>&per-page=<n>, responses carry
// {"results": [{"id", "title", "abstract"}]}.
class ScholarlySearchClient : public SearchClient {
public:
    explicit ScholarlySearchClient(std::string base_url, std::string path = "/works");

    std::vector<Document> search(const std::string& expression,
                                 std::size_t max_results) override;

private:
    std::string base_url_;
    std::string path_;
};

// General web search: GET <path>?q=<expression>&count=<n>, responses carry
// {"items": [{"url", "title", "snippet"}]}.
class WebSearchClient : public SearchClient {
public:
    explicit WebSearchClient(std::string base_url, std::string path = "/search");

    std::vector<Document> search(const std::string& expression,
                                 std::size_t max_results) override;

private:
    std::string base_url_;
    std::string path_;
};

// Tries the primary client; on an empty result or an error falls back to the
// secondary. Only throws when both fail.
class FallbackSearchClient : public SearchClient {
public:
    FallbackSearchClient(SearchClient& primary, SearchClient& fallback);

    std::vector<Document> search(const std::string& expression,
                                 std::size_t max_results) override;

private:
    SearchClient& primary_;
    SearchClient& fallback_;
};

}  // namespace mechsynth
