#include "mechsynth/http_clients.hpp"

#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace mechsynth {

namespace {

std::string get_json(const std::string& base_url, const std::string& path,
                     const httplib::Params& params) {
    httplib::Client client(base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    const auto res = client.Get(path, params, httplib::Headers{});
    if (!res)
        throw std::runtime_error("request to " + base_url + path + " failed: " +
                                 httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("request to " + base_url + path + " returned status " +
                                 std::to_string(res->status));
    return res->body;
}

}  // namespace

HttpChatClient::HttpChatClient(std::string base_url, std::string api_key, std::string path)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), path_(std::move(path)) {
    if (api_key_.empty()) throw std::invalid_argument("chat client requires an api key");
}

std::string HttpChatClient::complete(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    const nlohmann::json body{{"model", request.model_id},
                              {"messages", messages},
                              {"temperature", request.temperature}};

    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    const auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw std::runtime_error("chat request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("chat request returned status " + std::to_string(res->status));

    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("chat response malformed: ") + e.what());
    }
}

ScholarlySearchClient::ScholarlySearchClient(std::string base_url, std::string path)
    : base_url_(std::move(base_url)), path_(std::move(path)) {}

std::vector<Document> ScholarlySearchClient::search(const std::string& expression,
                                                    std::size_t max_results) {
    const std::string body = get_json(
        base_url_, path_,
        {{"search", expression}, {"per-page", std::to_string(max_results)}});
    std::vector<Document> docs;
    try {
        const auto j = nlohmann::json::parse(body);
        for (const auto& r : j.value("results", nlohmann::json::array())) {
            if (docs.size() == max_results) break;
            Document d;
            d.doc_id = r.value("id", std::string{});
            d.title = r.value("title", std::string{});
            d.body = r.value("abstract", std::string{});
            d.source = DocumentSource::ScholarlyApi;
            if (!d.doc_id.empty()) docs.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("works response malformed: ") + e.what());
    }
    return docs;
}

WebSearchClient::WebSearchClient(std::string base_url, std::string path)
    : base_url_(std::move(base_url)), path_(std::move(path)) {}

std::vector<Document> WebSearchClient::search(const std::string& expression,
                                              std::size_t max_results) {
    const std::string body =
        get_json(base_url_, path_, {{"q", expression}, {"count", std::to_string(max_results)}});
    std::vector<Document> docs;
    try {
        const auto j = nlohmann::json::parse(body);
        for (const auto& r : j.value("items", nlohmann::json::array())) {
            if (docs.size() == max_results) break;
            Document d;
            d.doc_id = r.value("url", std::string{});
            d.title = r.value("title", std::string{});
            d.body = r.value("snippet", std::string{});
            d.source = DocumentSource::WebSearch;
            if (!d.doc_id.empty()) docs.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("search response malformed: ") + e.what());
    }
    return docs;
}

FallbackSearchClient::FallbackSearchClient(SearchClient& primary, SearchClient& fallback)
    : primary_(primary), fallback_(fallback) {}

std::vector<Document> FallbackSearchClient::search(const std::string& expression,
                                                   std::size_t max_results) {
    try {
        auto docs = primary_.search(expression, max_results);
        if (!docs.empty()) return docs;
    } catch (const std::exception&) {
        // fall through to the secondary client
    }
    return fallback_.search(expression, max_results);
}

}  // namespace mechsynth
