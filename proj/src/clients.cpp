#include "mechsynth/clients.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mechsynth {

std::string to_string(DocumentSource source) {
    switch (source) {
        case DocumentSource::ScholarlyApi: return "scholarly_api";
        case DocumentSource::WebSearch: return "web_search";
        case DocumentSource::LocalFixture: return "local_fixture";
    }
    throw std::logic_error("unknown document source");
}

DocumentSource document_source_from_string(const std::string& s) {
    if (s == "scholarly_api") return DocumentSource::ScholarlyApi;
    if (s == "web_search") return DocumentSource::WebSearch;
    if (s == "local_fixture") return DocumentSource::LocalFixture;
    throw std::invalid_argument("unknown document source: " + s);
}

nlohmann::json Document::to_json() const {
    return nlohmann::json{{"doc_id", doc_id},
                          {"title", title},
                          {"body", body},
                          {"source", to_string(source)},
                          {"retrieval_keywords", retrieval_keywords}};
}

Document Document::from_json(const nlohmann::json& j) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.title = j.value("title", std::string{});
    d.body = j.value("body", std::string{});
    d.source = document_source_from_string(j.value("source", std::string{"local_fixture"}));
    if (j.contains("retrieval_keywords"))
        d.retrieval_keywords = j.at("retrieval_keywords").get<std::vector<std::string>>();
    return d;
}

nlohmann::json ChatExchange::to_json() const {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    return nlohmann::json{{"stage", request.stage},
                          {"messages", msgs},
                          {"temperature", request.temperature},
                          {"model_id", request.model_id},
                          {"response", response}};
}

ChatExchange ChatExchange::from_json(const nlohmann::json& j) {
    ChatExchange e;
    e.request.stage = j.at("stage").get<std::string>();
    for (const auto& m : j.at("messages"))
        e.request.messages.push_back(
            {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    e.request.temperature = j.value("temperature", 0.0);
    e.request.model_id = j.value("model_id", std::string{});
    e.response = j.at("response").get<std::string>();
    return e;
}

nlohmann::json SearchCall::to_json() const {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : results) docs.push_back(d.to_json());
    return nlohmann::json{{"expression", expression},
                          {"max_results", max_results},
                          {"results", docs}};
}

SearchCall SearchCall::from_json(const nlohmann::json& j) {
    SearchCall c;
    c.expression = j.at("expression").get<std::string>();
    c.max_results = j.at("max_results").get<std::size_t>();
    for (const auto& d : j.at("results")) c.results.push_back(Document::from_json(d));
    return c;
}

}  // namespace mechsynth
