#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mechsynth/http_clients.hpp"

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace mechsynth;

namespace {

// Local HTTP server fixture: binds to an ephemeral port on loopback and runs
// the listener on a background thread for the lifetime of the object.
class LocalServer {
public:
    LocalServer() = default;

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    httplib::Server server;

private:
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("chat client posts request and returns message content") {
    LocalServer srv;
    std::string seen_auth;
    nlohmann::json seen_body;
    srv.server.Post("/v1/chat/completions",
                    [&](const httplib::Request& req, httplib::Response& res) {
                        seen_auth = req.get_header_value("Authorization");
                        seen_body = nlohmann::json::parse(req.body);
                        nlohmann::json reply{
                            {"choices",
                             nlohmann::json::array(
                                 {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}})}};
                        res.set_content(reply.dump(), "application/json");
                    });
    srv.start();

    HttpChatClient client(srv.base_url(), "sk-test-123");
    ChatRequest request;
    request.model_id = "demo-model";
    request.temperature = 0.5;
    request.messages = {{"system", "be terse"}, {"user", "ping"}};

    CHECK(client.complete(request) == "pong");
    CHECK(seen_auth == "Bearer sk-test-123");
    CHECK(seen_body.at("model") == "demo-model");
    CHECK(seen_body.at("temperature").get<double>() == doctest::Approx(0.5));
    REQUIRE(seen_body.at("messages").size() == 2);
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][1]["content"] == "ping");
}

TEST_CASE("chat client rejects an empty api key") {
    CHECK_THROWS_AS(HttpChatClient("http://127.0.0.1:9", ""), std::invalid_argument);
}

TEST_CASE("chat client reports non-200 responses and malformed bodies") {
    LocalServer srv;
    srv.server.Post("/v1/chat/completions",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.status = 500;
                        res.set_content("busted", "text/plain");
                    });
    srv.server.Post("/alt", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"choices\": []}", "application/json");
    });
    srv.server.Post("/garbled", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "application/json");
    });
    srv.start();

    ChatRequest request;
    request.messages = {{"user", "hello"}};

    HttpChatClient failing(srv.base_url(), "k");
    CHECK_THROWS_WITH_AS(failing.complete(request), "chat request returned status 500",
                         std::runtime_error);

    HttpChatClient empty_choices(srv.base_url(), "k", "/alt");
    CHECK_THROWS_AS(empty_choices.complete(request), std::runtime_error);

    HttpChatClient garbled(srv.base_url(), "k", "/garbled");
    CHECK_THROWS_AS(garbled.complete(request), std::runtime_error);
}

TEST_CASE("chat client surfaces transport failures") {
    // Nothing listens on this port; the connection itself fails.
    HttpChatClient client("http://127.0.0.1:1", "k");
    ChatRequest request;
    request.messages = {{"user", "hello"}};
    CHECK_THROWS_AS(client.complete(request), std::runtime_error);
}

TEST_CASE("scholarly search maps results and forwards query params") {
    LocalServer srv;
    std::string seen_search;
    std::string seen_per_page;
    srv.server.Get("/works", [&](const httplib::Request& req, httplib::Response& res) {
        seen_search = req.get_param_value("search");
        seen_per_page = req.get_param_value("per-page");
        nlohmann::json reply{
            {"results",
             nlohmann::json::array({{{"id", "W1"}, {"title", "Alpha"}, {"abstract", "First."}},
                                    {{"id", ""}, {"title", "Skipped"}, {"abstract", "No id."}},
                                    {{"id", "W2"}, {"title", "Beta"}},
                                    {{"id", "W3"}, {"title", "Gamma"}, {"abstract", "Third."}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    srv.start();

    ScholarlySearchClient client(srv.base_url());
    const auto docs = client.search("gut AND microbiome", 2);

    CHECK(seen_search == "gut AND microbiome");
    CHECK(seen_per_page == "2");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "W1");
    CHECK(docs[0].title == "Alpha");
    CHECK(docs[0].body == "First.");
    CHECK(docs[0].source == DocumentSource::ScholarlyApi);
    CHECK(docs[1].doc_id == "W2");
    CHECK(docs[1].body.empty());
}

TEST_CASE("scholarly search handles empty and malformed payloads") {
    LocalServer srv;
    srv.server.Get("/works", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{}", "application/json");
    });
    srv.server.Get("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("<html>oops</html>", "text/html");
    });
    srv.server.Get("/down", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    srv.start();

    ScholarlySearchClient ok(srv.base_url());
    CHECK(ok.search("anything", 5).empty());

    ScholarlySearchClient broken(srv.base_url(), "/broken");
    CHECK_THROWS_AS(broken.search("anything", 5), std::runtime_error);

    ScholarlySearchClient down(srv.base_url(), "/down");
    CHECK_THROWS_WITH_AS(down.search("anything", 5),
                         ("request to " + srv.base_url() + "/down returned status 503").c_str(),
                         std::runtime_error);
}

TEST_CASE("web search maps items to documents") {
    LocalServer srv;
    std::string seen_q;
    std::string seen_count;
    srv.server.Get("/search", [&](const httplib::Request& req, httplib::Response& res) {
        seen_q = req.get_param_value("q");
        seen_count = req.get_param_value("count");
        nlohmann::json reply{
            {"items", nlohmann::json::array(
                          {{{"url", "https://example.org/a"},
                            {"title", "Page A"},
                            {"snippet", "snippet a"}},
                           {{"url", "https://example.org/b"}, {"title", "Page B"}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    srv.start();

    WebSearchClient client(srv.base_url());
    const auto docs = client.search("dysbiosis mechanisms", 10);

    CHECK(seen_q == "dysbiosis mechanisms");
    CHECK(seen_count == "10");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "https://example.org/a");
    CHECK(docs[0].title == "Page A");
    CHECK(docs[0].body == "snippet a");
    CHECK(docs[0].source == DocumentSource::WebSearch);
    CHECK(docs[1].body.empty());
}

TEST_CASE("fallback search prefers primary and falls back on trouble") {
    LocalServer srv;
    std::atomic<int> primary_calls{0};
    std::atomic<bool> primary_empty{false};
    std::atomic<bool> primary_error{false};
    std::atomic<bool> fallback_error{false};
    srv.server.Get("/works", [&](const httplib::Request&, httplib::Response& res) {
        ++primary_calls;
        if (primary_error) {
            res.status = 500;
            return;
        }
        nlohmann::json reply{{"results", nlohmann::json::array()}};
        if (!primary_empty)
            reply["results"].push_back(
                {{"id", "W9"}, {"title", "Primary hit"}, {"abstract", "From works."}});
        res.set_content(reply.dump(), "application/json");
    });
    srv.server.Get("/search", [&](const httplib::Request&, httplib::Response& res) {
        if (fallback_error) {
            res.status = 500;
            return;
        }
        nlohmann::json reply{
            {"items", nlohmann::json::array({{{"url", "https://example.org/fb"},
                                              {"title", "Fallback hit"},
                                              {"snippet", "From web."}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    srv.start();

    ScholarlySearchClient primary(srv.base_url());
    WebSearchClient secondary(srv.base_url());
    FallbackSearchClient chained(primary, secondary);

    SUBCASE("primary result wins") {
        const auto docs = chained.search("q", 3);
        REQUIRE(docs.size() == 1);
        CHECK(docs[0].doc_id == "W9");
        CHECK(primary_calls == 1);
    }

    SUBCASE("empty primary falls through") {
        primary_empty = true;
        const auto docs = chained.search("q", 3);
        REQUIRE(docs.size() == 1);
        CHECK(docs[0].doc_id == "https://example.org/fb");
        CHECK(docs[0].source == DocumentSource::WebSearch);
    }

    SUBCASE("failing primary falls through") {
        primary_error = true;
        const auto docs = chained.search("q", 3);
        REQUIRE(docs.size() == 1);
        CHECK(docs[0].doc_id == "https://example.org/fb");
    }

    SUBCASE("both failing propagates the fallback error") {
        primary_error = true;
        fallback_error = true;
        CHECK_THROWS_AS(chained.search("q", 3), std::runtime_error);
    }
}
