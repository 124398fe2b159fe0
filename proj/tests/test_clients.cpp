#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "mechsynth/hypothesis.hpp"
#include "mechsynth/mock_clients.hpp"

using namespace mechsynth;

namespace {

ChatRequest user_prompt(const std::string& stage, const std::string& content) {
    ChatRequest r;
    r.stage = stage;
    r.messages = {{"system", "s"}, {"user", content}};
    return r;
}

std::vector<Document> load_gut_corpus() {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/corpus/gut_brain/docs.json");
    REQUIRE(in.good());
    std::vector<Document> docs;
    for (const auto& j : nlohmann::json::parse(in)) docs.push_back(Document::from_json(j));
    return docs;
}

}  // namespace

TEST_CASE("refine template joins query terms with AND, dropping function words") {
    TemplateRefineClient client;
    const auto out = client.complete(user_prompt(
        "refine",
        "QUERY: What is the mechanistic link between gut microbiome dysbiosis and "
        "Parkinson's disease progression?"));
    CHECK(out ==
          "mechanistic AND link AND gut AND microbiome AND dysbiosis AND parkinson AND "
          "disease AND progression");
}

TEST_CASE("refine template without a QUERY line yields an empty expression") {
    TemplateRefineClient client;
    CHECK(client.complete(user_prompt("refine", "no marker here")).empty());
}

TEST_CASE("fixture search matches keyword tokens and orders by doc id") {
    FixtureSearchClient client(load_gut_corpus());
    const auto hits = client.search("gut AND microbiome", 20);
    std::vector<std::string> ids;
    for (const auto& d : hits) ids.push_back(d.doc_id);
    CHECK(ids == std::vector<std::string>{"d01", "d02", "d03", "d04", "d05", "d07", "d08"});

    const auto capped = client.search("gut", 3);
    REQUIRE(capped.size() == 3);
    CHECK(capped[0].doc_id == "d01");
    CHECK(capped[2].doc_id == "d03");

    const auto controversy = client.search("controversy OR debate", 20);
    REQUIRE(controversy.size() == 1);
    CHECK(controversy[0].doc_id == "d06");

    CHECK(client.search("xylophone", 20).empty());
}

TEST_CASE("per-document client answers by DOC_ID line and defaults to empty extraction") {
    PerDocumentClient client({{"d01", "payload-one"}, {"d02", "payload-two"}});
    CHECK(client.complete(user_prompt("extract", "DOC_ID: d02\nBODY:\nx")) == "payload-two");
    CHECK(client.complete(user_prompt("extract", "DOC_ID: nope")) == "{}");
    CHECK(client.complete(user_prompt("extract", "no marker")) == "{}");
}

TEST_CASE("per-document client loads gold files from a directory") {
    auto client = PerDocumentClient::from_directory(std::string(TEST_DATA_DIR) +
                                                    "/corpus/gut_brain/gold");
    const auto response = client.complete(user_prompt("extract", "DOC_ID: d05"));
    const auto j = nlohmann::json::parse(response);
    CHECK(j.at("mentions").size() == 4);
    CHECK(j.at("triples").size() == 3);
}

TEST_CASE("scripted client plays responses in order, then the fallback") {
    ScriptedTextClient client({"one", "two"}, "done");
    const auto req = user_prompt("explore", "x");
    CHECK(client.complete(req) == "one");
    CHECK(client.complete(req) == "two");
    CHECK(client.complete(req) == "done");
    CHECK(client.complete(req) == "done");
}

TEST_CASE("recorded text client replays per stage and throws when exhausted") {
    std::vector<ChatExchange> exchanges;
    for (const char* r : {"a1", "a2"}) {
        ChatExchange e;
        e.request.stage = "extract";
        e.response = r;
        exchanges.push_back(e);
    }
    ChatExchange refine;
    refine.request.stage = "refine";
    refine.response = "expr";
    exchanges.push_back(refine);

    RecordedTextClient client(exchanges);
    CHECK(client.complete(user_prompt("refine", "q")) == "expr");
    CHECK(client.complete(user_prompt("extract", "1")) == "a1");
    CHECK(client.complete(user_prompt("extract", "2")) == "a2");
    CHECK_THROWS_WITH_AS(client.complete(user_prompt("extract", "3")),
                         "replay: no recorded exchange for stage 'extract' call 3",
                         std::runtime_error);
    CHECK_THROWS_AS(client.complete(user_prompt("synthesize", "s")), std::runtime_error);
}

TEST_CASE("recorded search client replays calls in order") {
    SearchCall call;
    call.expression = "e";
    call.max_results = 5;
    Document d;
    d.doc_id = "d9";
    call.results = {d};

    RecordedSearchClient client({call});
    const auto docs = client.search("anything", 99);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].doc_id == "d9");
    CHECK_THROWS_AS(client.search("again", 1), std::runtime_error);
}

TEST_CASE("document and exchange serialization round-trips") {
    Document d;
    d.doc_id = "w1";
    d.title = "T";
    d.body = "B";
    d.source = DocumentSource::WebSearch;
    d.retrieval_keywords = {"k1", "k2"};
    CHECK(Document::from_json(d.to_json()) == d);

    ChatExchange e;
    e.request = user_prompt("densify", "hello");
    e.request.temperature = 0.5;
    e.request.model_id = "m";
    e.response = "world";
    CHECK(ChatExchange::from_json(e.to_json()) == e);

    SearchCall c;
    c.expression = "x AND y";
    c.max_results = 3;
    c.results = {d};
    CHECK(SearchCall::from_json(c.to_json()) == c);
}

TEST_CASE("mock suite wires all six clients from the fixture directory") {
    const MockSuite suite = make_mock_suite(std::string(TEST_DATA_DIR) + "/corpus/gut_brain");
    const ClientSuite view = suite.view();
    REQUIRE(view.refinement != nullptr);
    REQUIRE(view.extraction != nullptr);
    REQUIRE(view.densification != nullptr);
    REQUIRE(view.exploration != nullptr);
    REQUIRE(view.synthesis != nullptr);
    REQUIRE(view.retrieval != nullptr);

    CHECK(view.retrieval->search("gut", 99).size() == 7);
    const auto action = view.exploration->complete(user_prompt("explore", "x"));
    CHECK(nlohmann::json::parse(action).at("action") == "get_neighbors");
}

TEST_CASE("hypothesis parser reads blocks, chains, evidence, and scores") {
    const std::string text =
        "HYPOTHESIS 1\n"
        "Statement: A drives B.\n"
        "Causal Chain: alpha -> beta -> gamma\n"
        "Evidence Summary: Seen twice.\n"
        "Evidence: d01, d02\n"
        "Novelty: 0.8\nFeasibility: 0.7\nTestability: 0.9\n"
        "\n"
        "HYPOTHESIS 2\n"
        "Statement: C blocks D.\n"
        "Causal Chain: c -> d\n"
        "Novelty: 0.2\nFeasibility: 0.4\nTestability: 0.5\n";
    const auto hs = parse_hypotheses(text, 5);
    REQUIRE(hs.size() == 2);
    CHECK(hs[0].statement == "A drives B.");
    CHECK(hs[0].causal_chain == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(hs[0].evidence_summary == "Seen twice.");
    CHECK(hs[0].evidence_refs == std::vector<std::string>{"d01", "d02"});
    CHECK(hs[0].novelty == doctest::Approx(0.8));
    CHECK(hs[1].causal_chain == std::vector<std::string>{"c", "d"});
    CHECK(hs[1].evidence_refs.empty());
}

TEST_CASE("hypothesis parser clamps out-of-range scores and reports the clamp") {
    std::vector<std::pair<std::string, std::string>> events;
    const auto hs = parse_hypotheses(
        "HYPOTHESIS 1\nStatement: S.\nNovelty: 1.7\nFeasibility: -0.3\nTestability: 0.5\n", 3,
        [&](const std::string& kind, const std::string& detail) {
            events.emplace_back(kind, detail);
        });
    REQUIRE(hs.size() == 1);
    CHECK(hs[0].novelty == 1.0);
    CHECK(hs[0].feasibility == 0.0);
    CHECK(hs[0].testability == 0.5);
    REQUIRE(events.size() == 2);
    CHECK(events[0].first == "score_clamp");
    CHECK(events[1].first == "score_clamp");
}

TEST_CASE("hypothesis parser drops blocks without statements or with bad scores") {
    std::vector<std::string> kinds;
    const auto hs = parse_hypotheses(
        "HYPOTHESIS 1\nCausal Chain: a -> b\nNovelty: 0.5\n"
        "HYPOTHESIS 2\nStatement: ok.\nNovelty: not-a-number\n"
        "HYPOTHESIS 3\nStatement: fine.\nNovelty: 0.5\n",
        5, [&](const std::string& kind, const std::string&) { kinds.push_back(kind); });
    REQUIRE(hs.size() == 1);
    CHECK(hs[0].statement == "fine.");
    CHECK(kinds == std::vector<std::string>{"parse_failure", "parse_failure", "parse_failure"});
}

TEST_CASE("hypothesis parser respects the block cap and handles empty input") {
    std::string text;
    for (int i = 1; i <= 5; ++i)
        text += "HYPOTHESIS " + std::to_string(i) + "\nStatement: s" + std::to_string(i) +
                ".\nNovelty: 0.1\n";
    CHECK(parse_hypotheses(text, 2).size() == 2);
    CHECK(parse_hypotheses("", 3).empty());
    CHECK(parse_hypotheses("no blocks at all", 3).empty());
}

TEST_CASE("hypothesis serialization round-trips") {
    Hypothesis h;
    h.statement = "S";
    h.causal_chain = {"a", "b"};
    h.evidence_summary = "E";
    h.evidence_refs = {"d01"};
    h.novelty = 0.25;
    h.feasibility = 0.5;
    h.testability = 0.75;
    h.stance_counts = {2, 1, 3};
    CHECK(Hypothesis::from_json(h.to_json()) == h);
}
