#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mechsynth/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/random.hpp"

using namespace mechsynth;
using testsupport::make_graph;

namespace {

ReasoningPath path_of_length(std::size_t n, const std::string& prefix = "p") {
    ReasoningPath p;
    for (std::size_t i = 0; i < n; ++i) p.nodes.push_back(prefix + std::to_string(i));
    p.strategy_tag = "test";
    return p;
}

GroundedChain chain_of_length(std::size_t grounded) {
    GroundedChain c;
    for (std::size_t i = 0; i < grounded; ++i) {
        c.nodes.push_back("label" + std::to_string(i));
        c.mapped_node_ids.push_back("c" + std::to_string(i));
    }
    c.grounded_length = grounded;
    return c;
}

// dysbiosis -> MEV biogenesis -> epigenetic reprogramming, plus a
// separate serotonin -> vagus nerve pair.
testsupport::LabeledGraph grounding_fixture() {
    return make_graph({"dysbiosis", "MEV biogenesis", "epigenetic reprogramming",
                       "serotonin", "vagus nerve"},
                      {{"dysbiosis", "MEV biogenesis"},
                       {"MEV biogenesis", "epigenetic reprogramming"},
                       {"serotonin", "vagus nerve"}});
}

}  // namespace

TEST_CASE("symbolic depth is the mean node length") {
    std::vector<ReasoningPath> paths;
    for (std::size_t n : {5, 5, 4, 5, 5}) paths.push_back(path_of_length(n));
    CHECK(symbolic_depth(paths) == doctest::Approx(4.8));
    CHECK(symbolic_depth({path_of_length(3)}) == 3.0);
    CHECK(symbolic_depth({}) == 0.0);
}

TEST_CASE("grounded depth is the mean grounded run length") {
    std::vector<GroundedChain> chains;
    for (std::size_t n : {5, 5, 4}) chains.push_back(chain_of_length(n));
    const double d = grounded_depth(chains);
    CHECK(d == doctest::Approx(14.0 / 3.0));
    CHECK(std::abs(d - 4.67) <= 0.005);
    CHECK(grounded_depth({}) == 0.0);
    CHECK(grounded_depth({chain_of_length(2)}) == 2.0);
}

TEST_CASE("collapsed chains contribute zero grounded depth") {
    // One-node residues do not count as surviving structure.
    CHECK(grounded_depth({chain_of_length(1), chain_of_length(1)}) == 0.0);
    // Ten collapsed walks plus chains of 4,3,3,3: mean 13/14.
    std::vector<GroundedChain> walks;
    for (int i = 0; i < 10; ++i) walks.push_back(chain_of_length(1));
    for (std::size_t n : {4, 3, 3, 3}) walks.push_back(chain_of_length(n));
    const double d = grounded_depth(walks);
    CHECK(d == doctest::Approx(13.0 / 14.0));
    CHECK(std::abs(d - 0.93) <= 0.005);
}

TEST_CASE("drop rate matches the published rows") {
    const auto q1 = drop_rate(4.8, 14.0 / 3.0);
    REQUIRE(q1.has_value());
    CHECK(*q1 == doctest::Approx(1.0 - (14.0 / 3.0) / 4.8));
    CHECK(std::abs(*q1 - 0.03) <= 0.005);

    const auto q2 = drop_rate(3.6, 14.0 / 3.0);
    REQUIRE(q2.has_value());
    CHECK(*q2 == 0.0);  // grounding amplification clamps at zero

    const auto q3 = drop_rate(3.4, 0.0);
    REQUIRE(q3.has_value());
    CHECK(*q3 == 1.0);
}

TEST_CASE("drop rate degenerate domain") {
    const auto both_zero = drop_rate(0.0, 0.0);
    REQUIRE(both_zero.has_value());
    CHECK(*both_zero == 0.0);
    CHECK_FALSE(drop_rate(0.0, 2.0).has_value());
}

TEST_CASE("drop rate stays within the unit interval") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 500; ++trial) {
        const double ds = 0.1 + 8.0 * testsupport::unit_real(rng);
        const double dg = 8.0 * testsupport::unit_real(rng);
        const auto r = drop_rate(ds, dg);
        REQUIRE(r.has_value());
        CHECK(*r >= 0.0);
        CHECK(*r <= 1.0);
        if (dg >= ds) CHECK(*r == 0.0);
    }
}

TEST_CASE("collapse boundary sits at two nodes") {
    CHECK(is_collapsed(chain_of_length(0)));
    CHECK(is_collapsed(chain_of_length(1)));
    CHECK_FALSE(is_collapsed(chain_of_length(2)));
    CHECK_FALSE(is_collapsed(chain_of_length(5)));
}

TEST_CASE("failure rate counts collapsed chains") {
    std::vector<GroundedChain> chains{chain_of_length(3), chain_of_length(3),
                                      chain_of_length(1), chain_of_length(0)};
    CHECK(failure_rate(chains) == 0.5);
    CHECK(failure_rate({chain_of_length(2), chain_of_length(4)}) == 0.0);

    std::vector<GroundedChain> walks;
    for (int i = 0; i < 10; ++i) walks.push_back(chain_of_length(1));
    for (int i = 0; i < 4; ++i) walks.push_back(chain_of_length(3));
    CHECK(std::abs(failure_rate(walks) - 0.714) <= 0.0005);

    CHECK_THROWS_AS(failure_rate({}), std::invalid_argument);
}

TEST_CASE("diversity jaccard over hand-computed sets") {
    CHECK(diversity_jaccard({{"A", "B", "C"}, {"A", "B", "D"}}) == 0.5);
    CHECK(diversity_jaccard({{"A", "B"}, {"A", "B"}, {"A", "B"}}) == 1.0);
    CHECK(diversity_jaccard({{"A"}, {"B"}, {"C"}}) == 0.0);
    CHECK_THROWS_AS(diversity_jaccard({{"A"}}), std::invalid_argument);
    CHECK_THROWS_AS(diversity_jaccard({}), std::invalid_argument);
}

TEST_CASE("diversity jaccard is permutation-invariant") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::set<std::string>> sets;
        const std::size_t n_sets = 2 + testsupport::bounded(rng, 4);
        for (std::size_t i = 0; i < n_sets; ++i) {
            std::set<std::string> s;
            const std::size_t len = 1 + testsupport::bounded(rng, 5);
            for (std::size_t j = 0; j < len; ++j)
                s.insert(std::string(1, char('a' + testsupport::bounded(rng, 8))));
            sets.push_back(s);
        }
        // Relabel every concept through a fixed bijection.
        std::vector<std::set<std::string>> relabeled;
        for (const auto& s : sets) {
            std::set<std::string> r;
            for (const auto& x : s) r.insert("X" + x + "Y");
            relabeled.push_back(r);
        }
        CHECK(diversity_jaccard(sets) == doctest::Approx(diversity_jaccard(relabeled)));
    }
}

TEST_CASE("ground_chain resolves and walks a fully linked chain") {
    auto lg = grounding_fixture();
    const auto chain = ground_chain(
        {"dysbiosis", "MEV biogenesis", "epigenetic reprogramming"}, lg.g);
    CHECK(chain.mapped_node_ids ==
          lg.ids({"dysbiosis", "MEV biogenesis", "epigenetic reprogramming"}));
    CHECK(chain.grounded_length == 3);
    CHECK_FALSE(is_collapsed(chain));
}

TEST_CASE("ground_chain with unknown labels collapses") {
    auto lg = grounding_fixture();
    const auto chain = ground_chain({"quantum foam", "dark flux"}, lg.g);
    CHECK(chain.nodes.size() == 2);
    CHECK(chain.mapped_node_ids.empty());
    CHECK(chain.grounded_length == 0);
    CHECK(is_collapsed(chain));

    const auto empty = ground_chain({}, lg.g);
    CHECK(empty.nodes.empty());
    CHECK(empty.grounded_length == 0);
    CHECK(is_collapsed(empty));
}

TEST_CASE("ground_chain resolution is case-folded and fuzzy above threshold") {
    auto lg = grounding_fixture();
    const auto folded = ground_chain({"DYSBIOSIS", "Mev Biogenesis"}, lg.g);
    CHECK(folded.mapped_node_ids == lg.ids({"dysbiosis", "MEV biogenesis"}));
    CHECK(folded.grounded_length == 2);

    // {the, mev, biogenesis} vs {mev, biogenesis}: similarity 2/3, below
    // the default 0.85 threshold but above a relaxed one.
    CHECK(ground_chain({"the MEV biogenesis"}, lg.g).mapped_node_ids.empty());
    GroundingConfig relaxed;
    relaxed.similarity_threshold = 0.6;
    CHECK(ground_chain({"the MEV biogenesis"}, lg.g, relaxed).mapped_node_ids ==
          lg.ids({"MEV biogenesis"}));
}

TEST_CASE("ground_chain connectivity slack") {
    auto lg = grounding_fixture();
    // Edges run forward only; the reversed chain needs either-direction.
    const std::vector<std::string> reversed{"epigenetic reprogramming", "MEV biogenesis",
                                            "dysbiosis"};
    CHECK(ground_chain(reversed, lg.g).grounded_length == 3);
    GroundingConfig strict;
    strict.either_direction = false;
    CHECK(ground_chain(reversed, lg.g, strict).grounded_length == 1);
}

TEST_CASE("ground_chain run semantics") {
    auto lg = grounding_fixture();
    // Resolved but disconnected pair: two runs of one.
    CHECK(ground_chain({"dysbiosis", "serotonin"}, lg.g).grounded_length == 1);
    // Break in the middle: best run is the connected pair either side.
    CHECK(ground_chain({"dysbiosis", "MEV biogenesis", "serotonin", "vagus nerve"}, lg.g)
              .grounded_length == 2);
    // Unresolved labels are skipped, not run-breaking.
    const auto skipped =
        ground_chain({"dysbiosis", "unmapped thing", "MEV biogenesis"}, lg.g);
    CHECK(skipped.mapped_node_ids == lg.ids({"dysbiosis", "MEV biogenesis"}));
    CHECK(skipped.grounded_length == 2);
}

TEST_CASE("ground_chain mapped count grows monotonically with the graph") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        auto lg = testsupport::random_digraph(rng, 6, 0.3);
        std::vector<std::string> chain;
        const std::size_t len = 1 + testsupport::bounded(rng, 5);
        for (std::size_t i = 0; i < len; ++i) {
            chain.push_back(std::string(1, char('A' + testsupport::bounded(rng, 10))));
        }
        const auto before = ground_chain(chain, lg.g);

        ConceptGraph bigger = lg.g;
        const NodeId added = bigger.add_concept(std::string(1, char('A' + testsupport::bounded(rng, 10))));
        const NodeId other = bigger.nodes().begin()->first;
        if (added != other && !bigger.has_edge_between(other, added)) {
            bigger.add_relation(other, added, "r", {{"d", "s"}});
        }
        const auto after = ground_chain(chain, bigger);
        CHECK(after.mapped_node_ids.size() >= before.mapped_node_ids.size());
    }
}

TEST_CASE("build_report composes the row the way the tables do") {
    std::vector<ReasoningPath> paths;
    for (std::size_t n : {4, 4, 3, 4, 3}) paths.push_back(path_of_length(n));
    std::vector<GroundedChain> chains{chain_of_length(5), chain_of_length(5),
                                      chain_of_length(4)};
    const auto report = build_report("q2", paths, chains,
                                     {{"a", "b", "c"}, {"c", "d", "e"}}, false);
    CHECK(report.d_sym == doctest::Approx(3.6));
    CHECK(report.d_ground == doctest::Approx(14.0 / 3.0));
    REQUIRE(report.drop_rate.has_value());
    CHECK(*report.drop_rate == 0.0);
    REQUIRE(report.failure_rate.has_value());
    CHECK(*report.failure_rate == 0.0);
    REQUIRE(report.diversity_jaccard.has_value());
    CHECK(report.n_paths == 5);
    CHECK(report.n_hypotheses == 3);
    CHECK_FALSE(report.abstention);
}

TEST_CASE("build_report on fully collapsed grounding") {
    std::vector<ReasoningPath> paths;
    for (std::size_t n : {4, 3, 3, 4, 3}) paths.push_back(path_of_length(n));
    std::vector<GroundedChain> chains{chain_of_length(0), chain_of_length(0),
                                      chain_of_length(1)};
    const auto report = build_report("q3", paths, chains, {}, true);
    CHECK(report.d_sym == doctest::Approx(3.4));
    CHECK(report.d_ground == 0.0);
    REQUIRE(report.drop_rate.has_value());
    CHECK(*report.drop_rate == 1.0);
    REQUIRE(report.failure_rate.has_value());
    CHECK(*report.failure_rate == 1.0);
    CHECK_FALSE(report.diversity_jaccard.has_value());
    CHECK(report.bridge_attempted);
}

TEST_CASE("build_report abstention and undefined fields") {
    const auto report = build_report("q", {}, {}, {}, false);
    CHECK(report.abstention);
    CHECK_FALSE(report.drop_rate.has_value());
    CHECK_FALSE(report.failure_rate.has_value());
    CHECK(report.d_sym == 0.0);
    CHECK(report.d_ground == 0.0);

    // Paths without hypotheses: drop defined (full loss), failure not.
    const auto partial = build_report("q", {path_of_length(4)}, {}, {}, false);
    CHECK(partial.abstention);
    REQUIRE(partial.drop_rate.has_value());
    CHECK(*partial.drop_rate == 1.0);
    CHECK_FALSE(partial.failure_rate.has_value());
}

TEST_CASE("report json round-trips with nulls and fixed precision") {
    std::vector<ReasoningPath> paths{path_of_length(4), path_of_length(5)};
    std::vector<GroundedChain> chains{chain_of_length(3)};
    const auto report = build_report("q", paths, chains, {}, true);
    const auto j = report.to_json();
    CHECK(j.at("failure_rate").is_number());
    CHECK(j.at("diversity_jaccard").is_null());
    CHECK(BehavioralReport::from_json(j).to_json().dump() == j.dump());

    // Six-decimal rounding is stable under repeated serialization.
    CHECK(j.at("d_sym").get<double>() == 4.5);
    CHECK(j.at("drop_rate").get<double>() == doctest::Approx(1.0 - 3.0 / 4.5));
}

TEST_CASE("report invariants recompute from the inputs") {
    std::mt19937_64 rng(31415);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ReasoningPath> paths;
        const std::size_t np = testsupport::bounded(rng, 5);
        for (std::size_t i = 0; i < np; ++i)
            paths.push_back(path_of_length(2 + testsupport::bounded(rng, 5)));
        std::vector<GroundedChain> chains;
        const std::size_t nc = testsupport::bounded(rng, 5);
        for (std::size_t i = 0; i < nc; ++i)
            chains.push_back(chain_of_length(testsupport::bounded(rng, 6)));
        const auto report = build_report("q", paths, chains, {}, false);

        if (report.d_sym > 0.0) {
            REQUIRE(report.drop_rate.has_value());
            CHECK(*report.drop_rate ==
                  doctest::Approx(std::max(0.0, 1.0 - report.d_ground / report.d_sym)));
        }
        if (nc > 0) {
            std::size_t collapsed = 0;
            for (const auto& c : chains) collapsed += is_collapsed(c) ? 1 : 0;
            REQUIRE(report.failure_rate.has_value());
            CHECK(*report.failure_rate ==
                  doctest::Approx(double(collapsed) / double(nc)));
        } else {
            CHECK(report.abstention);
        }
    }
}
