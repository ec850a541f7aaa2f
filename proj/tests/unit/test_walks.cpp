#include <doctest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "phenolink/alias.hpp"
#include "phenolink/error.hpp"
#include "phenolink/walks.hpp"

using namespace phenolink;

TEST_CASE("single category alias table") {
    const std::vector<double> w{2.5};
    AliasTable t(w);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(t.sample(rng) == 0);
}

TEST_CASE("alias weights 1:3") {
    const std::vector<double> w{1, 3};
    AliasTable t(w);
    Rng rng(2);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += t.sample(rng) == 1;
    CHECK(std::abs(ones / double(n) - 0.75) <= 0.01);
}

TEST_CASE("uniform alias table passes chi square") {
    const std::vector<double> w{1, 1, 1, 1};
    AliasTable t(w);
    Rng rng(3);
    const int n = 100000;
    std::vector<int> c(4);
    for (int i = 0; i < n; ++i) ++c[t.sample(rng)];
    double chi = 0;
    for (int k : c) chi += (k - n / 4.0) * (k - n / 4.0) / (n / 4.0);
    CHECK(chi < 16.266);  // df 3, alpha 0.001
}

TEST_CASE("alias reconstruction matches normalized weights") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(1 + gen() % 30);
        double sum = 0;
        for (auto& x : w) sum += x = (gen() % 4 == 0) ? 0.0 : u(gen);
        if (sum == 0) continue;
        const auto r = AliasTable(w).reconstruct();
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(r[i] == doctest::Approx(w[i] / sum).epsilon(1e-12));
    }
}

TEST_CASE("p = q = 1 tables are uniform") {
    std::mt19937_64 gen(9);
    const Graph g = Graph::from_edges(20, oracle::random_edges(20, 0.3, gen));
    for (NodeId t = 0; t < 20; ++t) {
        for (NodeId v : g.neighbors(t)) {
            for (double p : transition_probabilities(g, t, v, 1, 1)) CHECK(p == doctest::Approx(1.0 / g.degree(v)));
        }
    }
}

TEST_CASE("path with p = 0.5, q = 2") {
    const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
    const auto pr = transition_probabilities(g, 0, 1, 0.5, 2.0);
    REQUIRE(pr.size() == 2);
    CHECK(pr[0] == doctest::Approx(0.8));
    CHECK(pr[1] == doctest::Approx(0.2));
    const auto tables = build_transition_tables(g, 0.5, 2.0);
    const auto arc = g.arc_index(0, 1);
    std::vector<double> w(2);
    // reconstruct from the alias table
    const auto prob = tables.prob_of(arc);
    const auto alias = tables.alias_of(arc);
    for (std::size_t i = 0; i < 2; ++i) {
        w[i] += prob[i] / 2;
        w[alias[i]] += (1 - prob[i]) / 2;
    }
    CHECK(w[0] == doctest::Approx(0.8));
    CHECK(w[1] == doctest::Approx(0.2));
}

TEST_CASE("triangle weights") {
    const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}});
    // from 1 after 0: candidates 0 (return, 1/p) and 2 (common neighbor, 1)
    CHECK(transition_weight(g, 0, 0, 4.0, 0.25) == doctest::Approx(0.25));
    CHECK(transition_weight(g, 0, 2, 4.0, 0.25) == doctest::Approx(1.0));
    const auto pr = transition_probabilities(g, 0, 1, 4.0, 0.25);
    CHECK(pr[0] == doctest::Approx(0.2));
    CHECK(pr[1] == doctest::Approx(0.8));
}

TEST_CASE("parallel tables equal serial tables") {
    std::mt19937_64 gen(6);
    const Graph g = Graph::from_edges(60, oracle::random_edges(60, 0.15, gen));
    const auto a = build_transition_tables(g, 0.5, 2.0);
    const auto b = build_transition_tables_serial(g, 0.5, 2.0);
    CHECK(a.table_offset == b.table_offset);
    CHECK(a.prob == b.prob);
    CHECK(a.alias == b.alias);
}

TEST_CASE("two node graph alternates") {
    const Graph g = Graph::from_edges(2, std::vector<Edge>{{0, 1}});
    WalkConfig cfg;
    cfg.walk_length = 4;
    cfg.walks_per_node = 5;
    const auto corpus = generate_walks(g, build_transition_tables(g, 1, 1), cfg);
    CHECK(corpus.walk_count() == 10);
    for (std::size_t i = 0; i < corpus.walk_count(); ++i) {
        const auto w = corpus.walk(i);
        REQUIRE(w.size() == 4);
        for (std::size_t k = 1; k < 4; ++k) CHECK(w[k] != w[k - 1]);
    }
}

TEST_CASE("corpus shape on a 5 node path") {
    const Graph g = Graph::from_edges(5, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    WalkConfig cfg;
    const auto corpus = generate_walks(g, build_transition_tables(g, 1, 1), cfg);
    CHECK(corpus.walk_count() == 1000);
    for (std::size_t i = 0; i < corpus.walk_count(); ++i) {
        CHECK(corpus.walk(i).size() == 30);
        CHECK(corpus.walk(i)[0] == i % 5);
    }
}

TEST_CASE("walks follow edges and match the serial generator") {
    std::mt19937_64 gen(12);
    const Graph g = Graph::from_edges(40, oracle::random_connected_edges(40, 30, gen));
    WalkConfig cfg;
    cfg.walk_length = 12;
    cfg.walks_per_node = 7;
    cfg.return_parameter = 0.7;
    cfg.inout_parameter = 3.0;
    cfg.seed = 99;
    const auto tables = build_transition_tables(g, 0.7, 3.0);
    const auto a = generate_walks(g, tables, cfg);
    const auto b = generate_walks_serial(g, tables, cfg);
    CHECK(a.nodes == b.nodes);
    CHECK(a.offsets == b.offsets);
    for (std::size_t i = 0; i < a.walk_count(); ++i) {
        const auto w = a.walk(i);
        for (std::size_t k = 1; k < w.size(); ++k) CHECK(g.has_edge(w[k - 1], w[k]));
    }
    cfg.seed = 100;
    CHECK(generate_walks(g, tables, cfg).nodes != a.nodes);
}

TEST_CASE("isolated start node gives a one node walk") {
    const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
    WalkConfig cfg;
    cfg.walk_length = 5;
    cfg.walks_per_node = 1;
    const auto corpus = generate_walks(g, build_transition_tables(g, 1, 1), cfg);
    CHECK(corpus.walk(2).size() == 1);
}

TEST_CASE("walk config validation") {
    WalkConfig c;
    c.return_parameter = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    WalkConfig d;
    d.walk_length = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
}
