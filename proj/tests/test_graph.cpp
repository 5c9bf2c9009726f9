#include "opiniond/graph.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <vector>

#include "support/oracles.hpp"

using namespace opiniond;

TEST_CASE("erdos_renyi with k_avg 0 has no edges") {
    Pcg32 rng(1u, 0u);
    AdaptiveGraph g = erdos_renyi(10, 0.0, rng);
    REQUIRE(g.edge_count() == 0);
    REQUIRE(g.check_invariants());
}

TEST_CASE("erdos_renyi with n=2, k_avg=1 is the single edge") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Pcg32 rng = make_stream(seed, 0);
        AdaptiveGraph g = erdos_renyi(2, 1.0, rng);
        REQUIRE(g.edge_count() == 1);
        REQUIRE(g.has_edge(0, 1));
    }
}

TEST_CASE("erdos_renyi rejects invalid parameters") {
    Pcg32 rng(1u, 0u);
    REQUIRE_THROWS_AS(erdos_renyi(1, 0.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(erdos_renyi(10, 9.5, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(erdos_renyi(10, -1.0, rng), std::invalid_argument);
}

TEST_CASE("erdos_renyi mean degree matches the target over 50 seeds") {
    double total_degree = 0.0;
    std::size_t graphs = 50;
    for (std::uint64_t seed = 0; seed < graphs; ++seed) {
        Pcg32 rng = make_stream(seed, 0);
        AdaptiveGraph g = erdos_renyi(1000, 10.0, rng);
        total_degree += 2.0 * static_cast<double>(g.edge_count()) / 1000.0;
    }
    double mean_degree = total_degree / static_cast<double>(graphs);
    REQUIRE(mean_degree > 9.5);
    REQUIRE(mean_degree < 10.5);
}

TEST_CASE("erdos_renyi degree distribution passes chi-square vs binomial") {
    // Pool degrees over seeds and compare against Binomial(n-1, k/(n-1))
    // with tail bins merged so every expected count is at least 5.
    const std::size_t n = 500;
    const double k_avg = 10.0;
    const double p = k_avg / static_cast<double>(n - 1);
    const std::size_t seeds = 20;
    std::map<std::size_t, double> observed_by_degree;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        Pcg32 rng = make_stream(seed, 7);
        AdaptiveGraph g = erdos_renyi(n, k_avg, rng);
        for (NodeId v = 0; v < n; ++v) {
            observed_by_degree[g.degree(v)] += 1.0;
        }
    }
    double total = static_cast<double>(n * seeds);
    // Bins 0..24 individually, 25+ merged; then merge low-expectation bins.
    std::vector<double> observed;
    std::vector<double> expected;
    double obs_acc = 0.0, exp_acc = 0.0;
    for (std::size_t deg = 0; deg <= 25; ++deg) {
        double obs;
        double exp;
        if (deg < 25) {
            obs = observed_by_degree.count(deg) ? observed_by_degree[deg] : 0.0;
            exp = total * oracles::binomial_pmf(deg, n - 1, p);
        } else {
            obs = 0.0;
            for (const auto& [dg, count] : observed_by_degree) {
                if (dg >= 25) {
                    obs += count;
                }
            }
            exp = total;
            for (std::size_t k = 0; k < 25; ++k) {
                exp -= total * oracles::binomial_pmf(k, n - 1, p);
            }
        }
        obs_acc += obs;
        exp_acc += exp;
        if (exp_acc >= 5.0) {
            observed.push_back(obs_acc);
            expected.push_back(exp_acc);
            obs_acc = exp_acc = 0.0;
        }
    }
    if (exp_acc > 0.0) {
        observed.back() += obs_acc;
        expected.back() += exp_acc;
    }
    double stat = oracles::chi_square_statistic(observed, expected);
    double crit = oracles::chi_square_critical(
        static_cast<double>(observed.size() - 1), oracles::kZ99);
    INFO("chi-square " << stat << " critical " << crit);
    REQUIRE(stat < crit);
}

TEST_CASE("random_node on a single node always returns it") {
    AdaptiveGraph g(1);
    Pcg32 rng(3u, 3u);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(random_node(g, rng) == 0u);
    }
}

TEST_CASE("random_node is uniform") {
    AdaptiveGraph g(4);
    Pcg32 rng(11u, 0u);
    std::vector<double> counts(4, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        counts[random_node(g, rng)] += 1.0;
    }
    std::vector<double> expected(4, draws / 4.0);
    double stat = oracles::chi_square_statistic(counts, expected);
    REQUIRE(stat < oracles::chi_square_critical(3.0, oracles::kZ99));
    for (double c : counts) {
        REQUIRE(c / draws == Catch::Approx(0.25).margin(0.01));
    }
}

TEST_CASE("random_node is deterministic under a copied stream") {
    AdaptiveGraph g(1000);
    Pcg32 a = make_stream(5, 0);
    Pcg32 b = make_stream(5, 0);
    REQUIRE(random_node(g, a) == random_node(g, b));
}

TEST_CASE("random_neighbor singleton and isolated cases") {
    AdaptiveGraph g(5);
    g.add_edge(0, 3);
    Pcg32 rng(2u, 2u);
    REQUIRE(random_neighbor(g, 0, rng) == std::optional<NodeId>(3));
    REQUIRE(random_neighbor(g, 4, rng) == std::nullopt);
}

TEST_CASE("random_neighbor is uniform over the neighborhood") {
    AdaptiveGraph g(5);
    for (NodeId v = 1; v <= 4; ++v) {
        g.add_edge(0, v);
    }
    Pcg32 rng(17u, 1u);
    std::map<NodeId, double> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        counts[*random_neighbor(g, 0, rng)] += 1.0;
    }
    for (NodeId v = 1; v <= 4; ++v) {
        REQUIRE(counts[v] / draws == Catch::Approx(0.25).margin(0.01));
    }
}

TEST_CASE("rewire_edge moves an endpoint and keeps the edge count") {
    AdaptiveGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.rewire_edge(0, 1, 2);
    REQUIRE(g.edge_count() == 2);
    REQUIRE(g.has_edge(1, 2));
    REQUIRE(g.has_edge(0, 2));
    REQUIRE_FALSE(g.has_edge(0, 1));
    REQUIRE(g.check_invariants());
}

TEST_CASE("rewire_edge rejects precondition violations") {
    AdaptiveGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    // Complete triangle: every target for 0 is taken or a self-loop.
    REQUIRE_THROWS_AS(g.rewire_edge(0, 1, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(g.rewire_edge(0, 1, 0), std::invalid_argument);
    AdaptiveGraph h(4);
    h.add_edge(0, 1);
    REQUIRE_THROWS_AS(h.rewire_edge(0, 2, 3), std::invalid_argument);
    REQUIRE(h.edge_count() == 1);
}

TEST_CASE("random rewiring sequences preserve all graph invariants") {
    Pcg32 rng = make_stream(123, 0);
    AdaptiveGraph g = erdos_renyi(60, 8.0, rng);
    std::size_t edges_before = g.edge_count();
    std::size_t performed = 0;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        NodeId a = random_node(g, rng);
        auto old_peer = random_neighbor(g, a, rng);
        if (!old_peer) {
            continue;
        }
        NodeId fresh = random_node(g, rng);
        if (fresh == a || g.has_edge(a, fresh)) {
            continue;
        }
        g.rewire_edge(a, *old_peer, fresh);
        ++performed;
        REQUIRE(g.edge_count() == edges_before);
    }
    REQUIRE(performed > 500);
    REQUIRE(g.check_invariants());
}

TEST_CASE("edge list export is canonical") {
    AdaptiveGraph g(4);
    g.add_edge(2, 1);
    g.add_edge(3, 0);
    g.add_edge(0, 1);
    std::ostringstream os;
    g.write_edge_list(os);
    REQUIRE(os.str() == "0 1\n0 3\n1 2\n");
}
