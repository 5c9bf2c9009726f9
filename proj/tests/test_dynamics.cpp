#include "opiniond/dynamics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "support/oracles.hpp"

using namespace opiniond;

namespace {

ModelParams desk_params() {
    ModelParams params;
    params.n = 200;
    params.k_avg = 8.0;
    params.d = 0.25;
    params.mu = 0.5;
    params.w = 0.5;
    params.p = 0.1;
    return params;
}

}  // namespace

TEST_CASE("consensus_update midpoint at mu = 1/2") {
    auto [a, b] = consensus_update(0.2, 0.4, 0.5, 0.25);
    REQUIRE(a == Catch::Approx(0.3).epsilon(1e-14));
    REQUIRE(b == Catch::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("consensus_update keeps dissenting opinions unchanged") {
    auto [a, b] = consensus_update(0.1, 0.9, 0.5, 0.25);
    REQUIRE(a == 0.1);
    REQUIRE(b == 0.9);
}

TEST_CASE("consensus_update with mu = 0.3") {
    auto [a, b] = consensus_update(0.2, 0.4, 0.3, 0.25);
    REQUIRE(a == Catch::Approx(0.26).epsilon(1e-14));
    REQUIRE(b == Catch::Approx(0.34).epsilon(1e-14));
}

TEST_CASE("consensus_update conserves the pair sum and contracts the gap") {
    Pcg32 rng = make_stream(31, 0);
    for (int i = 0; i < 2000; ++i) {
        double oa = rng.uniform01();
        double ob = rng.uniform01();
        double mu = 0.5 * rng.uniform01();
        if (mu == 0.0) {
            mu = 0.25;
        }
        double d = rng.uniform01();
        if (d == 0.0) {
            d = 0.5;
        }
        auto [na, nb] = consensus_update(oa, ob, mu, d);
        REQUIRE(std::fabs((na + nb) - (oa + ob)) < 1e-12);
        REQUIRE(na >= 0.0);
        REQUIRE(na <= 1.0);
        REQUIRE(nb >= 0.0);
        REQUIRE(nb <= 1.0);
        if (std::fabs(oa - ob) < d) {
            REQUIRE(std::fabs(na - nb) ==
                    Catch::Approx((1.0 - 2.0 * mu) * std::fabs(oa - ob)).margin(1e-12));
        } else {
            REQUIRE(na == oa);
            REQUIRE(nb == ob);
        }
    }
}

TEST_CASE("attempt_rewire with w=0 never rewires") {
    ModelParams params = desk_params();
    Pcg32 rng = make_stream(41, 0);
    SimState state = make_initial_state(params, rng);
    state.opinions[0] = 0.0;
    state.opinions[1] = 1.0;
    if (!state.graph.has_edge(0, 1)) {
        state.graph.add_edge(0, 1);
    }
    for (int i = 0; i < 100; ++i) {
        StepOutcome outcome = attempt_rewire(state, 0, 1, 0.0, params.d, rng);
        REQUIRE(outcome.interaction == InteractionKind::RejectedNoRewire);
        REQUIRE(state.graph.has_edge(0, 1));
    }
}

TEST_CASE("attempt_rewire with w=1 and a single candidate is forced") {
    AdaptiveGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    std::vector<double> opinions = {0.1, 0.9, 0.12, 0.95};
    SimState state(std::move(g), std::move(opinions));
    // Candidates for node 0: node 2 (similar, not adjacent). Node 3 is out
    // of tolerance.
    Pcg32 rng = make_stream(42, 0);
    std::size_t edges_before = state.graph.edge_count();
    StepOutcome outcome = attempt_rewire(state, 0, 1, 1.0, 0.25, rng);
    REQUIRE(outcome.interaction == InteractionKind::Rewired);
    REQUIRE(state.graph.has_edge(0, 2));
    REQUIRE_FALSE(state.graph.has_edge(0, 1));
    REQUIRE(state.graph.edge_count() == edges_before);
    REQUIRE(state.graph.check_invariants());
}

TEST_CASE("attempt_rewire with no candidate keeps the edge") {
    AdaptiveGraph g(3);
    g.add_edge(0, 1);
    std::vector<double> opinions = {0.1, 0.9, 0.95};
    SimState state(std::move(g), std::move(opinions));
    // No node within d of opinion 0.1 outside the neighborhood of 0.
    Pcg32 rng = make_stream(43, 0);
    for (std::uint32_t probe_limit : {std::uint32_t{50}, std::uint32_t{0}}) {
        StepOutcome outcome = attempt_rewire(state, 0, 1, 1.0, 0.25, rng, probe_limit);
        REQUIRE(outcome.interaction == InteractionKind::RejectedNoRewire);
        REQUIRE(state.graph.has_edge(0, 1));
        REQUIRE(state.graph.edge_count() == 1);
    }
}

TEST_CASE("attempt_rewire validates its preconditions") {
    AdaptiveGraph g(3);
    g.add_edge(0, 1);
    std::vector<double> opinions = {0.5, 0.55, 0.9};
    SimState state(std::move(g), std::move(opinions));
    Pcg32 rng(1u, 1u);
    REQUIRE_THROWS_AS(attempt_rewire(state, 0, 2, 1.0, 0.25, rng),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(attempt_rewire(state, 0, 1, 1.0, 0.25, rng),
                      std::invalid_argument);
}

TEST_CASE("mutate honors the probability gate") {
    ModelParams params = desk_params();
    Pcg32 rng = make_stream(51, 0);
    SimState state = make_initial_state(params, rng);
    std::vector<double> before = state.opinions;
    REQUIRE(mutate(state, 0.0, params.basal, rng) == std::nullopt);
    REQUIRE(state.opinions == before);
    auto mutated = mutate(state, 1.0, params.basal, rng);
    REQUIRE(mutated.has_value());
    REQUIRE(state.opinions[*mutated] >= 0.0);
    REQUIRE(state.opinions[*mutated] <= 1.0);
}

TEST_CASE("mutated opinions follow the basal distribution (KS oracle)") {
    ModelParams params = desk_params();
    params.basal = DistributionSpec::power_law(3.0, 0.01);
    Pcg32 rng = make_stream(54, 0);
    SimState state = make_initial_state(params, rng);
    const std::size_t draws = 100000;
    std::vector<double> values;
    values.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        auto m = mutate(state, 1.0, params.basal, rng);
        REQUIRE(m.has_value());
        values.push_back(state.opinions[*m]);
    }
    double ks = oracles::ks_statistic(values, [&](double x) {
        if (x <= 0.01) return 0.0;
        if (x >= 1.0) return 1.0;
        double a = std::pow(0.01, -2.0);
        return (a - std::pow(x, -2.0)) / (a - 1.0);
    });
    REQUIRE(ks < oracles::ks_critical_value(draws, 0.01));
}

TEST_CASE("step with identical opinions and w=p=0 is a fixed point") {
    ModelParams params = desk_params();
    params.w = 0.0;
    params.p = 0.0;
    Pcg32 rng = make_stream(61, 0);
    AdaptiveGraph g = erdos_renyi(params.n, params.k_avg, rng);
    std::vector<double> opinions(params.n, 0.42);
    SimState state(std::move(g), std::move(opinions));
    for (int i = 0; i < 2000; ++i) {
        StepOutcome outcome = step(state, params, rng);
        if (outcome.interaction != InteractionKind::IsolatedNode) {
            REQUIRE(outcome.interaction == InteractionKind::Consensus);
        }
        REQUIRE_FALSE(outcome.mutated.has_value());
    }
    for (double o : state.opinions) {
        REQUIRE(o == 0.42);
    }
}

TEST_CASE("step on an edgeless graph without mutation freezes the state") {
    ModelParams params = desk_params();
    params.k_avg = 0.0;
    params.p = 0.0;
    Pcg32 rng = make_stream(62, 0);
    SimState state = make_initial_state(params, rng);
    std::vector<double> before = state.opinions;
    for (int i = 0; i < 1000; ++i) {
        StepOutcome outcome = step(state, params, rng);
        REQUIRE(outcome.interaction == InteractionKind::IsolatedNode);
    }
    REQUIRE(state.opinions == before);
    REQUIRE(state.step_count == 1000);
}

TEST_CASE("step sequences are deterministic given the seed") {
    ModelParams params = desk_params();
    Pcg32 rng1 = make_stream(63, 0);
    Pcg32 rng2 = make_stream(63, 0);
    SimState s1 = make_initial_state(params, rng1);
    SimState s2 = make_initial_state(params, rng2);
    for (int i = 0; i < 5000; ++i) {
        StepOutcome o1 = step(s1, params, rng1);
        StepOutcome o2 = step(s2, params, rng2);
        REQUIRE(o1 == o2);
    }
    REQUIRE(s1.opinions == s2.opinions);
    REQUIRE(s1.graph.edges() == s2.graph.edges());
}

TEST_CASE("step keeps opinions in range and the edge count constant") {
    ModelParams params = desk_params();
    params.basal = DistributionSpec::power_law(3.0, 0.01);
    Pcg32 rng = make_stream(64, 0);
    SimState state = make_initial_state(params, rng);
    std::size_t edges = state.graph.edge_count();
    for (int i = 0; i < 20000; ++i) {
        step(state, params, rng);
    }
    REQUIRE(state.graph.edge_count() == edges);
    REQUIRE(state.graph.check_invariants());
    for (double o : state.opinions) {
        REQUIRE(o >= 0.0);
        REQUIRE(o <= 1.0);
    }
}

TEST_CASE("without mutation the opinion sum is conserved over many steps") {
    ModelParams params = desk_params();
    params.p = 0.0;
    Pcg32 rng = make_stream(65, 0);
    SimState state = make_initial_state(params, rng);
    double sum_before =
        std::accumulate(state.opinions.begin(), state.opinions.end(), 0.0);
    for (int i = 0; i < 100000; ++i) {
        step(state, params, rng);
    }
    double sum_after =
        std::accumulate(state.opinions.begin(), state.opinions.end(), 0.0);
    REQUIRE(std::fabs(sum_after - sum_before) < 1e-6);
}

TEST_CASE("interacting mutation target hits the step's primary node") {
    ModelParams params = desk_params();
    params.p = 1.0;
    StepOptions options;
    options.mutation_target = MutationTarget::Interacting;
    Pcg32 rng = make_stream(66, 0);
    SimState state = make_initial_state(params, rng);
    for (int i = 0; i < 200; ++i) {
        Pcg32 probe = rng;  // replay the first draw of the step
        NodeId expected_a = random_node(state.graph, probe);
        StepOutcome outcome = step(state, params, rng, options);
        REQUIRE(outcome.mutated == std::optional<NodeId>(expected_a));
    }
}

TEST_CASE("run with zero steps emits the pristine initial snapshot") {
    ModelParams params = desk_params();
    params.initial = DistributionSpec::power_law(3.0, 0.01);
    Pcg32 rng = make_stream(71, 0);
    auto snapshots = run(params, 0, {0}, rng);
    REQUIRE(snapshots.size() == 1);
    REQUIRE(snapshots[0].step == 0);
    REQUIRE(snapshots[0].opinions.size() == params.n);
    for (double o : snapshots[0].opinions) {
        REQUIRE(o >= 0.01);
        REQUIRE(o <= 1.0);
    }
}

TEST_CASE("run snapshots land on the exact scheduled steps") {
    ModelParams params = desk_params();
    Pcg32 rng = make_stream(72, 0);
    std::vector<std::uint64_t> schedule = {0, 50, 150, 1500};
    auto snapshots = run(params, 1500, schedule, rng);
    REQUIRE(snapshots.size() == 4);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        REQUIRE(snapshots[i].step == schedule[i]);
    }
}

TEST_CASE("run rejects bad schedules") {
    ModelParams params = desk_params();
    Pcg32 rng = make_stream(73, 0);
    REQUIRE_THROWS_AS(run(params, 10, {0, 11}, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(run(params, 10, {1, 5}, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(run(params, 10, {}, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(run(params, 10, {0, 5, 5}, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(run(params, 10, {0, 7, 5}, rng), std::invalid_argument);
}

TEST_CASE("run is bit-reproducible for a fixed seed") {
    ModelParams params = desk_params();
    Pcg32 rng1 = make_stream(74, 0);
    Pcg32 rng2 = make_stream(74, 0);
    std::vector<std::uint64_t> schedule = {0, 100, 1000};
    auto s1 = run(params, 1000, schedule, rng1);
    auto s2 = run(params, 1000, schedule, rng2);
    REQUIRE(s1 == s2);
}
