#include "opiniond/experiments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "opiniond/config.hpp"

using namespace opiniond;

TEST_CASE("ex2 preset carries the published snapshot schedule") {
    Scenario s = preset("ex2-powerlaw");
    std::vector<std::uint64_t> expected = {0,        100000,  500000,
                                           2000000,  10000000, 30000000};
    REQUIRE(s.snapshot_schedule == expected);
    REQUIRE(s.params.d == 0.1);
    REQUIRE(s.params.p == 0.001);
    REQUIRE(s.params.n == 10000);
    REQUIRE(s.params.k_avg == 20.0);
    REQUIRE(s.params.initial == DistributionSpec::power_law(3.0, 0.01));
    REQUIRE(s.params.basal == DistributionSpec::uniform());
}

TEST_CASE("fig1-b preset parameters") {
    Scenario s = preset("fig1-b");
    REQUIRE(s.params.d == 0.25);
    REQUIRE(s.params.p == 0.01);
    REQUIRE(s.params.w == 0.5);
    REQUIRE(s.params.n == 1000);
    REQUIRE(s.params.k_avg == 10.0);
}

TEST_CASE("nonoise baseline has p = 0") {
    REQUIRE(preset("nonoise-baseline").params.p == 0.0);
}

TEST_CASE("fig5 swap presets exchange initial and basal") {
    Scenario a = preset("fig5-swap-a");
    REQUIRE(a.params.initial == DistributionSpec::power_law(3.0, 0.01));
    REQUIRE(a.params.basal == DistributionSpec::uniform());
    Scenario b = preset("fig5-swap-b");
    REQUIRE(b.params.initial == DistributionSpec::uniform());
    REQUIRE(b.params.basal == DistributionSpec::power_law(3.0, 0.01));
}

TEST_CASE("unknown presets are rejected") {
    REQUIRE_THROWS_AS(preset("fig1-z"), std::invalid_argument);
}

TEST_CASE("desk scaling preserves probabilities and shrinks steps with n") {
    for (const std::string& name : preset_names()) {
        Scenario full = preset(name, Scale::Full);
        Scenario desk = preset(name, Scale::Desk);
        REQUIRE(desk.params.n == 1000);
        REQUIRE(desk.params.d == full.params.d);
        REQUIRE(desk.params.mu == full.params.mu);
        REQUIRE(desk.params.w == full.params.w);
        REQUIRE(desk.params.p == full.params.p);
        REQUIRE(desk.params.initial == full.params.initial);
        REQUIRE(desk.params.basal == full.params.basal);
        if (full.params.n == 1000) {
            REQUIRE(desk.total_steps == full.total_steps);
        } else {
            double factor = 1000.0 / static_cast<double>(full.params.n);
            REQUIRE(desk.total_steps ==
                    static_cast<std::uint64_t>(
                        std::llround(static_cast<double>(full.total_steps) * factor)));
        }
        REQUIRE(desk.snapshot_schedule.front() == 0);
        REQUIRE(desk.snapshot_schedule.back() <= desk.total_steps);
    }
}

TEST_CASE("preset parameters round-trip through config serialization") {
    for (const std::string& name : preset_names()) {
        for (Scale scale : {Scale::Full, Scale::Desk}) {
            Scenario s = preset(name, scale);
            RunConfig config = run_config_from_scenario(s, 7);
            RunConfig reparsed = parse_config(serialize_config(config));
            REQUIRE(reparsed == config);
        }
    }
}

TEST_CASE("run_comparison rejects scenarios with mismatched shared fields") {
    Scenario a = preset("fig1-a");
    Scenario b = preset("fig1-b");  // differs in p
    REQUIRE_THROWS_AS(run_comparison(a, b, {1, 2}), std::invalid_argument);
    REQUIRE_THROWS_AS(run_comparison(a, a, {}), std::invalid_argument);
}

TEST_CASE("comparing a scenario against itself matches the baseline") {
    // Identical ensembles: the cross distance and cross-seed baseline are
    // draws from the same distribution, so their means must agree within a
    // few baseline standard deviations.
    Scenario s = preset("fig1-a", Scale::Desk);
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6};
    ComparisonReport report = run_comparison(s, s, seeds);
    REQUIRE(report.cross.count == seeds.size() * seeds.size());
    REQUIRE(report.baseline.count == seeds.size() * (seeds.size() - 1));
    double tolerance = 3.0 * report.baseline.stddev + 1e-9;
    REQUIRE(std::fabs(report.cross.mean - report.baseline.mean) < tolerance);
}

TEST_CASE("steady state policy follows the N/p rule") {
    ModelParams params = preset("fig1-a").params;
    SteadyStatePolicy policy = SteadyStatePolicy::for_params(params);
    REQUIRE(policy.detector_spacing == 10000);  // N/p = 1000/0.1
    REQUIRE(policy.avg_spacing == 1000);        // N/(10p)
    REQUIRE(policy.window == 5);
    REQUIRE(policy.detector_bins == 5);
    REQUIRE(policy.bins == 20);

    params.p = 0.0;
    SteadyStatePolicy frozen = SteadyStatePolicy::for_params(params);
    REQUIRE(frozen.detector_spacing == 10000);
    REQUIRE(frozen.max_steps == 1000000);
}

TEST_CASE("the detector fires by 5 N/p on a noisy desk-scale run") {
    ModelParams params = preset("fig1-a").params;
    SteadyStatePolicy policy = SteadyStatePolicy::for_params(params);
    policy.max_steps = 5 * policy.detector_spacing;
    Pcg32 rng = make_stream(1, 0);
    SteadyStateResult result = run_to_steady_state(params, rng, policy);
    REQUIRE(result.fired);
    REQUIRE(result.fired_at <= 50000);
    REQUIRE(result.averaged.bins == 20);
}
