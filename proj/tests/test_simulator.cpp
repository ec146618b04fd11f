#include "aoi/simulator.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aoi;

namespace {

SystemParams defaults(int es) {
    auto p = default_params();
    p.sampling_cost_quanta = es;
    return p;
}

}  // namespace

TEST_CASE("initial state") {
    const auto m = TransitionModel::from_params(defaults(3));
    CHECK(default_initial_state(m) == State{9, 1, 1, 5, 5});
}

TEST_CASE("rollouts are reproducible per seed") {
    const auto m = TransitionModel::from_params(defaults(3));
    const auto sol = relative_value_iteration(m);
    const State s0 = default_initial_state(m);
    const auto a = rollout(sol.policy, m, s0, 20000, 42);
    const auto b = rollout(sol.policy, m, s0, 20000, 42);
    const auto c = rollout(sol.policy, m, s0, 20000, 43);
    CHECK(a.mean_aoi == b.mean_aoi);
    CHECK(a.ci_half_width == b.ci_half_width);
    CHECK(a.action_frequencies == b.action_frequencies);
    CHECK(a.mean_aoi != c.mean_aoi);
    CHECK(a.seed == 42u);
    CHECK(a.slots_simulated == 20000);
    double total = 0.0;
    for (double f : a.action_frequencies) total += f;
    CHECK(total == doctest::Approx(1.0));
    CHECK(a.min_battery >= 0);
}

TEST_CASE("never delivering drives the AoI to its cap") {
    const auto m = TransitionModel::from_params(defaults(3));
    const Policy idle{std::vector<Action>(m.size(), kIdleHarvest)};
    const auto st = rollout(idle, m, default_initial_state(m), 5000, 1);
    CHECK(st.mean_aoi == 10.0);
    CHECK(st.action_frequencies[0] == 1.0);
    CHECK(st.ci_half_width == 0.0);
    CHECK(st.mean_battery == 9.0);
}

TEST_CASE("infeasible actions are reported with the state") {
    const auto m = TransitionModel::from_params(defaults(3));
    const Policy greedy{std::vector<Action>(m.size(), kSampleTransmit)};
    try {
        rollout(greedy, m, {0, 1, 1, 5, 5}, 10, 1);
        FAIL("expected ContractViolation");
    } catch (const ContractViolation& e) {
        CHECK(std::string(e.what()).find("B=0") != std::string::npos);
    }
    CHECK_THROWS_AS(rollout(greedy, m, {0, 11, 1, 5, 5}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(rollout(greedy, m, {0, 1, 1, 5, 5}, 0, 1), std::invalid_argument);
}

TEST_CASE("single-level chains match their exact stationary average") {
    std::mt19937_64 rng(314);
    int tested = 0;
    for (int attempt = 0; attempt < 200 && tested < 8; ++attempt) {
        auto inst = oracle::random_tiny_instance(rng);
        if (inst.levels() != 1) continue;
        ++tested;
        const oracle::TinyMdp mdp(inst);
        const auto m = oracle::to_model(inst);
        const auto sol = relative_value_iteration(m);
        const State s0 = default_initial_state(m);
        const double exact =
            oracle::policy_gain(mdp, oracle::to_tiny_policy(sol.policy, m, mdp), mdp.index({s0.battery, 1, 1, 1, 1}));
        const auto st = rollout(sol.policy, m, s0, 200000, 9);
        CHECK(std::abs(st.mean_aoi - exact) <= std::max(3.0 * st.ci_half_width, 1e-12));
    }
    CHECK(tested == 8);
}

TEST_CASE("two-level chain within the batch-means interval") {
    oracle::TinyInstance inst;
    inst.b_max = 2;
    inst.aoi_max = inst.tau_max = 3;
    inst.sampling_cost = 1;
    inst.prob = {0.3, 0.7};
    inst.tx = {std::nullopt, 1};
    inst.harvest = {0, 1};
    const oracle::TinyMdp mdp(inst);
    const auto m = oracle::to_model(inst);
    const auto sol = relative_value_iteration(m);
    const double exact = oracle::policy_gain(mdp, oracle::to_tiny_policy(sol.policy, m, mdp), 0);
    CHECK(exact == doctest::Approx(sol.values.rho).epsilon(1e-6));
    const auto st = rollout(sol.policy, m, {2, 1, 1, 1, 1}, 400000, 2024);
    CHECK(st.ci_half_width > 0.0);
    CHECK(std::abs(st.mean_aoi - exact) <= 3.0 * st.ci_half_width);
}

TEST_CASE("generate-at-will baseline") {
    SUBCASE("free sampling and free packets") {
        auto p = defaults(0);
        p.packet_bits = 0.0;
        const auto base = solve_generate_at_will(p, {1e-12});
        CHECK(base.rho() == doctest::Approx(2.0).epsilon(1e-9));
        const auto joint = relative_value_iteration(TransitionModel::from_params(p), {1e-12});
        CHECK(joint.values.rho == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(base.solution.policy.provenance == Provenance::Baseline);
    }
    SUBCASE("only (I,H) and (S,T) are used") {
        const auto base = solve_generate_at_will(defaults(3));
        for (const auto a : base.solution.policy.actions) CHECK((a == kIdleHarvest || a == kSampleTransmit));
        CHECK(base.model.allowed_actions() == kGenerateAtWillActions);
    }
    SUBCASE("tiny instances: enumeration over the restricted class and dominance") {
        std::mt19937_64 rng(8);
        int tested = 0;
        for (int attempt = 0; attempt < 400 && tested < 10; ++attempt) {
            auto inst = oracle::random_tiny_instance(rng);
            const auto joint_model = oracle::to_model(inst);
            const auto base = solve_generate_at_will(joint_model);
            inst.allowed = 0b1001;
            const oracle::TinyMdp mdp(inst);
            const int start = mdp.index({inst.b_max, 1, 1, 1, 1});
            const auto best = oracle::enumerate_optimal_gain(mdp, start, 5000);
            if (!best) continue;
            ++tested;
            CHECK(base.rho() == doctest::Approx(best->best_gain).epsilon(2e-6));
            const auto joint = relative_value_iteration(joint_model);
            CHECK(joint.values.rho <= base.rho() + 2e-6);
            const double greedy = oracle::policy_gain(
                mdp, oracle::to_tiny_policy(greedy_transmit_policy(base.model), base.model, mdp), start);
            CHECK(base.rho() <= greedy + 2e-6);
        }
        CHECK(tested == 10);
    }
}

TEST_CASE("sweeps") {
    SweepSettings settings;
    settings.with_baseline = false;
    CHECK(sweep(defaults(3), SweepAxis::PacketBits, {}, settings).empty());

    const auto single = sweep(defaults(3), SweepAxis::PacketBits, {12e6}, settings);
    REQUIRE(single.size() == 1u);
    CHECK(single[0].error.empty());
    CHECK(single[0].rho_joint.has_value());
    CHECK_FALSE(single[0].rho_baseline.has_value());
    CHECK_FALSE(single[0].sim_joint.has_value());

    const auto es_rows = sweep(defaults(3), SweepAxis::SamplingCost, {0, 1, 2, 3, 4, 5, 6}, settings);
    for (std::size_t i = 1; i < es_rows.size(); ++i) {
        REQUIRE(es_rows[i].rho_joint.has_value());
        CHECK(*es_rows[i].rho_joint >= *es_rows[i - 1].rho_joint - 2e-6);
    }

    const auto failing = sweep(defaults(3), SweepAxis::SamplingCost, {50, 2.5, 3}, settings);
    REQUIRE(failing.size() == 3u);
    CHECK_FALSE(failing[0].error.empty());
    CHECK_FALSE(failing[1].error.empty());
    CHECK(failing[2].error.empty());

    settings.with_baseline = true;
    settings.sim_slots = 5000;
    const auto full = sweep(defaults(3), SweepAxis::PacketBits, {6e6}, settings);
    REQUIRE(full[0].sim_baseline.has_value());
    CHECK(*full[0].rho_joint <= *full[0].rho_baseline);

    CHECK(parse_sweep_axis("M") == SweepAxis::PacketBits);
    CHECK(parse_sweep_axis("sampling_cost_quanta") == SweepAxis::SamplingCost);
    CHECK_THROWS_AS(parse_sweep_axis("distance"), std::invalid_argument);
    CHECK(with_axis_value(defaults(3), SweepAxis::SamplingCost, 5).sampling_cost() == 5);
}
