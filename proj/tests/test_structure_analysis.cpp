#include "aoi/structure_analysis.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace aoi;

namespace {

TransitionModel default_model(int es) {
    auto p = default_params();
    p.sampling_cost_quanta = es;
    return TransitionModel::from_params(p);
}

using Key = std::tuple<int, int, int, int, int, int>;  // lower state + variable

Key key_of(const State& s, StateVariable v) {
    return {s.battery, s.aoi, s.tau, s.h_level, s.g_level, static_cast<int>(v)};
}

// Independent neighbour-pair scan.
std::set<Key> brute_value_violations(const ValueTable& v, const TransitionModel& m, double slack) {
    std::set<Key> out;
    const auto& d = m.dims();
    const int L = m.space().channel_levels();
    auto val = [&](int b, int a, int t, int h, int g) { return v.values[m.space().index({b, a, t, h, g})]; };
    for (int b = 0; b <= d.b_max; ++b)
        for (int a = 1; a <= d.aoi_max; ++a)
            for (int t = 1; t <= d.tau_max; ++t)
                for (int h = 1; h <= L; ++h)
                    for (int g = 1; g <= L; ++g) {
                        const double x = val(b, a, t, h, g);
                        if (b < d.b_max && val(b + 1, a, t, h, g) > x + slack)
                            out.insert(key_of({b, a, t, h, g}, StateVariable::Battery));
                        if (a < d.aoi_max && val(b, a + 1, t, h, g) < x - slack)
                            out.insert(key_of({b, a, t, h, g}, StateVariable::Aoi));
                        if (t < d.tau_max && val(b, a, t + 1, h, g) < x - slack)
                            out.insert(key_of({b, a, t, h, g}, StateVariable::Tau));
                        if (h < L && val(b, a, t, h + 1, g) > x + slack)
                            out.insert(key_of({b, a, t, h, g}, StateVariable::Uplink));
                        if (g < L && val(b, a, t, h, g + 1) > x + slack)
                            out.insert(key_of({b, a, t, h, g}, StateVariable::Downlink));
                    }
    return out;
}

std::set<Key> reported(const StructureReport& r) {
    std::set<Key> out;
    for (const auto& v : r.value_violations) out.insert(key_of(v.lower, v.variable));
    return out;
}

// Independent family-level count of threshold violations (no value table, so no ties).
std::size_t brute_policy_violations(const Policy& p, const TransitionModel& m) {
    const auto& d = m.dims();
    const auto& q = m.quantizer();
    const int L = m.space().channel_levels();
    auto act = [&](int b, int a, int t, int h, int g) { return p[m.space().index({b, a, t, h, g})]; };
    std::size_t bad = 0;
    for (int b1 = 0; b1 <= d.b_max; ++b1)
        for (int a = 1; a <= d.aoi_max; ++a)
            for (int t = 1; t <= d.tau_max; ++t)
                for (int h = 1; h <= L; ++h)
                    for (int g = 1; g <= L; ++g) {
                        const Action x = act(b1, a, t, h, g);
                        const int he = std::min(q.harvest_quanta(g), d.b_max);
                        for (int b2 = 0; b2 < b1; ++b2) {
                            const Action y = act(b2, a, t, h, g);
                            if (x == kIdleHarvest && b2 >= d.b_max - he && y != kIdleHarvest) ++bad;
                            if (!x.transmits() && b2 >= d.b_max - he + d.sampling_cost && y.transmits()) ++bad;
                        }
                        for (int a2 = a + 1; a2 <= d.aoi_max; ++a2)
                            if (x.transmits() && !act(b1, a2, t, h, g).transmits()) ++bad;
                        for (int t2 = t + 1; t2 <= d.tau_max; ++t2)
                            if (x.samples() && !act(b1, a, t2, h, g).samples()) ++bad;
                    }
    return bad;
}

}  // namespace

TEST_CASE("constant values are monotone") {
    const auto m = default_model(3);
    ValueTable v;
    v.values.assign(m.size(), 4.25);
    const auto r = check_value_monotonicity(v, m, 1e-6);
    CHECK(r.pass());
    CHECK(r.value_pairs_checked == 5u * 100000u - 5u * 10000u);
}

TEST_CASE("unconverged values are rejected") {
    const auto m = default_model(3);
    ValueTable v;
    v.values.assign(m.size(), 0.0);
    v.final_span = 1e-3;
    CHECK_THROWS_AS(check_value_monotonicity(v, m, 1e-6), std::invalid_argument);
}

TEST_CASE("tiny instances solved tightly have monotone values and threshold policies") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = oracle::random_tiny_instance(rng);
        const auto m = oracle::to_model(inst);
        const auto sol = relative_value_iteration(m, {1e-9, 1000000});
        REQUIRE(sol.report.converged);
        const auto r = merge(check_value_monotonicity(sol.values, m, 1e-9),
                             check_threshold_structure(sol.policy, m, &sol.values, 1e-9));
        CHECK(r.value_violations.empty());
        CHECK(r.policy_violations.empty());
    }
}

TEST_CASE("a bumped value is flagged at exactly its neighbour pairs") {
    const auto m = default_model(3);
    const auto sol = relative_value_iteration(m);
    REQUIRE(check_value_monotonicity(sol.values, m, 1e-6).pass());

    const State s{4, 5, 5, 5, 5};
    auto bumped = sol.values;
    bumped.values[m.space().index(s)] += 100.0;
    const auto r = check_value_monotonicity(bumped, m, 1e-6);
    const std::set<Key> expected{key_of({3, 5, 5, 5, 5}, StateVariable::Battery), key_of(s, StateVariable::Aoi),
                                 key_of(s, StateVariable::Tau), key_of({4, 5, 5, 4, 5}, StateVariable::Uplink),
                                 key_of({4, 5, 5, 5, 4}, StateVariable::Downlink)};
    CHECK(reported(r) == expected);
    CHECK(r.value_violations.size() == 5u);

    auto lowered = sol.values;
    lowered.values[m.space().index(s)] -= 100.0;
    const std::set<Key> expected_low{key_of(s, StateVariable::Battery), key_of({4, 4, 5, 5, 5}, StateVariable::Aoi),
                                     key_of({4, 5, 4, 5, 5}, StateVariable::Tau), key_of(s, StateVariable::Uplink),
                                     key_of(s, StateVariable::Downlink)};
    CHECK(reported(check_value_monotonicity(lowered, m, 1e-6)) == expected_low);
}

TEST_CASE("value detector agrees with a brute-force scan under random corruption") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = oracle::random_tiny_instance(rng);
        const auto m = oracle::to_model(inst);
        auto sol = relative_value_iteration(m, {1e-9, 1000000});
        std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
        for (int k = 0; k < 3; ++k) sol.values.values[pick(rng)] += noise(rng);
        CHECK(reported(check_value_monotonicity(sol.values, m, 1e-9)) == brute_value_violations(sol.values, m, 1e-8));
    }
}

TEST_CASE("policy detector agrees with a brute-force count under random corruption") {
    std::mt19937_64 rng(78);
    int detected = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto inst = oracle::random_tiny_instance(rng);
        const auto m = oracle::to_model(inst);
        auto policy = relative_value_iteration(m).policy;
        std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
        for (int k = 0; k < 2; ++k) {
            const std::size_t i = pick(rng);
            const auto options = m.feasible(i).to_vector();
            policy.actions[i] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        }
        const auto r = check_threshold_structure(policy, m);
        const std::size_t expected = brute_policy_violations(policy, m);
        CHECK(r.policy_violations.size() == expected);
        if (expected > 0) ++detected;
    }
    CHECK(detected > 0);
}

TEST_CASE("single-state instance has no qualifying pairs") {
    const TransitionModel m({0, 1, 1, 0}, ChannelQuantizer({{1.0, 1.0}}, {std::nullopt}, {0}));
    const auto r = check_threshold_structure(Policy{{kIdleHarvest}}, m);
    CHECK(r.pass());
    for (auto n : r.pairs_checked) CHECK(n == 0u);
}

TEST_CASE("synthetic policy with a transmit step at A = 7") {
    // Free transmission at every level so (I,T) is feasible everywhere.
    const TransitionModel m({2, 10, 3, 1}, ChannelQuantizer({{1.0, 0.5}, {2.0, 0.5}}, {0, 0}, {1, 1}));
    Policy p;
    p.actions.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) p.actions[i] = m.space().state(i).aoi >= 7 ? kIdleTransmit : kIdleHarvest;
    const auto r = check_threshold_structure(p, m);
    REQUIRE(r.pass());
    const auto t = extract_thresholds(p, m);
    for (const auto& a_th : t.aoi_threshold) CHECK(a_th == std::optional<int>(7));
    for (const auto& tau_th : t.tau_threshold) CHECK_FALSE(tau_th.has_value());
    CHECK(recolor_from_thresholds(t, m) == p);

    // Never transmitting gives "never".
    Policy idle{std::vector<Action>(m.size(), kIdleHarvest)};
    const auto t_idle = extract_thresholds(idle, m);
    for (const auto& a_th : t_idle.aoi_threshold) CHECK_FALSE(a_th.has_value());
    std::ostringstream csv;
    write_thresholds_csv(csv, t_idle);
    CHECK(csv.str().find(",never\n") != std::string::npos);

    // Breaking the step violates the AoI implication and blocks extraction.
    p.actions[m.space().index({1, 8, 2, 1, 2})] = kIdleHarvest;
    const auto broken = check_threshold_structure(p, m);
    CHECK_FALSE(broken.pass());
    CHECK(std::all_of(broken.policy_violations.begin(), broken.policy_violations.end(),
                      [](const PolicyViolation& v) { return v.part == ThresholdRule::III; }));
    CHECK(broken.policy_violations.size() == 1u);
    CHECK_THROWS_AS(extract_thresholds(p, m), std::logic_error);
    std::ostringstream report;
    write_violations_csv(report, broken);
    CHECK(report.str().find("policy,iii,") != std::string::npos);
}

TEST_CASE("default instances pass both checks and recolor from thresholds") {
    for (int es : {3, 4}) {
        CAPTURE(es);
        const auto m = default_model(es);
        const auto sol = relative_value_iteration(m);
        const auto r = merge(check_value_monotonicity(sol.values, m, 1e-6),
                             check_threshold_structure(sol.policy, m, &sol.values, 1e-6));
        CHECK(r.pass());
        CHECK(r.pairs_checked[0] > 0u);
        CHECK(r.pairs_checked[3] > 0u);
        const auto t = extract_thresholds(sol.policy, m);
        CHECK(recolor_from_thresholds(t, m) == sol.policy);
        // The exact-pair family rule is also exercised by the unchecked policy.
        CHECK(check_threshold_structure(sol.policy, m).policy_violations.empty());
    }
}

TEST_CASE("E^S = 4, A = 5, h = g = 6: idle harvesting below B = 4, sampling while harvesting up to b_max") {
    const auto m = default_model(4);
    const auto sol = relative_value_iteration(m);
    for (int b = 0; b <= 3; ++b) CHECK(sol.policy[m.space().index({b, 5, 4, 6, 6})] == kIdleHarvest);
    for (int b = 4; b <= 9; ++b) CHECK(sol.policy[m.space().index({b, 5, 4, 6, 6})] == kSampleHarvest);
    const auto t = extract_thresholds(sol.policy, m);
    CHECK(t.battery_threshold_harvest[t.slice_without_battery(5, 4, 6, 6)] == std::optional<int>(9));
}
