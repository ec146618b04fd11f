#include "aoi/structure_analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace aoi {

std::string_view to_string(StateVariable v) {
    switch (v) {
        case StateVariable::Battery: return "B";
        case StateVariable::Aoi: return "A";
        case StateVariable::Tau: return "tau";
        case StateVariable::Uplink: return "h";
        case StateVariable::Downlink: return "g";
    }
    return "?";
}

std::string_view to_string(ThresholdRule p) {
    static constexpr std::array<std::string_view, 4> names{"i", "ii", "iii", "iv"};
    return names[static_cast<std::size_t>(p)];
}

StructureReport merge(StructureReport a, const StructureReport& b) {
    a.value_violations.insert(a.value_violations.end(), b.value_violations.begin(), b.value_violations.end());
    a.policy_violations.insert(a.policy_violations.end(), b.policy_violations.begin(),
                                 b.policy_violations.end());
    a.value_pairs_checked += b.value_pairs_checked;
    for (std::size_t i = 0; i < 4; ++i) {
        a.pairs_checked[i] += b.pairs_checked[i];
        a.tie_downgrades[i] += b.tie_downgrades[i];
        a.family_downgrades[i] += b.family_downgrades[i];
    }
    return a;
}

StructureReport check_value_monotonicity(const ValueTable& values, const TransitionModel& model, double tol) {
    if (values.values.size() != model.size()) throw std::invalid_argument("value table size does not match model");
    if (!(values.final_span <= tol))
        throw std::invalid_argument("value monotonicity needs a converged solve (final span above tolerance)");
    const double slack = 10.0 * tol;
    const auto& space = model.space();
    StructureReport report;

    for (std::size_t i = 0; i < model.size(); ++i) {
        const State s = space.state(i);
        const double v = values.values[i];
        auto check = [&](State up, StateVariable var, bool increasing) {
            if (!space.contains(up)) return;
            ++report.value_pairs_checked;
            const double vu = values.values[space.index(up)];
            const bool bad = increasing ? (vu < v - slack) : (vu > v + slack);
            if (bad) report.value_violations.push_back({s, var, v, vu});
        };
        check({s.battery + 1, s.aoi, s.tau, s.h_level, s.g_level}, StateVariable::Battery, false);
        check({s.battery, s.aoi + 1, s.tau, s.h_level, s.g_level}, StateVariable::Aoi, true);
        check({s.battery, s.aoi, s.tau + 1, s.h_level, s.g_level}, StateVariable::Tau, true);
        check({s.battery, s.aoi, s.tau, s.h_level + 1, s.g_level}, StateVariable::Uplink, false);
        check({s.battery, s.aoi, s.tau, s.h_level, s.g_level + 1}, StateVariable::Downlink, false);
    }
    return report;
}

namespace {

int effective_harvest(const TransitionModel& model, int g_level) {
    return std::min(model.quantizer().harvest_quanta(g_level), model.dims().b_max);
}

bool same_family(ThresholdRule part, Action implied, Action actual) {
    switch (part) {
        case ThresholdRule::I: return false;
        case ThresholdRule::II: return actual.slot_use == implied.slot_use;
        case ThresholdRule::III: return actual.slot_use == implied.slot_use;
        case ThresholdRule::IV: return actual.sample == implied.sample;
    }
    return false;
}

class PairChecker {
public:
    PairChecker(const Policy& policy, const TransitionModel& model, const ValueTable* values, double tol,
                StructureReport& report)
        : policy_(policy), model_(model), report_(report), slack_(10.0 * tol) {
        if (values) {
            values_ = values;
            w_ = expected_continuation(values->values, model);
        }
    }

    void operator()(ThresholdRule part, const State& s1, const State& s2) {
        const auto& space = model_.space();
        const std::size_t i1 = space.index(s1);
        const std::size_t i2 = space.index(s2);
        const Action implied = policy_[i1];
        const Action actual = policy_[i2];
        const auto p = static_cast<std::size_t>(part);
        ++report_.pairs_checked[p];
        if (actual == implied) return;
        if (is_tie(i2, implied, actual)) {
            ++report_.tie_downgrades[p];
            return;
        }
        if (same_family(part, implied, actual)) {
            ++report_.family_downgrades[p];
            return;
        }
        report_.policy_violations.push_back({part, s1, s2, implied, actual});
    }

private:
    /// Both the implied and the chosen action are within slack of the best continuation at s.
    bool is_tie(std::size_t s, Action implied, Action actual) const {
        if (!values_) return false;
        const auto n_implied = model_.next_core(s, implied);
        const auto n_actual = model_.next_core(s, actual);
        if (n_implied < 0 || n_actual < 0) return false;
        double best = std::numeric_limits<double>::infinity();
        for (auto a : kActionOrder) {
            const auto n = model_.next_core(s, a);
            if (n >= 0) best = std::min(best, w_[static_cast<std::size_t>(n)]);
        }
        return w_[static_cast<std::size_t>(n_implied)] - best <= slack_ &&
               w_[static_cast<std::size_t>(n_actual)] - best <= slack_;
    }

    const Policy& policy_;
    const TransitionModel& model_;
    StructureReport& report_;
    double slack_;
    const ValueTable* values_ = nullptr;
    std::vector<double> w_;
};

}  // namespace

StructureReport check_threshold_structure(const Policy& policy, const TransitionModel& model,
                                          const ValueTable* values, double tol) {
    if (policy.actions.size() != model.size()) throw std::invalid_argument("policy size does not match model");
    StructureReport report;
    PairChecker check(policy, model, values, tol, report);
    const auto& space = model.space();
    const auto& dims = model.dims();

    for (std::size_t i = 0; i < model.size(); ++i) {
        const State s1 = space.state(i);
        const Action a = policy[i];
        const int harvest = effective_harvest(model, s1.g_level);

        if (a == kIdleHarvest) {
            for (int b2 = std::max(0, dims.b_max - harvest); b2 < s1.battery; ++b2)
                check(ThresholdRule::I, s1, {b2, s1.aoi, s1.tau, s1.h_level, s1.g_level});
        }
        if (!a.transmits()) {
            for (int b2 = std::max(0, dims.b_max - harvest + dims.sampling_cost); b2 < s1.battery; ++b2)
                check(ThresholdRule::II, s1, {b2, s1.aoi, s1.tau, s1.h_level, s1.g_level});
        } else {
            for (int a2 = s1.aoi + 1; a2 <= dims.aoi_max; ++a2)
                check(ThresholdRule::III, s1, {s1.battery, a2, s1.tau, s1.h_level, s1.g_level});
        }
        if (a.samples()) {
            for (int t2 = s1.tau + 1; t2 <= dims.tau_max; ++t2)
                check(ThresholdRule::IV, s1, {s1.battery, s1.aoi, t2, s1.h_level, s1.g_level});
        }
    }
    return report;
}

std::size_t ThresholdTables::slice_without_aoi(int b, int tau, int h, int g) const {
    return ((static_cast<std::size_t>(b) * dims.tau_max + (tau - 1)) * channel_levels + (h - 1)) * channel_levels +
           (g - 1);
}

std::size_t ThresholdTables::slice_without_tau(int b, int aoi, int h, int g) const {
    return ((static_cast<std::size_t>(b) * dims.aoi_max + (aoi - 1)) * channel_levels + (h - 1)) * channel_levels +
           (g - 1);
}

std::size_t ThresholdTables::slice_without_battery(int aoi, int tau, int h, int g) const {
    return ((static_cast<std::size_t>(aoi - 1) * dims.tau_max + (tau - 1)) * channel_levels + (h - 1)) *
               channel_levels +
           (g - 1);
}

ThresholdTables extract_thresholds(const Policy& policy, const TransitionModel& model) {
    if (!check_threshold_structure(policy, model).pass())
        throw std::logic_error("thresholds are undefined: policy violates the threshold structure");
    const auto& dims = model.dims();
    const auto& space = model.space();
    const int levels = space.channel_levels();
    ThresholdTables t;
    t.dims = dims;
    t.channel_levels = levels;
    const std::size_t per_channel = static_cast<std::size_t>(levels) * levels;
    t.aoi_threshold.resize(static_cast<std::size_t>(dims.b_max + 1) * dims.tau_max * per_channel);
    t.tau_threshold.resize(static_cast<std::size_t>(dims.b_max + 1) * dims.aoi_max * per_channel);
    t.battery_threshold_idle.resize(static_cast<std::size_t>(dims.aoi_max) * dims.tau_max * per_channel);
    t.battery_threshold_harvest.resize(t.battery_threshold_idle.size());

    auto act = [&](int b, int a, int tau, int h, int g) { return policy[space.index({b, a, tau, h, g})]; };

    for (int h = 1; h <= levels; ++h) {
        for (int g = 1; g <= levels; ++g) {
            const int harvest = effective_harvest(model, g);
            for (int b = 0; b <= dims.b_max; ++b) {
                for (int tau = 1; tau <= dims.tau_max; ++tau)
                    for (int a = 1; a <= dims.aoi_max; ++a)
                        if (act(b, a, tau, h, g).transmits()) {
                            t.aoi_threshold[t.slice_without_aoi(b, tau, h, g)] = a;
                            break;
                        }
                for (int a = 1; a <= dims.aoi_max; ++a)
                    for (int tau = 1; tau <= dims.tau_max; ++tau)
                        if (act(b, a, tau, h, g).samples()) {
                            t.tau_threshold[t.slice_without_tau(b, a, h, g)] = tau;
                            break;
                        }
            }
            for (int a = 1; a <= dims.aoi_max; ++a) {
                for (int tau = 1; tau <= dims.tau_max; ++tau) {
                    const std::size_t k = t.slice_without_battery(a, tau, h, g);
                    for (int b = dims.b_max; b >= std::max(0, dims.b_max - harvest); --b)
                        if (act(b, a, tau, h, g) == kIdleHarvest) {
                            t.battery_threshold_idle[k] = b;
                            break;
                        }
                    for (int b = dims.b_max; b >= std::max(0, dims.b_max - harvest + dims.sampling_cost); --b)
                        if (!act(b, a, tau, h, g).transmits()) {
                            t.battery_threshold_harvest[k] = b;
                            break;
                        }
                }
            }
        }
    }
    return t;
}

Policy recolor_from_thresholds(const ThresholdTables& t, const TransitionModel& model) {
    const auto& space = model.space();
    Policy p;
    p.provenance = Provenance::External;
    p.actions.resize(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        const State s = space.state(i);
        const auto a_th = t.aoi_threshold[t.slice_without_aoi(s.battery, s.tau, s.h_level, s.g_level)];
        const auto tau_th = t.tau_threshold[t.slice_without_tau(s.battery, s.aoi, s.h_level, s.g_level)];
        const bool transmit = a_th && s.aoi >= *a_th;
        const bool sample = tau_th && s.tau >= *tau_th;
        p.actions[i] = {sample ? Sample::Fresh : Sample::Idle, transmit ? SlotUse::Transmit : SlotUse::Harvest};
    }
    return p;
}

void write_report_text(std::ostream& out, const StructureReport& report) {
    out << "structure check: " << (report.pass() ? "PASS" : "FAIL") << '\n';
    out << "value monotonicity: " << report.value_pairs_checked << " neighbour pairs, "
        << report.value_violations.size() << " violations\n";
    for (std::size_t i = 0; i < 4; ++i) {
        out << "threshold part (" << to_string(static_cast<ThresholdRule>(i)) << "): " << report.pairs_checked[i]
            << " pairs, " << report.tie_downgrades[i] << " tie downgrades, " << report.family_downgrades[i]
            << " family downgrades\n";
    }
    out << "threshold violations: " << report.policy_violations.size() << '\n';
}

void write_violations_csv(std::ostream& out, const StructureReport& report) {
    out << "kind,part_or_variable,s1,s2,detail\n";
    char buf[96];
    for (const auto& v : report.value_violations) {
        State upper = v.lower;
        switch (v.variable) {
            case StateVariable::Battery: ++upper.battery; break;
            case StateVariable::Aoi: ++upper.aoi; break;
            case StateVariable::Tau: ++upper.tau; break;
            case StateVariable::Uplink: ++upper.h_level; break;
            case StateVariable::Downlink: ++upper.g_level; break;
        }
        std::snprintf(buf, sizeof buf, "V=%.12g vs %.12g", v.value_lower, v.value_upper);
        out << "value," << to_string(v.variable) << ",\"" << describe(v.lower) << "\",\"" << describe(upper) << "\","
            << buf << '\n';
    }
    for (const auto& v : report.policy_violations) {
        out << "policy," << to_string(v.part) << ",\"" << describe(v.s1) << "\",\"" << describe(v.s2) << "\","
            << action_code(v.action_s1) << "->" << action_code(v.action_s2) << '\n';
    }
}

void write_thresholds_csv(std::ostream& out, const ThresholdTables& t) {
    auto cell = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("never"); };
    out << "kind,fixed_1,fixed_2,h,g,threshold\n";
    const int levels = t.channel_levels;
    for (int h = 1; h <= levels; ++h)
        for (int g = 1; g <= levels; ++g) {
            for (int b = 0; b <= t.dims.b_max; ++b)
                for (int tau = 1; tau <= t.dims.tau_max; ++tau)
                    out << "A_th,B=" << b << ",tau=" << tau << ',' << h << ',' << g << ','
                        << cell(t.aoi_threshold[t.slice_without_aoi(b, tau, h, g)]) << '\n';
            for (int b = 0; b <= t.dims.b_max; ++b)
                for (int a = 1; a <= t.dims.aoi_max; ++a)
                    out << "tau_th,B=" << b << ",A=" << a << ',' << h << ',' << g << ','
                        << cell(t.tau_threshold[t.slice_without_tau(b, a, h, g)]) << '\n';
            for (int a = 1; a <= t.dims.aoi_max; ++a)
                for (int tau = 1; tau <= t.dims.tau_max; ++tau) {
                    const auto k = t.slice_without_battery(a, tau, h, g);
                    out << "B_th_IH,A=" << a << ",tau=" << tau << ',' << h << ',' << g << ','
                        << cell(t.battery_threshold_idle[k]) << '\n';
                    out << "B_th_H,A=" << a << ",tau=" << tau << ',' << h << ',' << g << ','
                        << cell(t.battery_threshold_harvest[k]) << '\n';
                }
        }
}

}  // namespace aoi
