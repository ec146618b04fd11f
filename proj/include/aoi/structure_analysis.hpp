#pragma once

#include "aoi/solver.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace aoi {

enum class StateVariable { Battery, Aoi, Tau, Uplink, Downlink };
std::string_view to_string(StateVariable v);

enum class ThresholdRule { I = 0, II = 1, III = 2, IV = 3 };
std::string_view to_string(ThresholdRule p);

/// V(lower) and V(upper) for two states one step apart in `variable`, ordered the wrong way.
struct ValueViolation {
    State lower;
    StateVariable variable;
    double value_lower;
    double value_upper;
};

/// pi(s1) = action_s1 but pi(s2) = action_s2 outside the implied action family.
struct PolicyViolation {
    ThresholdRule part;
    State s1;
    State s2;
    Action action_s1;
    Action action_s2;
};

struct StructureReport {
    std::vector<ValueViolation> value_violations;
    std::vector<PolicyViolation> policy_violations;
    std::size_t value_pairs_checked = 0;
    std::array<std::size_t, 4> pairs_checked{};
    /// Exact action differs, but the implied action is within slack of the minimum at s2.
    std::array<std::size_t, 4> tie_downgrades{};
    /// Exact action differs, but s2 stays in the implied family ({(.,H)}, {(.,T)} or {(S,.)}).
    std::array<std::size_t, 4> family_downgrades{};

    bool pass() const { return value_violations.empty() && policy_violations.empty(); }
};

StructureReport merge(StructureReport a, const StructureReport& b);

/**
 * V must be nondecreasing in A and tau and nonincreasing in B, h and g.
 * Compares every pair of neighbouring states with slack 10 * tol.
 * Throws std::invalid_argument when values.final_span > tol (not a converged solve).
 */
StructureReport check_value_monotonicity(const ValueTable& values, const TransitionModel& model, double tol);

/**
 * Checks the four threshold implications over every qualifying state pair:
 *   (i)   B1 >= B2 >= b_max - H(g):        pi(s1) = (I,H)   =>  pi(s2) = (I,H)
 *   (ii)  B1 >= B2 >= b_max - H(g) + E^S:  pi(s1) = (a1,H)  =>  pi(s2) = (a1,H)
 *   (iii) A2 >= A1:                         pi(s1) = (a1,T)  =>  pi(s2) = (a1,T)
 *   (iv)  tau2 >= tau1:                     pi(s1) = (S,a2)  =>  pi(s2) = (S,a2)
 * H(g) is the harvest quanta at the shared downlink level, capped at b_max.
 * A mismatch of the exact action is forgiven as a tie when `values` is given and both the
 * implied and the chosen action's Q are within 10 * tol of the minimum at s2, and for (ii)-(iv) as a
 * family match when s2 keeps the same slot use / sampling decision. Both are counted.
 */
StructureReport check_threshold_structure(const Policy& policy, const TransitionModel& model,
                                          const ValueTable* values = nullptr, double tol = 1e-6);

/// Sentinel-free threshold tables; nullopt means the action family is never chosen on that slice.
struct ThresholdTables {
    ModelDims dims;
    int channel_levels = 0;
    /// Minimal A choosing a transmit action, per (B, tau, h, g).
    std::vector<std::optional<int>> aoi_threshold;
    /// Minimal tau choosing to sample, per (B, A, h, g).
    std::vector<std::optional<int>> tau_threshold;
    /// Maximal B choosing (I,H) within B >= b_max - H(g), per (A, tau, h, g).
    std::vector<std::optional<int>> battery_threshold_idle;
    /// Maximal B choosing a harvest action within B >= b_max - H(g) + E^S, per (A, tau, h, g).
    std::vector<std::optional<int>> battery_threshold_harvest;

    std::size_t slice_without_aoi(int b, int tau, int h, int g) const;
    std::size_t slice_without_tau(int b, int aoi, int h, int g) const;
    std::size_t slice_without_battery(int aoi, int tau, int h, int g) const;
};

/// Throws std::logic_error when the policy fails check_threshold_structure.
ThresholdTables extract_thresholds(const Policy& policy, const TransitionModel& model);

/// Rebuilds a policy from the A and tau thresholds alone.
Policy recolor_from_thresholds(const ThresholdTables& tables, const TransitionModel& model);

void write_report_text(std::ostream& out, const StructureReport& report);
/// kind,part_or_variable,s1,s2,detail ; header only when the report passes.
void write_violations_csv(std::ostream& out, const StructureReport& report);
void write_thresholds_csv(std::ostream& out, const ThresholdTables& tables);

}  // namespace aoi
