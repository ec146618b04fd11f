#pragma once

#include "aoi/solver.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aoi {

struct RolloutOptions {
    std::int64_t burn_in = 10000;  // slots discarded before averaging
    int batches = 100;             // batch means for the confidence interval
};

struct TrajectoryStats {
    std::int64_t slots_simulated = 0;
    double mean_aoi = 0.0;
    double ci_half_width = 0.0;  // 95 %, batch means
    std::array<double, 4> action_frequencies{};  // tie-break order IH, SH, IT, ST
    double mean_battery = 0.0;
    std::uint64_t seed = 0;
    std::int64_t min_battery = 0;
};

/// Full battery, A = tau = 1, median channel levels.
State default_initial_state(const TransitionModel& model);

/**
 * Simulates burn_in + n_slots slots under `policy`, drawing (h', g') i.i.d. from the
 * quantizer each slot, and averages A(n) over the last n_slots.
 * Randomness: one std::mt19937_64 seeded with `seed`; each slot draws the uplink level
 * from the top 53 bits of one output and then the downlink level from the next.
 * Throws ContractViolation naming the state if the policy picks an infeasible action.
 */
TrajectoryStats rollout(const Policy& policy, const TransitionModel& model, const State& initial,
                        std::int64_t n_slots, std::uint64_t seed, const RolloutOptions& options = {});

/// Actions available to the generate-at-will class: harvest idle, or generate while transmitting.
inline constexpr ActionSet kGenerateAtWillActions = ActionSet::of({kIdleHarvest, kSampleTransmit});

/**
 * The generate-at-will class restricted from the joint MDP: each slot is either WET
 * (I,H) or a transmission slot (S,T), where a new packet is generated and E^S + E^T
 * is paid in that slot. The joint optimum can only be lower.
 */
struct GenerateAtWill {
    TransitionModel model;
    Solution solution;
    double rho() const { return solution.values.rho; }
};

GenerateAtWill solve_generate_at_will(const SystemParams& params, const SolverOptions& options = {});
GenerateAtWill solve_generate_at_will(const TransitionModel& joint, const SolverOptions& options = {});

/// Transmit (S,T) whenever affordable, otherwise harvest.
Policy greedy_transmit_policy(const TransitionModel& model);

enum class SweepAxis { PacketBits, SamplingCost };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepSettings {
    SolverOptions solver;
    bool with_baseline = true;
    std::int64_t sim_slots = 0;  // 0 disables simulation
    std::uint64_t seed = 1;
    RolloutOptions rollout;
};

struct SweepRow {
    double value = 0.0;
    std::optional<double> rho_joint;
    std::optional<double> rho_baseline;
    std::optional<TrajectoryStats> sim_joint;
    std::optional<TrajectoryStats> sim_baseline;
    std::string error;  // empty on success
};

/// Solves (and optionally simulates) one configuration per value; failures are recorded per row.
std::vector<SweepRow> sweep(const SystemParams& base, SweepAxis axis, const std::vector<double>& values,
                            const SweepSettings& settings);

SystemParams with_axis_value(SystemParams params, SweepAxis axis, double value);

}  // namespace aoi
