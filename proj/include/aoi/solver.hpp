#pragma once

#include "aoi/mdp_core.hpp"

#include <chrono>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace aoi {

struct SolverOptions {
    double tol = 1e-6;
    int max_iter = 100000;
    /// Aperiodicity transform P -> self_loop * I + (1 - self_loop) * P. Gain and greedy policy are
    /// unchanged; it only guarantees convergence when an optimal chain is periodic. 0 disables it.
    double self_loop = 0.5;
};

/// Relative values V(s) (zero at state index 0) and the optimal average AoI.
struct ValueTable {
    std::vector<double> values;
    double rho = 0.0;
    int iterations = 0;
    double final_span = 0.0;
};

enum class Provenance { PlainVIA, StructuredVIA, Baseline, External };
std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct Policy {
    std::vector<Action> actions;
    Provenance provenance = Provenance::External;

    Action operator[](std::size_t state_index) const { return actions[state_index]; }
    friend bool operator==(const Policy& a, const Policy& b) { return a.actions == b.actions; }
};

struct SolveReport {
    std::uint64_t q_evaluations = 0;
    std::chrono::duration<double> wall_time{0.0};
    bool converged = false;
    std::vector<double> history;  // span of V^(k+1) - V^(k) per iteration
};

struct Solution {
    ValueTable values;
    Policy policy;
    SolveReport report;
};

/// Expected relative value of each core over the next-slot channel draw.
std::vector<double> expected_continuation(std::span<const double> values, const TransitionModel& model);

/// Q(s, a) = A + sum_{s'} P(s' | s, a) V(s'). Throws ContractViolation if `a` is infeasible.
double bellman_q(const State& s, Action a, const ValueTable& values, const TransitionModel& model);

/// Greedy policy; ties resolved by the order (I,H) < (S,H) < (I,T) < (S,T).
Policy greedy_policy(const ValueTable& values, const TransitionModel& model);

/// max_s |min_a Q(s,a) - V(s) - rho|.
double bellman_residual(const ValueTable& values, const TransitionModel& model);

/**
 * Relative value iteration for the average-cost criterion. Each sweep applies the
 * Bellman operator (after the self-loop transform), measures span(TV - V), and
 * renormalizes at state index 0. Stops at span <= tol; rho is the midpoint of
 * [min, max] of TV - V. Returned values are rescaled to the untransformed chain.
 */
Solution relative_value_iteration(const TransitionModel& model, const SolverOptions& options = {});

/**
 * Same fixed point and policy as relative_value_iteration, but the greedy step copies
 * actions along the threshold directions of the optimal policy instead of evaluating
 * every feasible action:
 *   - descending B: (I,H) once B >= b_max - H(g), (S,H) once B >= b_max - H(g) + E^S;
 *   - ascending A:  any transmit action;
 *   - ascending tau: (S,H).
 * Each copy is exact for a value table monotone in (B, A, tau), which every iterate
 * from V = 0 is, so the counter is the only observable difference.
 */
Solution structured_value_iteration(const TransitionModel& model, const SolverOptions& options = {});

}  // namespace aoi
