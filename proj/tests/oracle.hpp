#pragma once

// Reference implementations used only by the tests. The dynamics below are written
// from scratch (tuples and maps, no dense index) so they can cross-check mdp_core.

#include "aoi/mdp_core.hpp"
#include "aoi/solver.hpp"

#include <map>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

namespace oracle {

/// A hand-sized instance: energies given directly in quanta.
struct TinyInstance {
    int b_max = 1;
    int aoi_max = 2;
    int tau_max = 2;
    int sampling_cost = 0;
    std::vector<double> prob;              // per channel level
    std::vector<std::optional<int>> tx;    // nullopt: cannot transmit at this level
    std::vector<int> harvest;
    unsigned allowed = 0b1111;             // bit i: action index i may be used

    int levels() const { return static_cast<int>(prob.size()); }
};

/// b_max <= 2, aoi_max == tau_max <= 3, L <= 2, monotone energy tables.
TinyInstance random_tiny_instance(std::mt19937_64& rng);

aoi::ChannelQuantizer to_quantizer(const TinyInstance& inst);
aoi::TransitionModel to_model(const TinyInstance& inst);

using Tuple = std::tuple<int, int, int, int, int>;  // (B, A, tau, h, g)

/// Explicit enumeration of the MDP; actions are indices in IH, SH, IT, ST order.
class TinyMdp {
public:
    explicit TinyMdp(const TinyInstance& inst);

    int num_states() const { return static_cast<int>(states_.size()); }
    const Tuple& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
    int index(const Tuple& s) const { return index_.at(s); }
    double cost(int i) const { return std::get<1>(state(i)); }
    std::vector<int> feasible(int i) const;
    /// (successor, probability) pairs, merged.
    std::vector<std::pair<int, double>> successors(int i, int action) const;

private:
    TinyInstance inst_;
    std::vector<Tuple> states_;
    std::map<Tuple, int> index_;
};

/// Long-run average cost from `start` of the chain induced by `policy` (one action per reachable state).
double policy_gain(const TinyMdp& mdp, const std::vector<int>& policy, int start);

struct EnumerationResult {
    double best_gain = 0.0;
    std::size_t policies = 0;
};

/**
 * Minimum gain from `start` over every stationary deterministic policy, enumerating
 * actions only on states the policy itself reaches. nullopt if more than `cap` policies exist.
 */
std::optional<EnumerationResult> enumerate_optimal_gain(const TinyMdp& mdp, int start, std::size_t cap);

/// Policy of the library (dense index) translated to TinyMdp indices.
std::vector<int> to_tiny_policy(const aoi::Policy& policy, const aoi::TransitionModel& model, const TinyMdp& mdp);

/// Plain textbook relative value iteration on the explicit successor lists.
double reference_rvi_gain(const TinyMdp& mdp, double tol, int max_iter = 1000000);

}  // namespace oracle
