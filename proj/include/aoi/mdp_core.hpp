#pragma once

#include "aoi/channel_model.hpp"
#include "aoi/system_params.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace aoi {

enum class Sample : std::uint8_t { Idle, Fresh };         // a1: I / S
enum class SlotUse : std::uint8_t { Harvest, Transmit };  // a2: H / T

/// Joint decision of one slot. Indices follow the tie-break order IH < SH < IT < ST.
struct Action {
    Sample sample = Sample::Idle;
    SlotUse slot_use = SlotUse::Harvest;

    constexpr int index() const {
        return (slot_use == SlotUse::Transmit ? 2 : 0) + (sample == Sample::Fresh ? 1 : 0);
    }
    static constexpr Action from_index(int i) {
        return {(i & 1) ? Sample::Fresh : Sample::Idle, (i & 2) ? SlotUse::Transmit : SlotUse::Harvest};
    }
    constexpr bool samples() const { return sample == Sample::Fresh; }
    constexpr bool transmits() const { return slot_use == SlotUse::Transmit; }

    friend constexpr bool operator==(Action, Action) = default;
};

inline constexpr Action kIdleHarvest{Sample::Idle, SlotUse::Harvest};
inline constexpr Action kSampleHarvest{Sample::Fresh, SlotUse::Harvest};
inline constexpr Action kIdleTransmit{Sample::Idle, SlotUse::Transmit};
inline constexpr Action kSampleTransmit{Sample::Fresh, SlotUse::Transmit};
inline constexpr std::array<Action, 4> kActionOrder{kIdleHarvest, kSampleHarvest, kIdleTransmit, kSampleTransmit};

/// "IH", "SH", "IT" or "ST".
std::string_view action_code(Action a);
std::optional<Action> parse_action_code(std::string_view code);

/// Small bitset over the four actions.
class ActionSet {
public:
    constexpr ActionSet() = default;
    static constexpr ActionSet all() { return ActionSet(0b1111); }
    static constexpr ActionSet of(std::initializer_list<Action> actions) {
        ActionSet s;
        for (auto a : actions) s.insert(a);
        return s;
    }

    constexpr void insert(Action a) { bits_ |= static_cast<std::uint8_t>(1u << a.index()); }
    constexpr bool contains(Action a) const { return (bits_ >> a.index()) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    int size() const;
    /// Members in tie-break order.
    std::vector<Action> to_vector() const;
    constexpr ActionSet operator&(ActionSet other) const { return ActionSet(bits_ & other.bits_); }
    friend constexpr bool operator==(ActionSet, ActionSet) = default;

private:
    constexpr explicit ActionSet(unsigned bits) : bits_(static_cast<std::uint8_t>(bits)) {}
    std::uint8_t bits_ = 0;
};

/// (B, A, tau, h, g). battery in quanta 0..b_max; aoi, tau, h_level, g_level are 1-based.
struct State {
    int battery = 0;
    int aoi = 1;
    int tau = 1;
    int h_level = 1;
    int g_level = 1;
    friend bool operator==(const State&, const State&) = default;
};

/// The channel-independent part of a state; the only part an action determines.
struct CoreState {
    int battery = 0;
    int aoi = 1;
    int tau = 1;
    friend bool operator==(const CoreState&, const CoreState&) = default;
};

/// Discrete ranges of the non-channel state variables plus the sampling cost E^S.
struct ModelDims {
    int b_max = 0;
    int aoi_max = 1;
    int tau_max = 1;
    int sampling_cost = 0;
};

ModelDims model_dims(const SystemParams& params);

/**
 * Dense index over (battery, aoi, tau, h, g), lexicographic with g fastest.
 * index = core * L^2 + (h - 1) * L + (g - 1), core = (battery * A_max + aoi - 1) * tau_max + tau - 1.
 */
class StateSpace {
public:
    static constexpr int kLayoutVersion = 1;

    StateSpace() = default;
    StateSpace(const ModelDims& dims, int channel_levels);

    std::size_t size() const { return num_cores_ * static_cast<std::size_t>(cells_); }
    std::size_t num_cores() const { return num_cores_; }
    int channel_levels() const { return levels_; }
    int cells() const { return cells_; }

    bool contains(const State& s) const;
    std::size_t index(const State& s) const;
    State state(std::size_t index) const;
    std::size_t core_index(const CoreState& c) const;
    CoreState core(std::size_t core_index) const;
    std::size_t core_of(std::size_t state_index) const { return state_index / cells_; }

private:
    ModelDims dims_;
    int levels_ = 0;
    int cells_ = 0;
    std::size_t num_cores_ = 0;
};

int next_battery(const State& s, Action a, const ChannelQuantizer& q, const ModelDims& dims);
int next_aoi(const State& s, Action a, const ModelDims& dims);
int next_tau(const State& s, Action a, const ModelDims& dims);
ActionSet feasible_actions(const State& s, const ChannelQuantizer& q, const ModelDims& dims);
/// Per-slot cost: the AoI at the destination, independent of the action.
double stage_cost(const State& s);

/**
 * Factored kernel of the status-update MDP: for every (state, action) the deterministic
 * next core, and for the channel the product of i.i.d. uplink/downlink level marginals.
 * `allowed` restricts the action space (used for the generate-at-will class); (I,H) must be allowed.
 *
 * Correlated fading would replace the per-level marginals by rows conditioned on the
 * current (h, g); next_channel_pmf() is the single place that would change.
 */
class TransitionModel {
public:
    TransitionModel(const ModelDims& dims, ChannelQuantizer quantizer, ActionSet allowed = ActionSet::all());
    /// Validates params and builds the quantizer.
    static TransitionModel from_params(const SystemParams& params, ActionSet allowed = ActionSet::all());

    const ModelDims& dims() const { return dims_; }
    const ChannelQuantizer& quantizer() const { return quantizer_; }
    const StateSpace& space() const { return space_; }
    ActionSet allowed_actions() const { return allowed_; }
    std::size_t size() const { return space_.size(); }

    ActionSet feasible(std::size_t state_index) const { return feasible_[state_index]; }
    ActionSet feasible(const State& s) const { return feasible_[space_.index(s)]; }
    /// Next core index, or -1 when `a` is infeasible.
    std::int32_t next_core(std::size_t state_index, Action a) const {
        return next_core_[state_index * 4 + static_cast<std::size_t>(a.index())];
    }
    /// Throws ContractViolation when `a` is infeasible in `s`.
    CoreState next_core_state(const State& s, Action a) const;

    /// P(h', g') in cell order (h' major); independent of the current levels.
    const std::vector<double>& cell_probabilities() const { return cell_prob_; }
    std::vector<double> next_channel_pmf(int current_level) const;

private:
    ModelDims dims_;
    ChannelQuantizer quantizer_;
    ActionSet allowed_;
    StateSpace space_;
    std::vector<ActionSet> feasible_;
    std::vector<std::int32_t> next_core_;
    std::vector<double> cell_prob_;
};

/// Action taken where the model does not permit it.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// All L^2 successors of (s, a) with their probabilities.
std::vector<std::pair<State, double>> transition_distribution(const State& s, Action a, const TransitionModel& model);

std::string describe(const State& s);

}  // namespace aoi
