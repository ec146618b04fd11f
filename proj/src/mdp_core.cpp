#include "aoi/mdp_core.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace aoi {

std::string_view action_code(Action a) {
    static constexpr std::array<std::string_view, 4> codes{"IH", "SH", "IT", "ST"};
    return codes[static_cast<std::size_t>(a.index())];
}

std::optional<Action> parse_action_code(std::string_view code) {
    for (auto a : kActionOrder)
        if (action_code(a) == code) return a;
    return std::nullopt;
}

int ActionSet::size() const { return std::popcount(static_cast<unsigned>(bits_)); }

std::vector<Action> ActionSet::to_vector() const {
    std::vector<Action> out;
    for (auto a : kActionOrder)
        if (contains(a)) out.push_back(a);
    return out;
}

ModelDims model_dims(const SystemParams& params) {
    return {params.b_max(), params.aoi_max, params.tau_max, params.sampling_cost()};
}

StateSpace::StateSpace(const ModelDims& dims, int channel_levels) : dims_(dims), levels_(channel_levels) {
    if (dims.b_max < 0 || dims.aoi_max < 1 || dims.tau_max < 1 || channel_levels < 1)
        throw std::invalid_argument("state space dimensions out of range");
    cells_ = channel_levels * channel_levels;
    num_cores_ = static_cast<std::size_t>(dims.b_max + 1) * dims.aoi_max * dims.tau_max;
}

bool StateSpace::contains(const State& s) const {
    return s.battery >= 0 && s.battery <= dims_.b_max && s.aoi >= 1 && s.aoi <= dims_.aoi_max && s.tau >= 1 &&
           s.tau <= dims_.tau_max && s.h_level >= 1 && s.h_level <= levels_ && s.g_level >= 1 &&
           s.g_level <= levels_;
}

std::size_t StateSpace::core_index(const CoreState& c) const {
    return (static_cast<std::size_t>(c.battery) * dims_.aoi_max + (c.aoi - 1)) * dims_.tau_max + (c.tau - 1);
}

CoreState StateSpace::core(std::size_t core_index) const {
    CoreState c;
    c.tau = static_cast<int>(core_index % dims_.tau_max) + 1;
    core_index /= dims_.tau_max;
    c.aoi = static_cast<int>(core_index % dims_.aoi_max) + 1;
    c.battery = static_cast<int>(core_index / dims_.aoi_max);
    return c;
}

std::size_t StateSpace::index(const State& s) const {
    if (!contains(s)) throw std::out_of_range("state out of range: " + describe(s));
    return core_index({s.battery, s.aoi, s.tau}) * cells_ + static_cast<std::size_t>(s.h_level - 1) * levels_ +
           (s.g_level - 1);
}

State StateSpace::state(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("state index out of range");
    const auto c = core(index / cells_);
    const int cell = static_cast<int>(index % cells_);
    return {c.battery, c.aoi, c.tau, cell / levels_ + 1, cell % levels_ + 1};
}

ActionSet feasible_actions(const State& s, const ChannelQuantizer& q, const ModelDims& dims) {
    ActionSet set;
    set.insert(kIdleHarvest);
    if (s.battery >= dims.sampling_cost) set.insert(kSampleHarvest);
    if (q.tx_feasible(s.h_level)) {
        const int tx = q.tx_quanta(s.h_level);
        if (s.battery >= tx) set.insert(kIdleTransmit);
        if (s.battery >= dims.sampling_cost + tx) set.insert(kSampleTransmit);
    }
    return set;
}

int next_battery(const State& s, Action a, const ChannelQuantizer& q, const ModelDims& dims) {
    if (!feasible_actions(s, q, dims).contains(a))
        throw ContractViolation(std::string("action ") + std::string(action_code(a)) + " infeasible in " + describe(s));
    const int sample_cost = a.samples() ? dims.sampling_cost : 0;
    if (a.transmits()) return s.battery - sample_cost - q.tx_quanta(s.h_level);
    return std::min(dims.b_max, s.battery - sample_cost + q.harvest_quanta(s.g_level));
}

int next_aoi(const State& s, Action a, const ModelDims& dims) {
    return std::min(dims.aoi_max, (a.transmits() ? s.tau : s.aoi) + 1);
}

int next_tau(const State& s, Action a, const ModelDims& dims) {
    return a.samples() ? 1 : std::min(dims.tau_max, s.tau + 1);
}

double stage_cost(const State& s) { return static_cast<double>(s.aoi); }

TransitionModel::TransitionModel(const ModelDims& dims, ChannelQuantizer quantizer, ActionSet allowed)
    : dims_(dims), quantizer_(std::move(quantizer)), allowed_(allowed), space_(dims, quantizer_.size()) {
    if (!quantizer_.has_energy_tables()) throw std::invalid_argument("quantizer has no energy tables");
    if (!allowed_.contains(kIdleHarvest)) throw std::invalid_argument("(I,H) must remain available");
    if (dims.sampling_cost < 0) throw std::invalid_argument("sampling cost must be >= 0");

    const std::size_t n = space_.size();
    feasible_.resize(n);
    next_core_.assign(n * 4, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const State s = space_.state(i);
        const ActionSet f = feasible_actions(s, quantizer_, dims_) & allowed_;
        feasible_[i] = f;
        for (auto a : kActionOrder) {
            if (!f.contains(a)) continue;
            const CoreState next{next_battery(s, a, quantizer_, dims_), next_aoi(s, a, dims_), next_tau(s, a, dims_)};
            next_core_[i * 4 + a.index()] = static_cast<std::int32_t>(space_.core_index(next));
        }
    }

    const int levels = quantizer_.size();
    cell_prob_.resize(static_cast<std::size_t>(levels) * levels);
    for (int h = 1; h <= levels; ++h)
        for (int g = 1; g <= levels; ++g)
            cell_prob_[static_cast<std::size_t>(h - 1) * levels + (g - 1)] =
                quantizer_.probability(h) * quantizer_.probability(g);
}

TransitionModel TransitionModel::from_params(const SystemParams& params, ActionSet allowed) {
    require_valid(params);
    return TransitionModel(model_dims(params), build_quantizer(params), allowed);
}

CoreState TransitionModel::next_core_state(const State& s, Action a) const {
    const auto next = next_core(space_.index(s), a);
    if (next < 0)
        throw ContractViolation(std::string("action ") + std::string(action_code(a)) + " infeasible in " + describe(s));
    return space_.core(static_cast<std::size_t>(next));
}

std::vector<double> TransitionModel::next_channel_pmf(int /*current_level*/) const {
    std::vector<double> pmf;
    for (const auto& l : quantizer_.levels()) pmf.push_back(l.probability);
    return pmf;
}

std::vector<std::pair<State, double>> transition_distribution(const State& s, Action a, const TransitionModel& model) {
    const CoreState next = model.next_core_state(s, a);
    const int levels = model.quantizer().size();
    const auto& probs = model.cell_probabilities();
    std::vector<std::pair<State, double>> out;
    out.reserve(probs.size());
    for (int h = 1; h <= levels; ++h)
        for (int g = 1; g <= levels; ++g)
            out.push_back({State{next.battery, next.aoi, next.tau, h, g},
                           probs[static_cast<std::size_t>(h - 1) * levels + (g - 1)]});
    return out;
}

std::string describe(const State& s) {
    return "(B=" + std::to_string(s.battery) + ", A=" + std::to_string(s.aoi) + ", tau=" + std::to_string(s.tau) +
           ", h=" + std::to_string(s.h_level) + ", g=" + std::to_string(s.g_level) + ")";
}

}  // namespace aoi
