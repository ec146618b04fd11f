#include "aoi/channel_model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace aoi {

ChannelQuantizer::ChannelQuantizer(std::vector<ChannelLevel> levels) : levels_(std::move(levels)) {
    check_invariants();
}

ChannelQuantizer::ChannelQuantizer(std::vector<ChannelLevel> levels, std::vector<std::optional<int>> tx_quanta,
                                   std::vector<int> harvest_quanta)
    : levels_(std::move(levels)), tx_(std::move(tx_quanta)), harvest_(std::move(harvest_quanta)) {
    check_invariants();
}

int ChannelQuantizer::tx_quanta(int level) const {
    const auto& entry = tx_.at(level - 1);
    if (!entry) throw std::logic_error("transmission infeasible at channel level " + std::to_string(level));
    return *entry;
}

void ChannelQuantizer::check_invariants() const {
    if (levels_.empty()) throw std::invalid_argument("quantizer needs at least one level");
    double total = 0.0;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const auto& l = levels_[i];
        if (!(l.gain > 0.0) || !(l.probability > 0.0 && l.probability <= 1.0))
            throw std::invalid_argument("quantizer level " + std::to_string(i + 1) + " has invalid gain/probability");
        if (i > 0 && !(l.gain > levels_[i - 1].gain))
            throw std::invalid_argument("quantizer gains must be strictly increasing");
        total += l.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("quantizer probabilities must sum to 1");

    if (tx_.empty() && harvest_.empty()) return;
    if (tx_.size() != levels_.size() || harvest_.size() != levels_.size())
        throw std::invalid_argument("quantizer energy tables must have one entry per level");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (harvest_[i] < 0 || (tx_[i] && *tx_[i] < 0))
            throw std::invalid_argument("quantizer energy quanta must be nonnegative");
        if (i == 0) continue;
        if (harvest_[i] < harvest_[i - 1]) throw std::invalid_argument("harvest quanta must be nondecreasing in level");
        // An infeasible level may only be followed by cheaper ones; a feasible one never by an infeasible one.
        if (tx_[i - 1] && !tx_[i]) throw std::invalid_argument("tx quanta must be nonincreasing in level");
        if (tx_[i - 1] && tx_[i] && *tx_[i] > *tx_[i - 1])
            throw std::invalid_argument("tx quanta must be nonincreasing in level");
    }
}

double transmit_energy_j(const SystemParams& params, double h_gain) {
    if (!(h_gain > 0.0)) throw std::invalid_argument("transmit_energy_j: channel gain must be positive");
    const double spectral = params.packet_bits / (params.bandwidth_hz * params.slot_seconds);
    return params.noise_power_w / h_gain * std::expm1(spectral * std::log(2.0));
}

double harvest_energy_j(const SystemParams& params, double g_gain) {
    const double received = params.wet_tx_power_w * g_gain;
    if (received < params.eh_sensitivity_w) return 0.0;
    const double a = params.eh_steepness;
    const double power = params.eh_max_power_w * (-std::expm1(-a * received)) /
                         (1.0 + std::exp(-a * (received - params.eh_inflexion_w)));
    return params.slot_seconds * power;
}

namespace {

// Upper quantile of exp(1): F^-1(p) = -ln(1 - p).
double exp_quantile(double p) {
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-p);
}

// (x + 1) e^-x, the antiderivative (negated) of x e^-x, with the x -> inf limit.
double tail_moment(double x) {
    if (std::isinf(x)) return 0.0;
    return (x + 1.0) * std::exp(-x);
}

}  // namespace

ChannelQuantizer build_quantizer(const SystemParams& params) {
    const int count = params.channel_levels;
    if (count < 1) throw std::invalid_argument("channel_levels must be >= 1");
    const double scale = params.mean_path_gain();
    std::vector<ChannelLevel> levels;
    levels.reserve(count);
    for (int i = 1; i <= count; ++i) {
        const double lo = exp_quantile(static_cast<double>(i - 1) / count);
        const double hi = exp_quantile(static_cast<double>(i) / count);
        const double mass = std::exp(-lo) - (std::isinf(hi) ? 0.0 : std::exp(-hi));
        const double conditional_mean = (tail_moment(lo) - tail_moment(hi)) / mass;
        levels.push_back({scale * conditional_mean, 1.0 / count});
    }
    return energy_quanta_tables(params, ChannelQuantizer(std::move(levels)));
}

ChannelQuantizer energy_quanta_tables(const SystemParams& params, const ChannelQuantizer& q) {
    const double quantum = params.energy_quantum();
    const int b_max = params.b_max();
    const bool lower = params.quantization_mode == QuantizationMode::LowerBound;
    std::vector<std::optional<int>> tx;
    std::vector<int> harvest;
    for (const auto& level : q.levels()) {
        const double tx_ratio = transmit_energy_j(params, level.gain) / quantum;
        const double eh_ratio = harvest_energy_j(params, level.gain) / quantum;
        const double tx_q = lower ? std::ceil(tx_ratio) : std::floor(tx_ratio);
        const double eh_q = lower ? std::floor(eh_ratio) : std::ceil(eh_ratio);
        tx.push_back(tx_q <= b_max ? std::optional<int>(static_cast<int>(tx_q)) : std::nullopt);
        // Anything above a few capacities behaves identically under the battery cap.
        harvest.push_back(static_cast<int>(std::min(eh_q, 1e6)));
    }
    return ChannelQuantizer(q.levels(), std::move(tx), std::move(harvest));
}

void write_quantizer_csv(std::ostream& out, const ChannelQuantizer& q) {
    out << "level,gain,probability,tx_quanta,harvest_quanta\n";
    char buf[128];
    for (int level = 1; level <= q.size(); ++level) {
        const auto& l = q.level(level);
        std::snprintf(buf, sizeof buf, "%d,%.9e,%.9g,", level, l.gain, l.probability);
        out << buf;
        if (q.has_energy_tables()) {
            if (q.tx_feasible(level))
                out << q.tx_quanta(level);
            else
                out << "inf";
            out << ',' << q.harvest_quanta(level) << '\n';
        } else {
            out << ",\n";
        }
    }
}

}  // namespace aoi
