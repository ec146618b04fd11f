#pragma once

#include "aoi/system_params.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace aoi {

struct ChannelLevel {
    double gain = 0.0;         // linear power gain, path loss included
    double probability = 0.0;
};

/**
 * Discrete channel gain levels shared by the uplink and the downlink, with the
 * energy needed to transmit one packet and the energy harvested in one slot,
 * both already rounded to battery quanta.
 *
 * Levels are addressed 1..size(), matching the h/g state variables.
 */
class ChannelQuantizer {
public:
    ChannelQuantizer() = default;
    /// Levels only; energy tables are empty until energy_quanta_tables() fills them.
    explicit ChannelQuantizer(std::vector<ChannelLevel> levels);
    /// Fully specified quantizer. `tx_quanta[i]` is nullopt where transmission is never affordable.
    ChannelQuantizer(std::vector<ChannelLevel> levels, std::vector<std::optional<int>> tx_quanta,
                     std::vector<int> harvest_quanta);

    int size() const { return static_cast<int>(levels_.size()); }
    bool has_energy_tables() const { return !harvest_.empty(); }

    const ChannelLevel& level(int level) const { return levels_.at(level - 1); }
    const std::vector<ChannelLevel>& levels() const { return levels_; }
    double probability(int level) const { return level_at(level).probability; }

    bool tx_feasible(int level) const { return tx_.at(level - 1).has_value(); }
    /// Throws std::logic_error for an infeasible level.
    int tx_quanta(int level) const;
    const std::optional<int>& tx_entry(int level) const { return tx_.at(level - 1); }
    int harvest_quanta(int level) const { return harvest_.at(level - 1); }

private:
    const ChannelLevel& level_at(int level) const { return levels_.at(level - 1); }
    void check_invariants() const;

    std::vector<ChannelLevel> levels_;
    std::vector<std::optional<int>> tx_;
    std::vector<int> harvest_;
};

/// Energy (J) for delivering packet_bits within one slot at uplink gain `h_gain` (Shannon rate).
double transmit_energy_j(const SystemParams& params, double h_gain);

/// Energy (J) harvested in one WET slot at downlink gain `g_gain` (logistic harvester model).
double harvest_energy_j(const SystemParams& params, double g_gain);

/**
 * Splits the exp(1) small-scale fading gain into channel_levels equiprobable bins and
 * represents each bin by its conditional mean, scaled by the mean path gain.
 * The energy tables are filled.
 */
ChannelQuantizer build_quantizer(const SystemParams& params);

/// Rounds transmit/harvest energies of each level of `q` to quanta per params.quantization_mode.
ChannelQuantizer energy_quanta_tables(const SystemParams& params, const ChannelQuantizer& q);

/// CSV: level,gain,probability,tx_quanta,harvest_quanta ("inf" marks infeasible transmission).
void write_quantizer_csv(std::ostream& out, const ChannelQuantizer& q);

}  // namespace aoi
