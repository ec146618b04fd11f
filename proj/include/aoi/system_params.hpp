#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

/// Rounding regime applied to per-slot energies when expressed in battery quanta.
/// LowerBound rounds transmit energy up and harvested energy down; UpperBound swaps them.
enum class QuantizationMode { LowerBound, UpperBound };

std::string_view to_string(QuantizationMode mode);
QuantizationMode parse_quantization_mode(std::string_view text);

/**
 * Physical constants and discretization choices of the wireless powered
 * source/destination link. Powers are stored in watts, energies in joules.
 */
struct SystemParams {
    double bandwidth_hz = 0.0;
    double packet_bits = 0.0;
    double noise_power_w = 0.0;
    double wet_tx_power_w = 0.0;
    double eh_max_power_w = 0.0;
    double eh_steepness = 0.0;       // 1/W
    double eh_inflexion_w = 0.0;
    double eh_sensitivity_w = 0.0;
    double battery_capacity_j = 0.0;
    int battery_levels = 0;          // b_max + 1
    int aoi_max = 0;
    int tau_max = 0;
    int channel_levels = 0;
    std::optional<int> sampling_cost_quanta;  // E^S, must be set before building a model
    double path_gain_ref = 0.0;
    double path_loss_exp = 0.0;
    double distance_m = 0.0;
    double slot_seconds = 1.0;
    QuantizationMode quantization_mode = QuantizationMode::LowerBound;

    int b_max() const { return battery_levels - 1; }
    /// Joules per battery quantum.
    double energy_quantum() const;
    /// Mean large-scale gain delta * d^-beta.
    double mean_path_gain() const;
    /// E^S; throws ConfigError when unset.
    int sampling_cost() const;
};

/// Invalid configuration. what() lists every violated field, one per line.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Link configuration of the numerical study: 1 MHz, 25 m, 37 dBm WET, 12 Mbit packets,
/// 0.3 mJ battery, ten levels per state variable. E^S is left unset.
SystemParams default_params();

/// Empty when the configuration is usable; otherwise one message per violation.
std::vector<std::string> validate(const SystemParams& params);
/// Throws ConfigError with the full violation list.
void require_valid(const SystemParams& params);

/**
 * Flat `key = value` text, one entry per line, `#` starts a comment.
 * Keys are the field names above; any `*_w` field may instead be given as `*_dbm`.
 * Unspecified keys keep the values of `base`.
 */
SystemParams parse_params(std::string_view text, const SystemParams& base = default_params());
SystemParams load_params(const std::string& path, const SystemParams& base = default_params());

/// Canonical serialization accepted by parse_params (watts, full precision).
std::string to_config_text(const SystemParams& params);

/// FNV-1a over the canonical text; stable across runs and platforms.
std::uint64_t params_hash(const SystemParams& params);
std::string params_hash_hex(const SystemParams& params);

}  // namespace aoi
