#include "aoi/system_params.hpp"

#include "aoi/channel_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace aoi {

std::string_view to_string(QuantizationMode mode) {
    return mode == QuantizationMode::LowerBound ? "lower" : "upper";
}

QuantizationMode parse_quantization_mode(std::string_view text) {
    if (text == "lower" || text == "LowerBound") return QuantizationMode::LowerBound;
    if (text == "upper" || text == "UpperBound") return QuantizationMode::UpperBound;
    throw std::invalid_argument("quantization mode must be 'lower' or 'upper', got '" + std::string(text) + "'");
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out = "invalid configuration";
    for (const auto& l : lines) {
        out += "\n  ";
        out += l;
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join_lines(errors)), errors_(std::move(errors)) {}

double SystemParams::energy_quantum() const {
    return battery_capacity_j / static_cast<double>(battery_levels - 1);
}

double SystemParams::mean_path_gain() const {
    return path_gain_ref * std::pow(distance_m, -path_loss_exp);
}

int SystemParams::sampling_cost() const {
    if (!sampling_cost_quanta) throw ConfigError({"sampling_cost_quanta is required"});
    return *sampling_cost_quanta;
}

double dbm_to_watts(double dbm) {
    if (!std::isfinite(dbm)) throw std::invalid_argument("dbm_to_watts: non-finite input");
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watts_to_dbm(double watts) {
    if (!std::isfinite(watts) || watts <= 0.0)
        throw std::invalid_argument("watts_to_dbm: input must be finite and positive");
    return 10.0 * std::log10(watts) + 30.0;
}

SystemParams default_params() {
    SystemParams p;
    p.bandwidth_hz = 1e6;
    p.packet_bits = 12e6;
    p.noise_power_w = dbm_to_watts(-95.0);
    p.wet_tx_power_w = dbm_to_watts(37.0);
    p.eh_max_power_w = dbm_to_watts(12.0);
    p.eh_steepness = 1500.0;
    p.eh_inflexion_w = 0.0022;
    p.eh_sensitivity_w = dbm_to_watts(-13.0);
    p.battery_capacity_j = 0.3e-3;
    p.battery_levels = 10;
    p.aoi_max = 10;
    p.tau_max = 10;
    p.channel_levels = 10;
    p.path_gain_ref = 4e-2;
    p.path_loss_exp = 2.0;
    p.distance_m = 25.0;
    p.slot_seconds = 1.0;
    p.quantization_mode = QuantizationMode::LowerBound;
    return p;
}

std::vector<std::string> validate(const SystemParams& p) {
    std::vector<std::string> errors;
    auto positive = [&](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0)) errors.push_back(std::string(name) + " must be finite and > 0");
    };
    positive(p.bandwidth_hz, "bandwidth_hz");
    if (!(std::isfinite(p.packet_bits) && p.packet_bits >= 0.0)) errors.emplace_back("packet_bits must be finite and >= 0");
    positive(p.noise_power_w, "noise_power_w");
    positive(p.wet_tx_power_w, "wet_tx_power_w");
    positive(p.eh_max_power_w, "eh_max_power_w");
    positive(p.eh_steepness, "eh_steepness");
    positive(p.eh_inflexion_w, "eh_inflexion_w");
    if (!(std::isfinite(p.eh_sensitivity_w) && p.eh_sensitivity_w >= 0.0))
        errors.emplace_back("eh_sensitivity_w must be finite and >= 0");
    positive(p.battery_capacity_j, "battery_capacity_j");
    positive(p.path_gain_ref, "path_gain_ref");
    positive(p.path_loss_exp, "path_loss_exp");
    positive(p.distance_m, "distance_m");
    positive(p.slot_seconds, "slot_seconds");

    if (p.battery_levels < 2) errors.emplace_back("battery_levels >= 2");
    if (p.channel_levels < 1) errors.emplace_back("channel_levels >= 1");
    if (p.aoi_max < 1) errors.emplace_back("aoi_max >= 1");
    if (p.tau_max < 1) errors.emplace_back("tau_max >= 1");
    if (!p.sampling_cost_quanta) {
        errors.emplace_back("sampling_cost_quanta is required");
    } else if (*p.sampling_cost_quanta < 0) {
        errors.emplace_back("sampling_cost_quanta >= 0");
    } else if (p.battery_levels >= 2 && *p.sampling_cost_quanta > p.b_max()) {
        errors.emplace_back("sampling_cost_quanta <= battery_levels - 1 (sampling would never be feasible)");
    }

    if (errors.empty()) {
        const auto q = build_quantizer(p);
        bool any = false;
        for (int level = 1; level <= q.size(); ++level) any = any || q.tx_feasible(level);
        if (!any) errors.emplace_back("no channel level allows a transmission within the battery capacity");
    }
    return errors;
}

void require_valid(const SystemParams& params) {
    auto errors = validate(params);
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

namespace {

struct FieldBinding {
    std::function<void(SystemParams&, const std::string&)> set;
    std::function<std::string(const SystemParams&)> get;
};

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError({key + ": expected a real number, got '" + value + "'"});
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError({key + ": expected an integer, got '" + value + "'"});
    }
}

// Ordered so that the canonical text (and therefore the hash) is stable.
const std::vector<std::pair<std::string, FieldBinding>>& bindings() {
    static const auto table = [] {
        std::vector<std::pair<std::string, FieldBinding>> t;
        auto real = [&t](const char* name, double SystemParams::*field) {
            t.push_back({name,
                         {[field, name](SystemParams& p, const std::string& v) { p.*field = parse_real(name, v); },
                          [field](const SystemParams& p) { return format_real(p.*field); }}});
        };
        auto integer = [&t](const char* name, int SystemParams::*field) {
            t.push_back({name,
                         {[field, name](SystemParams& p, const std::string& v) { p.*field = parse_int(name, v); },
                          [field](const SystemParams& p) { return std::to_string(p.*field); }}});
        };
        real("bandwidth_hz", &SystemParams::bandwidth_hz);
        real("packet_bits", &SystemParams::packet_bits);
        real("noise_power_w", &SystemParams::noise_power_w);
        real("wet_tx_power_w", &SystemParams::wet_tx_power_w);
        real("eh_max_power_w", &SystemParams::eh_max_power_w);
        real("eh_steepness", &SystemParams::eh_steepness);
        real("eh_inflexion_w", &SystemParams::eh_inflexion_w);
        real("eh_sensitivity_w", &SystemParams::eh_sensitivity_w);
        real("battery_capacity_j", &SystemParams::battery_capacity_j);
        integer("battery_levels", &SystemParams::battery_levels);
        integer("aoi_max", &SystemParams::aoi_max);
        integer("tau_max", &SystemParams::tau_max);
        integer("channel_levels", &SystemParams::channel_levels);
        t.push_back({"sampling_cost_quanta",
                     {[](SystemParams& p, const std::string& v) {
                          p.sampling_cost_quanta = parse_int("sampling_cost_quanta", v);
                      },
                      [](const SystemParams& p) {
                          return p.sampling_cost_quanta ? std::to_string(*p.sampling_cost_quanta) : std::string("unset");
                      }}});
        real("path_gain_ref", &SystemParams::path_gain_ref);
        real("path_loss_exp", &SystemParams::path_loss_exp);
        real("distance_m", &SystemParams::distance_m);
        real("slot_seconds", &SystemParams::slot_seconds);
        t.push_back({"quantization_mode",
                     {[](SystemParams& p, const std::string& v) {
                          try {
                              p.quantization_mode = parse_quantization_mode(v);
                          } catch (const std::invalid_argument& e) {
                              throw ConfigError({std::string("quantization_mode: ") + e.what()});
                          }
                      },
                      [](const SystemParams& p) { return std::string(to_string(p.quantization_mode)); }}});
        return t;
    }();
    return table;
}

const FieldBinding* find_binding(const std::string& key) {
    for (const auto& [name, binding] : bindings())
        if (name == key) return &binding;
    return nullptr;
}

}  // namespace

SystemParams parse_params(std::string_view text, const SystemParams& base) {
    SystemParams p = base;
    std::vector<std::string> errors;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        try {
            if (key.size() > 4 && key.ends_with("_dbm")) {
                const std::string watts_key = key.substr(0, key.size() - 4) + "_w";
                const auto* b = find_binding(watts_key);
                if (!b) {
                    errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
                    continue;
                }
                b->set(p, format_real(dbm_to_watts(parse_real(key, value))));
            } else if (const auto* b = find_binding(key)) {
                b->set(p, value);
            } else {
                errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            for (const auto& msg : e.errors()) errors.push_back("line " + std::to_string(line_no) + ": " + msg);
        }
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return p;
}

SystemParams load_params(const std::string& path, const SystemParams& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_params(buf.str(), base);
}

std::string to_config_text(const SystemParams& params) {
    std::string out;
    for (const auto& [name, binding] : bindings()) {
        const auto value = binding.get(params);
        if (name == "sampling_cost_quanta" && value == "unset") continue;
        out += name + " = " + value + "\n";
    }
    return out;
}

std::uint64_t params_hash(const SystemParams& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : to_config_text(params)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string params_hash_hex(const SystemParams& params) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(params_hash(params)));
    return buf;
}

}  // namespace aoi
