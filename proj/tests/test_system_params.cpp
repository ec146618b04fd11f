#include "aoi/system_params.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace aoi;

namespace {

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
    return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

SystemParams with_es(int es) {
    auto p = default_params();
    p.sampling_cost_quanta = es;
    return p;
}

}  // namespace

TEST_CASE("dbm_to_watts reference points") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(dbm_to_watts(37.0) - std::pow(10.0, 0.7)) <= 1e-12);
    CHECK(std::abs(dbm_to_watts(37.0) - 5.0119) <= 1e-4);
    CHECK(std::abs(dbm_to_watts(-95.0) - 3.1623e-13) <= 1e-17);
    CHECK_THROWS_AS(dbm_to_watts(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(dbm_to_watts(INFINITY), std::invalid_argument);
    CHECK_THROWS_AS(watts_to_dbm(0.0), std::invalid_argument);
}

TEST_CASE("dBm conversion properties") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dbm(-150.0, 60.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = dbm(rng);
        CHECK(dbm_to_watts(p + 10.0) / dbm_to_watts(p) == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(watts_to_dbm(dbm_to_watts(p)) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("default parameters") {
    const auto p = default_params();
    CHECK(std::abs(p.noise_power_w - 3.1623e-13) <= 1e-17);
    CHECK(p.energy_quantum() == doctest::Approx(0.3e-3 / 9.0).epsilon(1e-15));
    CHECK(std::abs(p.energy_quantum() - 3.333e-5) < 1e-8);
    CHECK(p.mean_path_gain() == doctest::Approx(6.4e-5).epsilon(1e-15));
    CHECK(p.battery_levels == 10);
    CHECK(p.channel_levels == 10);
    CHECK(p.aoi_max == 10);
    CHECK(p.tau_max == 10);
    CHECK(p.quantization_mode == QuantizationMode::LowerBound);
    CHECK_FALSE(p.sampling_cost_quanta.has_value());
    CHECK_THROWS_AS(p.sampling_cost(), ConfigError);
    CHECK(mentions(validate(p), "sampling_cost_quanta"));
}

TEST_CASE("validation") {
    CHECK(validate(with_es(3)).empty());
    CHECK_NOTHROW(require_valid(with_es(4)));

    auto p = with_es(3);
    p.battery_levels = 1;
    CHECK(mentions(validate(p), "battery_levels >= 2"));

    p = with_es(50);
    CHECK(mentions(validate(p), "sampling_cost_quanta"));
    CHECK_THROWS_AS(require_valid(p), ConfigError);

    p = with_es(3);
    p.channel_levels = 0;
    p.aoi_max = 0;
    p.bandwidth_hz = -1.0;
    const auto errors = validate(p);
    CHECK(mentions(errors, "channel_levels"));
    CHECK(mentions(errors, "aoi_max"));
    CHECK(mentions(errors, "bandwidth_hz"));

    // A packet so large that no fade level can afford it.
    p = with_es(3);
    p.packet_bits = 60e6;
    CHECK(mentions(validate(p), "no channel level allows a transmission"));

    try {
        p = with_es(3);
        p.tau_max = 0;
        p.distance_m = 0.0;
        require_valid(p);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.errors().size() == 2);
    }
}

TEST_CASE("config text parsing") {
    const auto p = parse_params("# comment\nsampling_cost_quanta = 4\npacket_bits = 8e6  \n\nwet_tx_power_dbm = 30\n"
                                "quantization_mode = upper\n");
    CHECK(p.sampling_cost() == 4);
    CHECK(p.packet_bits == 8e6);
    CHECK(p.wet_tx_power_w == doctest::Approx(1.0));
    CHECK(p.quantization_mode == QuantizationMode::UpperBound);

    try {
        parse_params("sampling_cost_quanta = 3\nbogus = 1\naoi_max = ten\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.errors().size() == 2);
        CHECK(e.errors()[0].find("line 2") != std::string::npos);
        CHECK(e.errors()[1].find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_params("no equals sign"), ConfigError);
    CHECK_THROWS_AS(load_params("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config text round trip preserves the hash") {
    auto p = with_es(3);
    p.packet_bits = 1.0 / 3.0 * 1e7;
    p.quantization_mode = QuantizationMode::UpperBound;
    const auto q = parse_params(to_config_text(p), SystemParams{});
    CHECK(params_hash(q) == params_hash(p));
    CHECK(to_config_text(q) == to_config_text(p));
    CHECK(params_hash_hex(p).size() == 16);

    auto r = p;
    r.sampling_cost_quanta = 4;
    CHECK(params_hash(r) != params_hash(p));
    r = p;
    r.sampling_cost_quanta.reset();
    CHECK(params_hash(r) != params_hash(p));
}

TEST_CASE("quantization mode names") {
    CHECK(to_string(QuantizationMode::LowerBound) == "lower");
    CHECK(parse_quantization_mode("upper") == QuantizationMode::UpperBound);
    CHECK_THROWS_AS(parse_quantization_mode("middle"), std::invalid_argument);
}
