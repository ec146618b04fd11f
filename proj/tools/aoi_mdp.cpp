// aoi_mdp: solve, inspect and simulate the status-update MDP of an RF-powered source.

#include "aoi/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace aoi;

    CLI::App app{"AoI-optimal sampling and updating for an RF-powered source"};
    app.require_subcommand(1, 1);

    ExperimentManifest m;
    std::string config, out_dir = "out", slice, mode, values, sampling_costs;
    double tol = m.solver.tol;
    int max_iter = m.solver.max_iter;
    std::vector<std::string> overrides;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Parameter file (key = value lines)");
        sub->add_option("--set", overrides, "Override one parameter, e.g. --set sampling_cost_quanta=3");
        sub->add_option("--mode", mode, "Quantization mode")->check(CLI::IsMember({"lower", "upper"}));
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--tol", tol, "Span tolerance")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_flag("--structured", m.structured, "Use the threshold-propagating sweep");
    };
    auto sim_opts = [&](CLI::App* sub) {
        sub->add_option("--seed", m.seed, "RNG seed")->capture_default_str();
        sub->add_option("--slots", m.slots, "Simulated slots after burn-in (0 disables simulation in compare)")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--burn-in", m.burn_in, "Discarded warm-up slots")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Run relative value iteration and store the artifacts");
    common(solve);
    auto* grid = app.add_subcommand("grid", "Export a 2-D policy slice");
    common(grid);
    grid->add_option("--slice", slice, "Fixed variables, e.g. B=5,h=5,g=5")->required();
    auto* verify = app.add_subcommand("verify", "Check value monotonicity and threshold structure");
    common(verify);
    auto* compare = app.add_subcommand("compare", "Sweep joint vs generate-at-will average AoI");
    common(compare);
    sim_opts(compare);
    compare->add_option("--axis", m.axis, "packet_bits | sampling_cost_quanta")->capture_default_str();
    compare->add_option("--values", values, "Comma-separated axis values");
    compare->add_option("--sampling-costs", sampling_costs, "Comma-separated E^S values, one sweep each");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo rollout of the stored policy");
    common(simulate);
    sim_opts(simulate);
    auto* quantizer = app.add_subcommand("quantizer", "Print the channel quantizer and energy tables");
    common(quantizer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        m.config_path = config;
        m.overrides = overrides;
        m.out_dir = out_dir;
        m.solver.tol = tol;
        m.solver.max_iter = max_iter;
        if (!mode.empty()) m.mode = parse_quantization_mode(mode);
        if (!slice.empty()) m.slice = SliceSpec::parse(slice);
        auto split = [](const std::string& text) {
            std::vector<std::string> items;
            std::string item;
            std::istringstream in(text);
            while (std::getline(in, item, ','))
                if (!item.empty()) items.push_back(item);
            return items;
        };
        for (const auto& v : split(values)) m.values.push_back(std::stod(v));
        for (const auto& v : split(sampling_costs)) m.sampling_costs.push_back(std::stoi(v));
    } catch (const std::exception& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    }

    if (*solve) return cmd_solve(m, std::cout, std::cerr);
    if (*grid) return cmd_policy_grid(m, std::cout, std::cerr);
    if (*verify) return cmd_verify(m, std::cout, std::cerr);
    if (*compare) return cmd_compare(m, std::cout, std::cerr);
    if (*simulate) return cmd_simulate(m, std::cout, std::cerr);
    return cmd_quantizer(m, std::cout, std::cerr);
}
