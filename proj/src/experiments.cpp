#include "aoi/experiments.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace aoi {

namespace {

constexpr std::array<std::string_view, 5> kSliceNames{"B", "A", "tau", "h", "g"};

int slice_slot(std::string_view name) {
    if (name == "B" || name == "battery") return 0;
    if (name == "A" || name == "aoi") return 1;
    if (name == "tau") return 2;
    if (name == "h") return 3;
    if (name == "g") return 4;
    return -1;
}

/// Parameter hash recorded in the stored artifacts disagrees with the current config.
class StaleArtifact : public ArtifactError {
public:
    using ArtifactError::ArtifactError;
};

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const ArtifactError& e) {
        err << "artifact error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    body(out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct StoredSolution {
    Policy policy;
    std::optional<ValueTable> values;
    double tol = 0.0;
};

std::optional<StoredSolution> load_stored(const std::filesystem::path& dir, const TransitionModel& model,
                                          const std::string& hash, bool need_values) {
    const auto policy_path = dir / "policy.csv";
    const auto values_path = dir / "values.csv";
    if (!std::filesystem::exists(policy_path)) return std::nullopt;
    if (need_values && !std::filesystem::exists(values_path)) return std::nullopt;

    StoredSolution out;
    std::ifstream pin(policy_path);
    auto loaded = read_policy_csv(pin, model);
    if (loaded.header.params_hash() != hash)
        throw StaleArtifact("policy.csv was produced for params " + loaded.header.params_hash() +
                            ", current config is " + hash);
    out.policy = std::move(loaded.policy);
    out.tol = std::stod(loaded.header.at("tol"));
    if (std::filesystem::exists(values_path)) {
        std::ifstream vin(values_path);
        auto v = read_values_csv(vin, model);
        if (v.header.params_hash() != hash)
            throw StaleArtifact("values.csv was produced for params " + v.header.params_hash() +
                                ", current config is " + hash);
        out.values = std::move(v.values);
        out.tol = v.tol;
    }
    return out;
}

void store_solution(const std::filesystem::path& dir, const SystemParams& params, const TransitionModel& model,
                    const Solution& sol, double tol) {
    std::filesystem::create_directories(dir);
    const auto hash = params_hash_hex(params);
    write_file(dir / "policy.csv", [&](std::ostream& o) { write_policy_csv(o, sol.policy, model, hash, tol); });
    write_file(dir / "values.csv", [&](std::ostream& o) { write_values_csv(o, sol.values, model, hash, tol); });
    write_file(dir / "solve_report.csv", [&](std::ostream& o) { write_solve_report(o, sol, hash, tol); });
    write_file(dir / "params.cfg", [&](std::ostream& o) { o << "# params_hash=" << hash << '\n' << to_config_text(params); });
}

Solution solve(const TransitionModel& model, const ExperimentManifest& m) {
    return m.structured ? structured_value_iteration(model, m.solver) : relative_value_iteration(model, m.solver);
}

std::string slice_file_stem(const SliceSpec& s) {
    std::string stem = "grid";
    for (std::size_t i = 0; i < 5; ++i)
        if (s.fixed[i]) stem += "_" + std::string(kSliceNames[i]) + std::to_string(*s.fixed[i]);
    return stem;
}

}  // namespace

SliceSpec SliceSpec::parse(std::string_view text) {
    SliceSpec spec;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("slice item '" + item + "' must be VAR=LEVEL");
        const int slot = slice_slot(item.substr(0, eq));
        if (slot < 0) throw std::invalid_argument("unknown slice variable '" + item.substr(0, eq) + "'");
        try {
            spec.fixed[static_cast<std::size_t>(slot)] = std::stoi(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("slice level in '" + item + "' is not an integer");
        }
    }
    return spec;
}

std::string SliceSpec::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < 5; ++i) {
        if (!fixed[i]) continue;
        if (!out.empty()) out += ',';
        out += std::string(kSliceNames[i]) + "=" + std::to_string(*fixed[i]);
    }
    return out;
}

SystemParams resolve_params(const ExperimentManifest& m) {
    SystemParams p = m.config_path.empty() ? default_params() : load_params(m.config_path);
    if (!m.overrides.empty()) {
        std::string text;
        for (const auto& o : m.overrides) text += o + "\n";
        p = parse_params(text, p);
    }
    if (m.mode) p.quantization_mode = *m.mode;
    return p;
}

void write_policy_grid(std::ostream& out, const Policy& policy, const TransitionModel& model, const SliceSpec& slice,
                       const std::string& params_hash) {
    const auto& dims = model.dims();
    const int levels = model.space().channel_levels();
    const std::array<std::pair<int, int>, 5> range{
        {{0, dims.b_max}, {1, dims.aoi_max}, {1, dims.tau_max}, {1, levels}, {1, levels}}};
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < 5; ++i) {
        if (!slice.fixed[i]) {
            free.push_back(i);
            continue;
        }
        const int v = *slice.fixed[i];
        if (v < range[i].first || v > range[i].second)
            throw std::invalid_argument("slice level " + std::string(kSliceNames[i]) + "=" + std::to_string(v) +
                                        " outside [" + std::to_string(range[i].first) + ", " +
                                        std::to_string(range[i].second) + "]");
    }
    if (free.size() > 2) throw std::invalid_argument("a policy grid slice must fix at least three variables");

    auto lookup = [&](std::array<int, 5> v) {
        return action_code(policy[model.space().index({v[0], v[1], v[2], v[3], v[4]})]);
    };
    std::array<int, 5> base{};
    for (std::size_t i = 0; i < 5; ++i) base[i] = slice.fixed[i].value_or(range[i].first);

    out << "# kind=policy_grid\n# params_hash=" << params_hash << "\n# slice=" << slice.to_string() << '\n';
    if (free.empty()) {
        out << "action\n" << lookup(base) << '\n';
        return;
    }
    const std::size_t row_var = free[0];
    if (free.size() == 1) {
        out << kSliceNames[row_var] << ",action\n";
        for (int r = range[row_var].first; r <= range[row_var].second; ++r) {
            auto v = base;
            v[row_var] = r;
            out << r << ',' << lookup(v) << '\n';
        }
        return;
    }
    const std::size_t col_var = free[1];
    out << kSliceNames[row_var] << '/' << kSliceNames[col_var];
    for (int c = range[col_var].first; c <= range[col_var].second; ++c) out << ',' << c;
    out << '\n';
    for (int r = range[row_var].first; r <= range[row_var].second; ++r) {
        out << r;
        for (int c = range[col_var].first; c <= range[col_var].second; ++c) {
            auto v = base;
            v[row_var] = r;
            v[col_var] = c;
            out << ',' << lookup(v);
        }
        out << '\n';
    }
}

int cmd_solve(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto params = resolve_params(m);
        require_valid(params);
        const auto model = TransitionModel::from_params(params);
        const auto sol = solve(model, m);
        store_solution(m.out_dir, params, model, sol, m.solver.tol);
        out << "rho=" << format_real(sol.values.rho) << " iterations=" << sol.values.iterations
            << " q_evaluations=" << sol.report.q_evaluations << " converged=" << (sol.report.converged ? "yes" : "no")
            << " wall_s=" << std::fixed << std::setprecision(3) << sol.report.wall_time.count()
            << std::defaultfloat << '\n';
        if (!sol.report.converged) {
            err << "solver did not converge within " << m.solver.max_iter << " iterations (span "
                << sol.values.final_span << ")\n";
            return int(kExitCheckFailed);
        }
        return int(kExitOk);
    });
}

int cmd_policy_grid(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto params = resolve_params(m);
        require_valid(params);
        const auto model = TransitionModel::from_params(params);
        const auto hash = params_hash_hex(params);
        std::ostringstream probe;
        write_policy_grid(probe, Policy{std::vector<Action>(model.size(), kIdleHarvest)}, model, m.slice, hash);

        auto stored = load_stored(m.out_dir, model, hash, false);
        if (!stored) {
            const auto sol = solve(model, m);
            if (!sol.report.converged) throw std::runtime_error("solver did not converge");
            store_solution(m.out_dir, params, model, sol, m.solver.tol);
            stored = StoredSolution{sol.policy, sol.values, m.solver.tol};
        }
        std::ostringstream grid;
        write_policy_grid(grid, stored->policy, model, m.slice, hash);
        const auto path = m.out_dir / (slice_file_stem(m.slice) + ".csv");
        write_file(path, [&](std::ostream& o) { o << grid.str(); });
        out << grid.str();
        return int(kExitOk);
    });
}

int cmd_verify(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto params = resolve_params(m);
        require_valid(params);
        const auto model = TransitionModel::from_params(params);
        const auto hash = params_hash_hex(params);
        const auto stored = load_stored(m.out_dir, model, hash, true);
        if (!stored) throw ArtifactError("no policy.csv/values.csv in " + m.out_dir.string() + "; run solve first");

        const double tol = stored->tol;
        StructureReport report;
        try {
            report = check_value_monotonicity(*stored->values, model, tol);
        } catch (const std::invalid_argument& e) {
            err << "verify: " << e.what() << '\n';
            return int(kExitCheckFailed);
        }
        report = merge(std::move(report), check_threshold_structure(stored->policy, model, &*stored->values, tol));

        write_file(m.out_dir / "structure_report.txt", [&](std::ostream& o) { write_report_text(o, report); });
        write_file(m.out_dir / "violations.csv", [&](std::ostream& o) { write_violations_csv(o, report); });
        if (report.pass()) {
            const auto tables = extract_thresholds(stored->policy, model);
            write_file(m.out_dir / "thresholds.csv", [&](std::ostream& o) { write_thresholds_csv(o, tables); });
        }
        write_report_text(out, report);
        return int(report.pass() ? kExitOk : kExitCheckFailed);
    });
}

int cmd_compare(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto base = resolve_params(m);
        const SweepAxis axis = parse_sweep_axis(m.axis);
        std::vector<std::optional<int>> costs;
        if (axis == SweepAxis::SamplingCost || m.sampling_costs.empty()) {
            costs.push_back(std::nullopt);
        } else {
            for (int c : m.sampling_costs) costs.push_back(c);
        }

        SweepSettings settings;
        settings.solver = m.solver;
        settings.with_baseline = true;
        settings.sim_slots = m.slots;
        settings.seed = m.seed;
        settings.rollout.burn_in = m.burn_in;

        std::ostringstream table;
        table << "# kind=compare\n# params_hash=" << params_hash_hex(base) << "\n# axis=" << to_string(axis)
              << "\n# seed=" << m.seed << "\n# slots=" << m.slots << "\n# burn_in=" << m.burn_in
              << "\n# tol=" << format_real(m.solver.tol) << '\n';
        table << "sampling_cost_quanta," << to_string(axis)
              << ",rho_joint,rho_baseline,relative_gap,sim_joint,ci_joint,sim_baseline,ci_baseline,status\n";
        auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
        for (const auto& cost : costs) {
            SystemParams p = base;
            if (cost) p.sampling_cost_quanta = *cost;
            for (const auto& row : sweep(p, axis, m.values, settings)) {
                const std::string es = axis == SweepAxis::SamplingCost
                                           ? format_real(row.value)
                                           : (p.sampling_cost_quanta ? std::to_string(*p.sampling_cost_quanta) : "");
                std::optional<double> gap;
                if (row.rho_joint && row.rho_baseline) gap = (*row.rho_baseline - *row.rho_joint) / *row.rho_baseline;
                table << es << ',' << format_real(row.value) << ',' << opt(row.rho_joint) << ','
                      << opt(row.rho_baseline) << ',' << opt(gap) << ','
                      << opt(row.sim_joint ? std::optional(row.sim_joint->mean_aoi) : std::nullopt) << ','
                      << opt(row.sim_joint ? std::optional(row.sim_joint->ci_half_width) : std::nullopt) << ','
                      << opt(row.sim_baseline ? std::optional(row.sim_baseline->mean_aoi) : std::nullopt) << ','
                      << opt(row.sim_baseline ? std::optional(row.sim_baseline->ci_half_width) : std::nullopt) << ','
                      << (row.error.empty() ? "ok" : "error: " + row.error) << '\n';
            }
        }
        std::filesystem::create_directories(m.out_dir);
        write_file(m.out_dir / "compare.csv", [&](std::ostream& o) { o << table.str(); });
        out << table.str();
        return int(kExitOk);
    });
}

int cmd_simulate(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto params = resolve_params(m);
        require_valid(params);
        const auto model = TransitionModel::from_params(params);
        const auto hash = params_hash_hex(params);
        auto stored = load_stored(m.out_dir, model, hash, false);
        std::optional<double> rho;
        if (!stored) {
            const auto sol = solve(model, m);
            if (!sol.report.converged) throw std::runtime_error("solver did not converge");
            store_solution(m.out_dir, params, model, sol, m.solver.tol);
            stored = StoredSolution{sol.policy, sol.values, m.solver.tol};
        }
        if (stored->values) rho = stored->values->rho;
        const auto baseline = solve_generate_at_will(model, m.solver);
        RolloutOptions ro;
        ro.burn_in = m.burn_in;
        const State start = default_initial_state(model);
        std::vector<std::pair<std::string, TrajectoryStats>> rows;
        rows.emplace_back("joint", rollout(stored->policy, model, start, m.slots, m.seed, ro));
        rows.emplace_back("generate_at_will",
                          rollout(baseline.solution.policy, baseline.model, start, m.slots, m.seed, ro));
        rows.emplace_back("greedy_transmit",
                          rollout(greedy_transmit_policy(baseline.model), baseline.model, start, m.slots, m.seed, ro));
        write_file(m.out_dir / "simulate.csv", [&](std::ostream& o) { write_stats_csv(o, rows, hash); });
        write_stats_csv(out, rows, hash);
        if (rho) out << "# rho_joint=" << format_real(*rho) << '\n';
        out << "# rho_generate_at_will=" << format_real(baseline.rho()) << '\n';
        return int(kExitOk);
    });
}

int cmd_quantizer(const ExperimentManifest& m, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto params = resolve_params(m);
        // E^S does not affect the quantizer; validate the rest.
        if (!params.sampling_cost_quanta) params.sampling_cost_quanta = 0;
        require_valid(params);
        out << "# kind=quantizer\n# params_hash=" << params_hash_hex(params) << "\n# energy_quantum_j="
            << format_real(params.energy_quantum()) << "\n# mode=" << to_string(params.quantization_mode) << '\n';
        write_quantizer_csv(out, build_quantizer(params));
        return int(kExitOk);
    });
}

}  // namespace aoi
