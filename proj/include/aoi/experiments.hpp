#pragma once

#include "aoi/artifacts.hpp"
#include "aoi/simulator.hpp"
#include "aoi/structure_analysis.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aoi {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

/// Fixed levels for a policy grid, indexed B, A, tau, h, g. Unfixed variables become grid axes.
struct SliceSpec {
    std::array<std::optional<int>, 5> fixed{};

    /// "B=5,g=5,h=5"; names: B|battery, A|aoi, tau, h, g.
    static SliceSpec parse(std::string_view text);
    std::string to_string() const;
};

struct ExperimentManifest {
    std::string config_path;              // empty: built-in defaults
    std::vector<std::string> overrides;   // extra `key=value` lines applied after the config
    std::optional<QuantizationMode> mode;
    std::filesystem::path out_dir = "out";
    SolverOptions solver;
    std::uint64_t seed = 1;
    std::int64_t slots = 1000000;
    std::int64_t burn_in = 10000;
    SliceSpec slice;
    std::string axis = "packet_bits";
    std::vector<double> values;
    std::vector<int> sampling_costs;  // compare: one sweep per E^S (default: the config's)
    bool structured = false;
};

/// Config file, then overrides, then --mode.
SystemParams resolve_params(const ExperimentManifest& m);

/// Writes policy.csv, values.csv, solve_report.csv, params.cfg into out_dir.
int cmd_solve(const ExperimentManifest& m, std::ostream& out, std::ostream& err);
/// Writes grid_<slice>.csv with one action code per cell and echoes it to `out`.
int cmd_policy_grid(const ExperimentManifest& m, std::ostream& out, std::ostream& err);
/// Runs both structure checks on the stored artifacts; writes structure_report.txt, violations.csv, thresholds.csv.
int cmd_verify(const ExperimentManifest& m, std::ostream& out, std::ostream& err);
/// Joint vs generate-at-will sweep; writes compare.csv.
int cmd_compare(const ExperimentManifest& m, std::ostream& out, std::ostream& err);
/// Rolls out the stored (or freshly solved) joint policy and the baseline; writes simulate.csv.
int cmd_simulate(const ExperimentManifest& m, std::ostream& out, std::ostream& err);
/// Dumps the channel quantizer as CSV to `out`.
int cmd_quantizer(const ExperimentManifest& m, std::ostream& out, std::ostream& err);

/// Grid CSV body for a slice; exposed for tests.
void write_policy_grid(std::ostream& out, const Policy& policy, const TransitionModel& model, const SliceSpec& slice,
                       const std::string& params_hash);

}  // namespace aoi
