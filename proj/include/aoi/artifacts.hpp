#pragma once

#include "aoi/simulator.hpp"
#include "aoi/solver.hpp"

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace aoi {

/// Malformed or mismatched artifact file.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Every artifact starts with `# key=value` comment lines. Always present:
 * kind, params_hash, layout (state index layout version), tie_break.
 */
struct ArtifactHeader {
    std::map<std::string, std::string> meta;

    const std::string& at(const std::string& key) const;
    std::string kind() const { return at("kind"); }
    std::string params_hash() const { return at("params_hash"); }
};

inline constexpr const char* kTieBreakOrder = "IH<SH<IT<ST";

std::string format_real(double v);

void write_policy_csv(std::ostream& out, const Policy& policy, const TransitionModel& model,
                      const std::string& params_hash, double tol);
void write_values_csv(std::ostream& out, const ValueTable& values, const TransitionModel& model,
                      const std::string& params_hash, double tol);
/// Iteration count, evaluation count and span history. Wall time is left out so reruns are byte-identical.
void write_solve_report(std::ostream& out, const Solution& solution, const std::string& params_hash, double tol);
void write_stats_csv(std::ostream& out, const std::vector<std::pair<std::string, TrajectoryStats>>& rows,
                     const std::string& params_hash);

struct LoadedPolicy {
    ArtifactHeader header;
    Policy policy;
};

struct LoadedValues {
    ArtifactHeader header;
    ValueTable values;
    double tol = 0.0;
};

/// Throws ArtifactError on malformed content or when the layout does not match `model`.
LoadedPolicy read_policy_csv(std::istream& in, const TransitionModel& model);
LoadedValues read_values_csv(std::istream& in, const TransitionModel& model);

}  // namespace aoi
