#include "aoi/artifacts.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace aoi {

const std::string& ArtifactHeader::at(const std::string& key) const {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ArtifactError("artifact header lacks '" + key + "'");
    return it->second;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_common_header(std::ostream& out, const char* kind, const std::string& params_hash, double tol) {
    out << "# kind=" << kind << '\n'
        << "# params_hash=" << params_hash << '\n'
        << "# layout=" << StateSpace::kLayoutVersion << '\n'
        << "# index_order=battery,aoi,tau,h,g\n"
        << "# tol=" << format_real(tol) << '\n'
        << "# tie_break=" << kTieBreakOrder << '\n';
}

void write_state_columns(std::ostream& out, std::size_t i, const State& s) {
    out << i << ',' << s.battery << ',' << s.aoi << ',' << s.tau << ',' << s.h_level << ',' << s.g_level << ',';
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

// Reads the comment header and the column-name row; leaves `in` at the first data row.
ArtifactHeader read_header(std::istream& in, const char* expected_kind, const std::string& expected_columns) {
    ArtifactHeader h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) h.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (line != expected_columns) throw ArtifactError("unexpected column header '" + line + "'");
        if (h.kind() != expected_kind)
            throw ArtifactError("expected a " + std::string(expected_kind) + " artifact, found " + h.kind());
        if (h.at("layout") != std::to_string(StateSpace::kLayoutVersion))
            throw ArtifactError("unsupported state layout version " + h.at("layout"));
        return h;
    }
    throw ArtifactError("artifact ended before its column header");
}

template <class OnRow>
void read_state_rows(std::istream& in, const TransitionModel& model, OnRow on_row) {
    std::string line;
    std::size_t expected = 0;
    const auto& space = model.space();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7) throw ArtifactError("malformed row: " + line);
        std::size_t index = 0;
        State s;
        try {
            index = std::stoull(f[0]);
            s = {std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]), std::stoi(f[5])};
        } catch (const std::exception&) {
            throw ArtifactError("malformed row: " + line);
        }
        if (index != expected || index >= space.size() || !space.contains(s) || space.index(s) != index)
            throw ArtifactError("row does not match the model's state layout: " + line);
        on_row(index, f[6]);
        ++expected;
    }
    if (expected != space.size())
        throw ArtifactError("artifact has " + std::to_string(expected) + " states, model has " +
                            std::to_string(space.size()));
}

}  // namespace

void write_policy_csv(std::ostream& out, const Policy& policy, const TransitionModel& model,
                      const std::string& params_hash, double tol) {
    write_common_header(out, "policy", params_hash, tol);
    out << "# provenance=" << to_string(policy.provenance) << '\n';
    out << "index,battery,aoi,tau,h,g,action\n";
    const auto& space = model.space();
    for (std::size_t i = 0; i < model.size(); ++i) {
        write_state_columns(out, i, space.state(i));
        out << action_code(policy[i]) << '\n';
    }
}

void write_values_csv(std::ostream& out, const ValueTable& values, const TransitionModel& model,
                      const std::string& params_hash, double tol) {
    write_common_header(out, "values", params_hash, tol);
    out << "# rho=" << format_real(values.rho) << '\n'
        << "# iterations=" << values.iterations << '\n'
        << "# final_span=" << format_real(values.final_span) << '\n';
    out << "index,battery,aoi,tau,h,g,value\n";
    const auto& space = model.space();
    for (std::size_t i = 0; i < model.size(); ++i) {
        write_state_columns(out, i, space.state(i));
        out << format_real(values.values[i]) << '\n';
    }
}

void write_solve_report(std::ostream& out, const Solution& solution, const std::string& params_hash, double tol) {
    out << "# kind=solve_report\n"
        << "# params_hash=" << params_hash << '\n'
        << "# layout=" << StateSpace::kLayoutVersion << '\n'
        << "# tol=" << format_real(tol) << '\n'
        << "# tie_break=" << kTieBreakOrder << '\n'
        << "# provenance=" << to_string(solution.policy.provenance) << '\n'
        << "# converged=" << (solution.report.converged ? "true" : "false") << '\n'
        << "# iterations=" << solution.values.iterations << '\n'
        << "# q_evaluations=" << solution.report.q_evaluations << '\n'
        << "# rho=" << format_real(solution.values.rho) << '\n';
    out << "iteration,span\n";
    for (std::size_t k = 0; k < solution.report.history.size(); ++k)
        out << k + 1 << ',' << format_real(solution.report.history[k]) << '\n';
}

void write_stats_csv(std::ostream& out, const std::vector<std::pair<std::string, TrajectoryStats>>& rows,
                     const std::string& params_hash) {
    out << "# kind=trajectory_stats\n# params_hash=" << params_hash << '\n';
    out << "policy,seed,slots,mean_aoi,ci_half_width,mean_battery,freq_IH,freq_SH,freq_IT,freq_ST\n";
    for (const auto& [name, st] : rows) {
        out << name << ',' << st.seed << ',' << st.slots_simulated << ',' << format_real(st.mean_aoi) << ','
            << format_real(st.ci_half_width) << ',' << format_real(st.mean_battery);
        for (double f : st.action_frequencies) out << ',' << format_real(f);
        out << '\n';
    }
}

LoadedPolicy read_policy_csv(std::istream& in, const TransitionModel& model) {
    LoadedPolicy out;
    out.header = read_header(in, "policy", "index,battery,aoi,tau,h,g,action");
    out.policy.actions.resize(model.size());
    try {
        out.policy.provenance = parse_provenance(out.header.at("provenance"));
    } catch (const std::invalid_argument& e) {
        throw ArtifactError(e.what());
    }
    read_state_rows(in, model, [&](std::size_t i, const std::string& field) {
        const auto a = parse_action_code(field);
        if (!a) throw ArtifactError("unknown action code '" + field + "'");
        out.policy.actions[i] = *a;
    });
    return out;
}

LoadedValues read_values_csv(std::istream& in, const TransitionModel& model) {
    LoadedValues out;
    out.header = read_header(in, "values", "index,battery,aoi,tau,h,g,value");
    try {
        out.values.rho = std::stod(out.header.at("rho"));
        out.values.iterations = std::stoi(out.header.at("iterations"));
        out.values.final_span = std::stod(out.header.at("final_span"));
        out.tol = std::stod(out.header.at("tol"));
    } catch (const std::invalid_argument&) {
        throw ArtifactError("malformed numeric header in values artifact");
    }
    out.values.values.resize(model.size());
    read_state_rows(in, model, [&](std::size_t i, const std::string& field) {
        try {
            out.values.values[i] = std::stod(field);
        } catch (const std::exception&) {
            throw ArtifactError("malformed value '" + field + "'");
        }
    });
    return out;
}

}  // namespace aoi
