#include "aoi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aoi {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::PlainVIA: return "PlainVIA";
        case Provenance::StructuredVIA: return "StructuredVIA";
        case Provenance::Baseline: return "Baseline";
        case Provenance::External: return "External";
    }
    return "External";
}

Provenance parse_provenance(std::string_view text) {
    for (auto p : {Provenance::PlainVIA, Provenance::StructuredVIA, Provenance::Baseline, Provenance::External})
        if (to_string(p) == text) return p;
    throw std::invalid_argument("unknown policy provenance '" + std::string(text) + "'");
}

std::vector<double> expected_continuation(std::span<const double> values, const TransitionModel& model) {
    const auto& probs = model.cell_probabilities();
    const std::size_t cells = probs.size();
    const std::size_t cores = model.space().num_cores();
    if (values.size() != cores * cells) throw std::invalid_argument("value table size does not match model");
    std::vector<double> w(cores);
    for (std::size_t c = 0; c < cores; ++c) {
        const double* v = values.data() + c * cells;
        double sum = 0.0;
        for (std::size_t k = 0; k < cells; ++k) sum += probs[k] * v[k];
        w[c] = sum;
    }
    return w;
}

double bellman_q(const State& s, Action a, const ValueTable& values, const TransitionModel& model) {
    const std::size_t i = model.space().index(s);
    const auto next = model.next_core(i, a);
    if (next < 0)
        throw ContractViolation(std::string("action ") + std::string(action_code(a)) + " infeasible in " + describe(s));
    if (values.values.size() != model.size()) throw std::invalid_argument("value table size does not match model");
    // Same summation order as expected_continuation so both routes agree bit for bit.
    const auto& probs = model.cell_probabilities();
    const std::size_t cells = probs.size();
    const double* v = values.values.data() + static_cast<std::size_t>(next) * cells;
    double sum = 0.0;
    for (std::size_t k = 0; k < cells; ++k) sum += probs[k] * v[k];
    return stage_cost(s) + sum;
}

namespace {

struct Greedy {
    double continuation;
    Action action;
};

// argmin over feasible actions of the continuation; the stage cost is action-independent.
inline Greedy full_argmin(const TransitionModel& model, std::size_t s, const std::vector<double>& w,
                          std::uint64_t& evaluations) {
    const ActionSet feasible = model.feasible(s);
    Greedy best{std::numeric_limits<double>::infinity(), kIdleHarvest};
    for (auto a : kActionOrder) {
        if (!feasible.contains(a)) continue;
        const double q = w[static_cast<std::size_t>(model.next_core(s, a))];
        ++evaluations;
        if (q < best.continuation) best = {q, a};
    }
    return best;
}

class PlainSweep {
public:
    explicit PlainSweep(const TransitionModel& model) : model_(model) {}

    void operator()(const std::vector<double>& w, std::vector<double>& tv, std::vector<Action>& actions,
                    std::uint64_t& evaluations) const {
        const auto& space = model_.space();
        const std::size_t cells = static_cast<std::size_t>(space.cells());
        for (std::size_t core = 0; core < space.num_cores(); ++core) {
            const double cost = static_cast<double>(space.core(core).aoi);
            for (std::size_t k = 0; k < cells; ++k) {
                const std::size_t s = core * cells + k;
                const Greedy g = full_argmin(model_, s, w, evaluations);
                tv[s] = cost + g.continuation;
                actions[s] = g.action;
            }
        }
    }

private:
    const TransitionModel& model_;
};

class StructuredSweep {
public:
    explicit StructuredSweep(const TransitionModel& model) : model_(model) {
        const auto& q = model.quantizer();
        const int b_max = model.dims().b_max;
        for (int g = 1; g <= q.size(); ++g) effective_harvest_.push_back(std::min(q.harvest_quanta(g), b_max));
    }

    void operator()(const std::vector<double>& w, std::vector<double>& tv, std::vector<Action>& actions,
                    std::uint64_t& evaluations) const {
        const auto& space = model_.space();
        const auto& dims = model_.dims();
        const int levels = space.channel_levels();
        const std::size_t cells = static_cast<std::size_t>(space.cells());
        const std::size_t battery_stride = static_cast<std::size_t>(dims.aoi_max) * dims.tau_max * cells;
        const std::size_t aoi_stride = static_cast<std::size_t>(dims.tau_max) * cells;
        const std::size_t tau_stride = cells;

        for (int b = dims.b_max; b >= 0; --b) {
            for (int a = 1; a <= dims.aoi_max; ++a) {
                for (int t = 1; t <= dims.tau_max; ++t) {
                    const std::size_t core = space.core_index({b, a, t});
                    for (int h = 1; h <= levels; ++h) {
                        for (int g = 1; g <= levels; ++g) {
                            const std::size_t s = core * cells + static_cast<std::size_t>(h - 1) * levels + (g - 1);
                            const ActionSet feasible = model_.feasible(s);

                            std::optional<Action> forced;
                            bool conflict = false;
                            auto propose = [&](Action act) {
                                if (!feasible.contains(act)) {
                                    conflict = true;
                                } else if (forced && *forced != act) {
                                    conflict = true;
                                } else {
                                    forced = act;
                                }
                            };
                            if (b < dims.b_max) {
                                const Action up = actions[s + battery_stride];
                                const int regime_i = dims.b_max - effective_harvest_[g - 1];
                                if (up == kIdleHarvest && b >= regime_i) propose(kIdleHarvest);
                                if (up == kSampleHarvest && b >= regime_i + dims.sampling_cost) propose(kSampleHarvest);
                            }
                            if (a > 1) {
                                const Action lower_age = actions[s - aoi_stride];
                                if (lower_age.transmits()) propose(lower_age);
                            }
                            if (t > 1 && actions[s - tau_stride] == kSampleHarvest) propose(kSampleHarvest);

                            Greedy best;
                            if (forced && !conflict) {
                                best = {w[static_cast<std::size_t>(model_.next_core(s, *forced))], *forced};
                                ++evaluations;
                            } else {
                                best = full_argmin(model_, s, w, evaluations);
                            }
                            tv[s] = static_cast<double>(a) + best.continuation;
                            actions[s] = best.action;
                        }
                    }
                }
            }
        }
    }

private:
    const TransitionModel& model_;
    std::vector<int> effective_harvest_;
};

template <class Sweep>
Solution iterate(const TransitionModel& model, const SolverOptions& options, const Sweep& sweep, Provenance provenance) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
    if (!(options.self_loop >= 0.0 && options.self_loop < 1.0))
        throw std::invalid_argument("solver self_loop must lie in [0, 1)");
    const double keep = options.self_loop, move = 1.0 - options.self_loop;
    const auto start = std::chrono::steady_clock::now();

    const std::size_t n = model.size();
    std::vector<double> v(n, 0.0), tv(n);
    std::vector<Action> actions(n, kIdleHarvest);
    Solution out;
    out.policy.provenance = provenance;
    double lo = 0.0, hi = 0.0;

    for (int k = 1; k <= options.max_iter; ++k) {
        auto w = expected_continuation(v, model);
        if (keep > 0.0)
            for (double& x : w) x *= move;
        sweep(w, tv, actions, out.report.q_evaluations);
        if (keep > 0.0)
            for (std::size_t s = 0; s < n; ++s) tv[s] += keep * v[s];

        lo = std::numeric_limits<double>::infinity();
        hi = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n; ++s) {
            const double d = tv[s] - v[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        const double span = hi - lo;
        out.report.history.push_back(span);
        out.values.iterations = k;
        out.values.final_span = span;
        if (span <= options.tol) {
            out.report.converged = true;
            break;
        }
        if (k == options.max_iter) break;
        const double ref = tv[0];
        for (std::size_t s = 0; s < n; ++s) v[s] = tv[s] - ref;
    }

    // Relative values of the transformed chain are those of the original divided by (1 - self_loop).
    if (keep > 0.0)
        for (double& x : v) x *= move;
    out.values.values = std::move(v);
    out.values.rho = 0.5 * (lo + hi);
    out.policy.actions = std::move(actions);
    out.report.wall_time = std::chrono::steady_clock::now() - start;
    return out;
}

}  // namespace

Policy greedy_policy(const ValueTable& values, const TransitionModel& model) {
    const auto w = expected_continuation(values.values, model);
    Policy p;
    p.provenance = Provenance::External;
    p.actions.resize(model.size());
    std::uint64_t unused = 0;
    for (std::size_t s = 0; s < model.size(); ++s) p.actions[s] = full_argmin(model, s, w, unused).action;
    return p;
}

double bellman_residual(const ValueTable& values, const TransitionModel& model) {
    const auto w = expected_continuation(values.values, model);
    const auto& space = model.space();
    double worst = 0.0;
    std::uint64_t unused = 0;
    for (std::size_t s = 0; s < model.size(); ++s) {
        const double cost = static_cast<double>(space.core(space.core_of(s)).aoi);
        const double best = cost + full_argmin(model, s, w, unused).continuation;
        worst = std::max(worst, std::abs(best - values.values[s] - values.rho));
    }
    return worst;
}

Solution relative_value_iteration(const TransitionModel& model, const SolverOptions& options) {
    return iterate(model, options, PlainSweep(model), Provenance::PlainVIA);
}

Solution structured_value_iteration(const TransitionModel& model, const SolverOptions& options) {
    return iterate(model, options, StructuredSweep(model), Provenance::StructuredVIA);
}

}  // namespace aoi
