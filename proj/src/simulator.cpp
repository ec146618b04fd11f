#include "aoi/simulator.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace aoi {

State default_initial_state(const TransitionModel& model) {
    const int median = (model.quantizer().size() + 1) / 2;
    return {model.dims().b_max, 1, 1, median, median};
}

namespace {

class LevelSampler {
public:
    explicit LevelSampler(const ChannelQuantizer& q) {
        double acc = 0.0;
        for (const auto& l : q.levels()) {
            acc += l.probability;
            cdf_.push_back(acc);
        }
        cdf_.back() = 1.0;
    }

    int draw(std::mt19937_64& rng) const {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), std::ssize(cdf_) - 1)) + 1;
    }

private:
    std::vector<double> cdf_;
};

}  // namespace

TrajectoryStats rollout(const Policy& policy, const TransitionModel& model, const State& initial,
                        std::int64_t n_slots, std::uint64_t seed, const RolloutOptions& options) {
    if (n_slots < 1) throw std::invalid_argument("rollout needs at least one slot");
    if (options.burn_in < 0 || options.batches < 1) throw std::invalid_argument("invalid rollout options");
    if (policy.actions.size() != model.size()) throw std::invalid_argument("policy size does not match model");
    const auto& space = model.space();
    if (!space.contains(initial)) throw std::invalid_argument("initial state out of range: " + describe(initial));

    std::mt19937_64 rng(seed);
    const LevelSampler sampler(model.quantizer());
    const int levels = space.channel_levels();
    const std::size_t cells = static_cast<std::size_t>(space.cells());

    const std::int64_t batches = std::min<std::int64_t>(options.batches, n_slots);
    const std::int64_t batch_len = n_slots / batches;  // the remainder joins the last batch
    std::vector<double> batch_sum(static_cast<std::size_t>(batches), 0.0);
    std::vector<std::int64_t> batch_count(static_cast<std::size_t>(batches), 0);

    std::array<std::int64_t, 4> counts{};
    double aoi_sum = 0.0, battery_sum = 0.0;
    std::int64_t min_battery = std::numeric_limits<std::int64_t>::max();

    std::size_t s = space.index(initial);
    const std::int64_t total = options.burn_in + n_slots;
    for (std::int64_t n = 0; n < total; ++n) {
        const std::size_t core = space.core_of(s);
        const CoreState c = space.core(core);
        const Action a = policy[s];
        const auto next = model.next_core(s, a);
        if (next < 0)
            throw ContractViolation("policy picks infeasible action " + std::string(action_code(a)) + " in " +
                                    describe(space.state(s)));
        if (n >= options.burn_in) {
            const std::int64_t m = n - options.burn_in;
            const auto b = static_cast<std::size_t>(std::min(m / batch_len, batches - 1));
            batch_sum[b] += c.aoi;
            ++batch_count[b];
            aoi_sum += c.aoi;
            battery_sum += c.battery;
            min_battery = std::min<std::int64_t>(min_battery, c.battery);
            ++counts[static_cast<std::size_t>(a.index())];
        }
        const int h = sampler.draw(rng);
        const int g = sampler.draw(rng);
        s = static_cast<std::size_t>(next) * cells + static_cast<std::size_t>(h - 1) * levels + (g - 1);
    }

    TrajectoryStats out;
    out.slots_simulated = n_slots;
    out.seed = seed;
    out.mean_aoi = aoi_sum / static_cast<double>(n_slots);
    out.mean_battery = battery_sum / static_cast<double>(n_slots);
    out.min_battery = min_battery;
    for (std::size_t i = 0; i < 4; ++i) out.action_frequencies[i] = static_cast<double>(counts[i]) / n_slots;

    if (batches >= 2) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t b = 0; b < batch_sum.size(); ++b) mean += batch_sum[b] / batch_count[b];
        mean /= static_cast<double>(batches);
        for (std::size_t b = 0; b < batch_sum.size(); ++b) {
            const double d = batch_sum[b] / batch_count[b] - mean;
            sq += d * d;
        }
        const double sd = std::sqrt(sq / static_cast<double>(batches - 1));
        const boost::math::students_t dist(static_cast<double>(batches - 1));
        out.ci_half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(batches));
    }
    return out;
}

GenerateAtWill solve_generate_at_will(const TransitionModel& joint, const SolverOptions& options) {
    TransitionModel restricted(joint.dims(), joint.quantizer(), kGenerateAtWillActions);
    Solution solution = relative_value_iteration(restricted, options);
    solution.policy.provenance = Provenance::Baseline;
    return {std::move(restricted), std::move(solution)};
}

GenerateAtWill solve_generate_at_will(const SystemParams& params, const SolverOptions& options) {
    return solve_generate_at_will(TransitionModel::from_params(params), options);
}

Policy greedy_transmit_policy(const TransitionModel& model) {
    Policy p;
    p.provenance = Provenance::External;
    p.actions.resize(model.size());
    for (std::size_t s = 0; s < model.size(); ++s)
        p.actions[s] = model.feasible(s).contains(kSampleTransmit) ? kSampleTransmit : kIdleHarvest;
    return p;
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "packet_bits" || name == "M") return SweepAxis::PacketBits;
    if (name == "sampling_cost_quanta" || name == "sampling_cost" || name == "ES") return SweepAxis::SamplingCost;
    throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "' (packet_bits | sampling_cost_quanta)");
}

std::string_view to_string(SweepAxis axis) {
    return axis == SweepAxis::PacketBits ? "packet_bits" : "sampling_cost_quanta";
}

SystemParams with_axis_value(SystemParams params, SweepAxis axis, double value) {
    if (axis == SweepAxis::PacketBits) {
        params.packet_bits = value;
    } else {
        if (value != std::floor(value)) throw std::invalid_argument("sampling cost must be an integer");
        params.sampling_cost_quanta = static_cast<int>(value);
    }
    return params;
}

std::vector<SweepRow> sweep(const SystemParams& base, SweepAxis axis, const std::vector<double>& values,
                            const SweepSettings& settings) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (const double value : values) {
        SweepRow row;
        row.value = value;
        try {
            const SystemParams params = with_axis_value(base, axis, value);
            const auto model = TransitionModel::from_params(params);
            const auto joint = relative_value_iteration(model, settings.solver);
            if (!joint.report.converged) throw std::runtime_error("joint solve did not converge");
            row.rho_joint = joint.values.rho;
            const State start = default_initial_state(model);
            if (settings.sim_slots > 0)
                row.sim_joint = rollout(joint.policy, model, start, settings.sim_slots, settings.seed, settings.rollout);
            if (settings.with_baseline) {
                const auto baseline = solve_generate_at_will(model, settings.solver);
                if (!baseline.solution.report.converged) throw std::runtime_error("baseline solve did not converge");
                row.rho_baseline = baseline.rho();
                if (settings.sim_slots > 0)
                    row.sim_baseline = rollout(baseline.solution.policy, baseline.model, start, settings.sim_slots,
                                               settings.seed, settings.rollout);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
            for (char& c : row.error)
                if (c == '\n' || c == ',') c = ';';
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace aoi
