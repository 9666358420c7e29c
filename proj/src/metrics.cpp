#include "casa/metrics.hpp"

#include <algorithm>
#include <limits>

namespace casa {

std::vector<Vec> resample_arc_length(const Trajectory& traj, int n) {
    if (traj.empty()) throw Error(ErrorCode::invalid_input, "cannot resample an empty trajectory");
    if (n < 2) throw Error(ErrorCode::invalid_input, "resampling needs at least two points");
    const auto xs = traj.states();
    std::vector<double> s(xs.size(), 0.0);
    for (std::size_t i = 1; i < xs.size(); ++i) s[i] = s[i - 1] + (xs[i] - xs[i - 1]).norm();
    const double total = s.back();

    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(n));
    if (!(total > 0.0)) {
        out.assign(static_cast<std::size_t>(n), xs.front());
        return out;
    }
    std::size_t seg = 1;
    for (int i = 0; i < n; ++i) {
        const double target = total * i / (n - 1);
        while (seg + 1 < xs.size() && s[seg] < target) ++seg;
        const double len = s[seg] - s[seg - 1];
        const double w = len > 0.0 ? std::clamp((target - s[seg - 1]) / len, 0.0, 1.0) : 1.0;
        out.push_back(xs[seg - 1] + w * (xs[seg] - xs[seg - 1]));
    }
    out.back() = xs.back();
    return out;
}

double error_metric(const Trajectory& executed, const Trajectory& reference, int n) {
    if (executed.dim() != reference.dim()) throw Error(ErrorCode::dimension, "trajectories differ in dimension");
    const auto a = resample_arc_length(executed, n);
    const auto b = resample_arc_length(reference, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
    return sum;
}

double efficiency_cost(const Trajectory& executed, const WorldConfig& config) {
    if (executed.size() < 2) throw Error(ErrorCode::invalid_input, "efficiency cost needs at least two states");
    double sum = 0.0;
    for (std::size_t i = 1; i < executed.size(); ++i)
        sum += ((executed[i].state.x - executed[i - 1].state.x) * config.tick_rate).squaredNorm();
    return sum;
}

std::int64_t effort(std::span<const HumanInput> inputs) {
    return std::count_if(inputs.begin(), inputs.end(), [](const HumanInput& a) { return a.pressed(); });
}

std::int64_t effort(const Trajectory& traj) {
    std::int64_t n = 0;
    for (const auto& step : traj)
        if (step.input.pressed()) ++n;
    return n;
}

MetricsReport measure(const Scenario& scenario, const Episode& episode) {
    MetricsReport r;
    r.scenario = scenario.name;
    r.method = episode.method();
    r.seed = scenario.seed;
    const Trajectory reference = episode.reference() ? *episode.reference() : scenario.intended_trajectory();
    r.error = error_metric(episode.history(), reference);
    r.efficiency_cost = episode.history().size() < 2 ? 0.0 : efficiency_cost(episode.history(), episode.world());
    r.effort = effort(episode.history());
    return r;
}

std::vector<ExperimentRun> run_experiment(const Scenario& scenario, std::span<const Method> methods,
                                          std::span<const std::uint64_t> seeds) {
    if (methods.empty() || seeds.empty()) throw Error(ErrorCode::invalid_input, "experiment needs methods and seeds");
    std::vector<ExperimentRun> runs;
    for (const std::uint64_t seed : seeds) {
        Scenario cell = scenario;
        cell.seed = seed;
        std::optional<std::int64_t> baseline;
        const std::size_t first = runs.size();
        for (const Method m : methods) {
            cell.method = m;
            Episode ep = run_scenario(cell);
            MetricsReport report = measure(cell, ep);
            if (m == Method::none) baseline = report.effort;
            runs.push_back({std::move(report), std::move(ep)});
        }
        if (!baseline) {
            cell.method = Method::none;
            baseline = measure(cell, run_scenario(cell)).effort;
        }
        for (std::size_t i = first; i < runs.size(); ++i) {
            if (*baseline > 0)
                runs[i].report.relative_effort =
                    static_cast<double>(runs[i].report.effort) / static_cast<double>(*baseline);
        }
    }
    return runs;
}

std::vector<std::string> time_series_columns(const IntentSet& intents) {
    std::vector<std::string> cols{"tick", "t", "theta_star"};
    const auto ids = intents.ids();
    for (const auto& id : ids) cols.push_back("beta_" + id);
    for (const auto& id : ids) cols.push_back("posterior_" + id);
    for (const char* c : {"alpha_casa", "alpha_pba", "alpha_belief", "alpha_applied", "misspecified"}) cols.emplace_back(c);
    return cols;
}

void write_time_series_csv(std::ostream& out, const Episode& episode) {
    const auto cols = time_series_columns(episode.intents());
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';

    const auto ids = episode.intents().ids();
    const int period = episode.world().inference_period_ticks;
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : episode.assist_log()) {
        const std::int64_t tick = static_cast<std::int64_t>(r.t - 1) * period;
        out << tick << ',' << r.t << ',' << r.theta_star;
        for (const auto& id : ids) {
            out << ',';
            if (auto it = r.betas.find(id); it != r.betas.end()) out << it->second.beta;
        }
        for (const auto& id : ids) {
            out << ',';
            if (!r.posterior.ids.empty()) out << r.posterior.probability(id);
        }
        out << ',' << r.alphas.casa << ',' << r.alphas.pba << ',';
        if (r.alphas.belief) out << *r.alphas.belief;
        out << ',' << r.alpha << ',' << (r.misspecified ? 1 : 0) << '\n';
    }
    out.precision(old);
}

}  // namespace casa
