#include "casa/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace casa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_input: return "invalid_input";
        case ErrorCode::empty_prefix: return "empty_prefix";
        case ErrorCode::dimension: return "dimension";
        case ErrorCode::unsupported_intent: return "unsupported_intent";
        case ErrorCode::invalid_horizon: return "invalid_horizon";
        case ErrorCode::invalid_prior: return "invalid_prior";
        case ErrorCode::invalid_beta: return "invalid_beta";
        case ErrorCode::incomplete_input: return "incomplete_input";
        case ErrorCode::invalid_threshold: return "invalid_threshold";
        case ErrorCode::invalid_arity: return "invalid_arity";
        case ErrorCode::invalid_alpha: return "invalid_alpha";
        case ErrorCode::invalid_state: return "invalid_state";
        case ErrorCode::invalid_config: return "invalid_config";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::unknown_id: return "unknown_id";
        case ErrorCode::parse: return "parse";
        case ErrorCode::busy: return "busy";
    }
    return "unknown";
}

bool all_finite(const Vec& v) {
    return v.allFinite();
}

Vec Bounds::clamp(const Vec& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
}

bool Bounds::contains(const Vec& x, double tol) const {
    return x.size() == lo.size() && (x.array() >= lo.array() - tol).all() &&
           (x.array() <= hi.array() + tol).all();
}

void WorldConfig::validate() const {
    if (k < 1) throw Error(ErrorCode::invalid_config, "state dimension must be >= 1");
    if (workspace.lo.size() != k || workspace.hi.size() != k)
        throw Error(ErrorCode::dimension, "workspace bounds do not match state dimension");
    if (!(workspace.lo.array() < workspace.hi.array()).all())
        throw Error(ErrorCode::invalid_config, "workspace bounds are degenerate");
    if (!(max_speed > 0.0)) throw Error(ErrorCode::invalid_config, "max_speed must be positive");
    if (!(tick_rate > 0.0)) throw Error(ErrorCode::invalid_config, "tick_rate must be positive");
    if (inference_period_ticks < 1)
        throw Error(ErrorCode::invalid_config, "inference_period_ticks must be >= 1");
    if (planning_horizon < 1) throw Error(ErrorCode::invalid_config, "planning_horizon must be >= 1");
}

Trajectory::Trajectory(std::vector<TrajectoryStep> steps) {
    steps_.reserve(steps.size());
    for (auto& s : steps) push_back(std::move(s));
}

Trajectory Trajectory::from_states(std::span<const Vec> states, std::int64_t first_tick) {
    Trajectory out;
    std::int64_t tick = first_tick;
    for (const auto& x : states) {
        out.push_back({tick++, State{x}, HumanInput::zero(static_cast<int>(x.size()))});
    }
    return out;
}

void Trajectory::push_back(TrajectoryStep step) {
    if (!all_finite(step.state.x)) throw Error(ErrorCode::invalid_input, "non-finite state");
    if (!steps_.empty()) {
        if (step.tick <= steps_.back().tick)
            throw Error(ErrorCode::invalid_input, "trajectory ticks must be strictly increasing");
        if (step.state.x.size() != steps_.back().state.x.size())
            throw Error(ErrorCode::dimension, "state dimension changed within trajectory");
    }
    if (step.input.a.size() == 0) step.input.a = Vec::Zero(step.state.x.size());
    steps_.push_back(std::move(step));
}

void Trajectory::set_last_input(HumanInput input) {
    if (steps_.empty()) throw Error(ErrorCode::invalid_state, "no step to attach an input to");
    if (input.a.size() != steps_.back().state.x.size())
        throw Error(ErrorCode::dimension, "input dimension does not match state");
    steps_.back().input = std::move(input);
}

std::vector<Vec> Trajectory::states() const {
    std::vector<Vec> out;
    out.reserve(steps_.size());
    for (const auto& s : steps_) out.push_back(s.state.x);
    return out;
}

std::vector<HumanInput> Trajectory::inputs() const {
    std::vector<HumanInput> out;
    out.reserve(steps_.size());
    for (const auto& s : steps_) out.push_back(s.input);
    return out;
}

Trajectory Trajectory::concat(const Trajectory& tail) const {
    Trajectory out = *this;
    if (tail.empty()) return out;
    const std::int64_t shift =
        empty() ? 0 : back().tick + 1 - tail.front().tick;
    for (const auto& s : tail) out.push_back({s.tick + shift, s.state, s.input});
    return out;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& p = a[i];
        const auto& q = b[i];
        if (p.tick != q.tick || p.state.x != q.state.x || p.input.a != q.input.a) return false;
    }
    return true;
}

Vec clip_norm(const Vec& v, double limit) {
    const double n = v.norm();
    if (n <= limit) return v;
    return v * (limit / n);
}

Action teleop_map(const HumanInput& input, const WorldConfig& config) {
    if (input.a.size() != config.k)
        throw Error(ErrorCode::dimension, "input dimension does not match world");
    if (!all_finite(input.a)) throw Error(ErrorCode::invalid_input, "non-finite input component");
    if ((input.a.array().abs() > 1.0).any())
        throw Error(ErrorCode::invalid_input, "input component outside [-1, 1]");
    return {clip_norm(input.a * config.max_speed, config.max_speed)};
}

Trajectory trajectory_prefix(const Trajectory& traj, std::int64_t t) {
    if (traj.empty() || t < traj.front().tick)
        throw Error(ErrorCode::empty_prefix, "prefix tick precedes the first step");
    std::vector<TrajectoryStep> kept;
    for (const auto& s : traj) {
        if (s.tick > t) break;
        kept.push_back(s);
    }
    return Trajectory(std::move(kept));
}

}  // namespace casa
