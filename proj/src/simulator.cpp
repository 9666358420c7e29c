#include "casa/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "casa/planner.hpp"

namespace casa {

Episode::Episode(WorldConfig world, AssistConfig assist, IntentSet intents, Method method, State start,
                 std::optional<Trajectory> reference)
    : world_(std::move(world)),
      assist_(assist),
      intents_(std::move(intents)),
      method_(method),
      reference_(std::move(reference)) {
    world_.validate();
    assist_.validate();
    if (start.x.size() != world_.k) throw Error(ErrorCode::dimension, "start state dimension mismatch");
    if (!world_.workspace.contains(start.x)) throw Error(ErrorCode::invalid_input, "start outside workspace");
    if (method_ != Method::none && intents_.empty())
        throw Error(ErrorCode::invalid_input, "assisted episodes need at least one intent");
    history_.push_back({0, std::move(start), HumanInput::zero(world_.k)});
}

Action Episode::cached_u_star() const {
    const Intent& star = intents_.at(last_theta_star_);
    if (const auto* g = star.goal()) return planner::plan_goal(state(), *g, 1, world_).first_action;
    const auto& steps = last_plan_.trajectory;
    const auto j = static_cast<std::size_t>(tick_ - last_inference_tick_);
    if (j + 1 >= steps.size()) return Action::zero(world_.k);
    return {(steps[j + 1].state.x - steps[j].state.x) * world_.tick_rate};
}

std::optional<ArbitrationResult> Episode::step(const HumanInput& input) {
    if (terminated_) throw Error(ErrorCode::invalid_state, "episode already terminated");
    const Action direct = teleop_map(input, world_);
    history_.set_last_input(input);

    std::optional<ArbitrationResult> out;
    Action u;
    if (tick_ % world_.inference_period_ticks == 0) {
        const int t = inference_steps(tick_, world_.inference_period_ticks);
        ArbitrationResult r = arbitrate(method_, history_, intents_, world_, assist_, t, &cache_);
        r.t = t;
        if (method_ != Method::none) r.misspecified = detect_misspecification(r.betas, assist_.epsilon);
        last_alpha_ = r.alpha;
        last_theta_star_ = r.theta_star;
        last_plan_ = r.star_plan;
        last_inference_tick_ = tick_;
        u = r.u;
        assist_log_.push_back(r);
        out = std::move(r);
    } else if (method_ == Method::none) {
        u = direct;
    } else {
        u = blend(input, cached_u_star(), last_alpha_, world_);
    }

    const Vec next = world_.workspace.clamp(state().x + u.u / world_.tick_rate);
    history_.push_back({tick_ + 1, State{next}, HumanInput::zero(world_.k)});
    executed_.push_back(std::move(u));
    applied_alpha_.push_back(last_alpha_);
    ++tick_;
    return out;
}

std::string_view to_string(OperatorKind k) noexcept {
    switch (k) {
        case OperatorKind::optimal_tracker: return "optimal_tracker";
        case OperatorKind::noisy_tracker: return "noisy_tracker";
        case OperatorKind::replay: return "replay";
    }
    return "replay";
}

OperatorKind operator_kind_from_string(std::string_view name) {
    if (name == "optimal_tracker") return OperatorKind::optimal_tracker;
    if (name == "noisy_tracker") return OperatorKind::noisy_tracker;
    if (name == "replay") return OperatorKind::replay;
    throw Error(ErrorCode::invalid_input, "unknown operator kind: " + std::string(name));
}

void ScriptedOperatorSpec::validate() const {
    if (noise_std < 0.0) throw Error(ErrorCode::invalid_config, "noise_std must be nonnegative");
    if (kind == OperatorKind::replay && !replay) throw Error(ErrorCode::invalid_config, "replay operator needs a trajectory");
    if (kind != OperatorKind::replay && !target) throw Error(ErrorCode::invalid_config, "tracking operator needs a target intent");
}

ScriptedOperator::ScriptedOperator(ScriptedOperatorSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
    spec_.validate();
}

Vec ScriptedOperator::tracking_velocity(const Episode& ep) {
    const auto& world = ep.world();
    const State& x = ep.state();
    if (const auto* g = spec_.target->goal()) return planner::plan_goal(x, *g, 1, world).first_action.u;

    auto j = static_cast<std::size_t>(ep.tick() - reference_start_tick_);
    const bool stale = reference_.empty() || j + 1 >= reference_.size() ||
                       (reference_[j] - x.x).norm() > 1e-9;
    if (stale) {
        const int horizon = static_cast<int>(std::max<std::int64_t>(1, world.planning_horizon - ep.tick()));
        reference_ = planner::plan(x, *spec_.target, horizon, world).trajectory.states();
        reference_start_tick_ = ep.tick();
        j = 0;
    }
    return (reference_[j + 1] - reference_[j]) * world.tick_rate;
}

std::optional<HumanInput> ScriptedOperator::next(const Episode& ep) {
    const int k = ep.world().k;
    if (spec_.kind == OperatorKind::replay) {
        const auto& steps = *spec_.replay;
        // The final recorded step only carries a placeholder input.
        if (replay_index_ + 1 >= steps.size()) return std::nullopt;
        return steps[replay_index_++].input;
    }

    const Vec velocity = tracking_velocity(ep);
    Vec a = (velocity / ep.world().max_speed).cwiseMax(-1.0).cwiseMin(1.0);
    if (spec_.kind == OperatorKind::noisy_tracker) {
        Vec noise(k);
        for (int d = 0; d < k; ++d) noise[d] = spec_.noise_std * normal_(rng_);
        // Near the target the operator lets go instead of jittering.
        if (velocity.norm() < 0.05 * ep.world().max_speed) {
            a.setZero();
        } else {
            a = (a + noise).cwiseMax(-1.0).cwiseMin(1.0);
        }
    }
    if (spec_.release_below_alpha && ep.last_alpha() < *spec_.release_below_alpha) a.setZero();
    return HumanInput{a};
}

RunOutcome run_scripted(Episode& episode, ScriptedOperator& op, int n_ticks) {
    if (n_ticks < 1) throw Error(ErrorCode::invalid_input, "n_ticks must be >= 1");
    RunOutcome out;
    for (int i = 0; i < n_ticks; ++i) {
        auto input = op.next(episode);
        if (!input) {
            out.truncated = true;
            break;
        }
        episode.step(*input);
        ++out.ticks_run;
    }
    return out;
}

bool detect_misspecification(const BetaMap& betas, double epsilon) {
    if (betas.empty()) throw Error(ErrorCode::invalid_input, "misspecification check needs at least one beta");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_threshold, "epsilon must be positive");
    return std::all_of(betas.begin(), betas.end(), [&](const auto& kv) { return kv.second.beta < epsilon; });
}

LifelongResult lifelong_update(const IntentSet& intents, const DemoSet& demos, const IrlConfig& cfg,
                               const WorldConfig& world, const LearnOptions& options) {
    LearnOptions opts = options;
    if (opts.id.empty() || intents.contains(opts.id))
        opts.id = intents.fresh_id(demos.intent_hint.value_or("learned") + "_");
    LearnResult learned = learn_intent(demos, cfg, world, opts);
    if (learned.cancelled) return {intents, std::move(learned)};
    IntentSet enlarged = intents.with(learned.intent);
    return {std::move(enlarged), std::move(learned)};
}

}  // namespace casa
