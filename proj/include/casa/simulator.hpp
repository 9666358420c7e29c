#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "casa/arbitration.hpp"
#include "casa/core_types.hpp"
#include "casa/intents.hpp"
#include "casa/irl.hpp"

namespace casa {

/// One simulated teleoperation episode on the point robot.
///
/// Inference runs on ticks that are multiples of the inference period. In
/// between, the last alpha is reused and u* is refreshed cheaply: the closed
/// form for goal intents, the cached plan tail for learned ones.
class Episode {
public:
    Episode(WorldConfig world, AssistConfig assist, IntentSet intents, Method method, State start,
            std::optional<Trajectory> reference = std::nullopt);

    /// Applies one tick of human input. Returns the arbitration trace on
    /// inference ticks.
    std::optional<ArbitrationResult> step(const HumanInput& input);

    void terminate() { terminated_ = true; }
    bool terminated() const { return terminated_; }

    const WorldConfig& world() const { return world_; }
    const AssistConfig& assist() const { return assist_; }
    const IntentSet& intents() const { return intents_; }
    Method method() const { return method_; }
    const std::optional<Trajectory>& reference() const { return reference_; }
    std::int64_t tick() const { return tick_; }
    const Trajectory& history() const { return history_; }
    const std::vector<ArbitrationResult>& assist_log() const { return assist_log_; }

    /// Executed action and alpha applied on every completed tick.
    const std::vector<Action>& executed_actions() const { return executed_; }
    const std::vector<double>& applied_alphas() const { return applied_alpha_; }

    /// Alpha that will be applied on the next non-inference tick (1 before
    /// the first inference).
    double last_alpha() const { return last_alpha_; }
    const State& state() const { return history_.back().state; }

private:
    Action cached_u_star() const;

    WorldConfig world_;
    AssistConfig assist_;
    IntentSet intents_;
    Method method_;
    std::optional<Trajectory> reference_;

    std::int64_t tick_ = 0;
    Trajectory history_;
    std::vector<ArbitrationResult> assist_log_;
    std::vector<Action> executed_;
    std::vector<double> applied_alpha_;
    bool terminated_ = false;

    ArbitrationCache cache_;
    double last_alpha_ = 1.0;
    std::string last_theta_star_;
    Plan last_plan_;
    std::int64_t last_inference_tick_ = 0;
};

enum class OperatorKind { optimal_tracker, noisy_tracker, replay };

std::string_view to_string(OperatorKind k) noexcept;
OperatorKind operator_kind_from_string(std::string_view name);

struct ScriptedOperatorSpec {
    OperatorKind kind = OperatorKind::optimal_tracker;
    std::optional<Intent> target;        // trackers
    std::optional<Trajectory> replay;    // replay: inputs are read from here
    double noise_std = 0.0;              // input-space, noisy_tracker
    /// Early stopping: release every key while the alpha about to be applied
    /// is below this value.
    std::optional<double> release_below_alpha;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Stateful input generator for headless runs.
class ScriptedOperator {
public:
    explicit ScriptedOperator(ScriptedOperatorSpec spec);

    /// Input for the episode's current tick, or nullopt when a replay runs out.
    std::optional<HumanInput> next(const Episode& episode);

    const ScriptedOperatorSpec& spec() const { return spec_; }

private:
    Vec tracking_velocity(const Episode& episode);

    ScriptedOperatorSpec spec_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::vector<Vec> reference_;         // learned targets: cached optimal plan
    std::int64_t reference_start_tick_ = 0;
    std::size_t replay_index_ = 0;
};

struct RunOutcome {
    bool truncated = false;  // replay ran out before n_ticks
    std::int64_t ticks_run = 0;
};

/// Drives `episode` with operator-generated inputs for up to n_ticks ticks.
RunOutcome run_scripted(Episode& episode, ScriptedOperator& op, int n_ticks);

/// True iff every beta-hat is below epsilon.
bool detect_misspecification(const BetaMap& betas, double epsilon);

struct LifelongResult {
    IntentSet intents;
    LearnResult learned;
};

/// Learns the missing intent and returns the enlarged set; `intents` itself
/// is left untouched.
LifelongResult lifelong_update(const IntentSet& intents, const DemoSet& demos, const IrlConfig& cfg,
                               const WorldConfig& world, const LearnOptions& options = {});

}  // namespace casa
