#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "casa/error.hpp"

namespace casa {

using Vec = Eigen::VectorXd;

/// Axis-aligned box, one [lo, hi] interval per dimension.
struct Bounds {
    Vec lo;
    Vec hi;

    Vec clamp(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-12) const;
};

struct WorldConfig {
    int k = 2;
    Bounds workspace{Vec::Zero(2), Vec::Constant(2, 10.0)};
    double max_speed = 1.0;        // m/s
    double tick_rate = 10.0;       // ticks/s
    int inference_period_ticks = 5;
    int planning_horizon = 100;    // ticks

    /// Largest displacement allowed over one tick.
    double step_length() const { return max_speed / tick_rate; }

    void validate() const;
};

struct State {
    Vec x;
};

struct HumanInput {
    Vec a;

    bool pressed() const { return (a.array() != 0.0).any(); }

    static HumanInput zero(int k) { return {Vec::Zero(k)}; }
};

struct Action {
    Vec u;

    static Action zero(int k) { return {Vec::Zero(k)}; }
};

struct TrajectoryStep {
    std::int64_t tick = 0;
    State state;
    HumanInput input;
};

/// Time-stamped (state, input) sequence. Ticks are strictly increasing and
/// every state is finite; appending anything else throws.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<TrajectoryStep> steps);

    /// Builds a trajectory from bare states at ticks first_tick, first_tick+1, ...
    /// with zero inputs.
    static Trajectory from_states(std::span<const Vec> states, std::int64_t first_tick = 0);

    void push_back(TrajectoryStep step);

    /// Replaces the input recorded on the last step.
    void set_last_input(HumanInput input);

    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }
    const TrajectoryStep& operator[](std::size_t i) const { return steps_[i]; }
    const TrajectoryStep& front() const { return steps_.front(); }
    const TrajectoryStep& back() const { return steps_.back(); }
    const std::vector<TrajectoryStep>& steps() const { return steps_; }
    auto begin() const { return steps_.begin(); }
    auto end() const { return steps_.end(); }

    int dim() const { return empty() ? 0 : static_cast<int>(steps_.front().state.x.size()); }

    std::vector<Vec> states() const;
    std::vector<HumanInput> inputs() const;

    /// Appends `tail`, shifting its ticks so they continue after this trajectory.
    Trajectory concat(const Trajectory& tail) const;

    friend bool operator==(const Trajectory& a, const Trajectory& b);

private:
    std::vector<TrajectoryStep> steps_;
};

/// Direct teleoperation: command scaled by max_speed, then norm-clipped.
Action teleop_map(const HumanInput& input, const WorldConfig& config);

/// Scales `v` down so its Euclidean norm is at most `limit`. Vectors already
/// inside the ball are returned unchanged, bit for bit.
Vec clip_norm(const Vec& v, double limit);

/// All steps with tick <= t.
Trajectory trajectory_prefix(const Trajectory& traj, std::int64_t t);

bool all_finite(const Vec& v);

}  // namespace casa
