#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "casa/core_types.hpp"

namespace casa {

/// Gaussian radial basis functions on a uniform grid over a box, plus an
/// optional constant-1 component appended last.
class RbfBasis {
public:
    RbfBasis() = default;
    RbfBasis(std::vector<int> grid_dims, double bandwidth, Bounds bounds, bool bias = true);

    /// Default basis for a workspace: 5 centers per axis, bandwidth equal to the
    /// grid spacing along the first axis, bias enabled.
    static RbfBasis for_workspace(const Bounds& workspace, int per_axis = 5);

    int size() const { return static_cast<int>(centers_.size()) + (bias_ ? 1 : 0); }
    int num_centers() const { return static_cast<int>(centers_.size()); }
    int dim() const { return static_cast<int>(bounds_.lo.size()); }
    const std::vector<int>& grid_dims() const { return grid_dims_; }
    double bandwidth() const { return bandwidth_; }
    const Bounds& bounds() const { return bounds_; }
    bool bias() const { return bias_; }
    const std::vector<Vec>& centers() const { return centers_; }

private:
    std::vector<int> grid_dims_;
    double bandwidth_ = 1.0;
    Bounds bounds_;
    bool bias_ = true;
    std::vector<Vec> centers_;
};

Vec feature_vector(const RbfBasis& basis, const Vec& x);

struct GoalCost {
    Vec goal;
};

/// Linear-in-features cost: per-state cost phi . f(x).
struct FeatureCost {
    Vec phi;
    RbfBasis basis;

    /// Center with the lowest per-state cost; ties go to the lowest index.
    const Vec& min_center() const;
};

using CostModel = std::variant<GoalCost, FeatureCost>;

enum class IntentKind { goal, learned };

struct Intent {
    std::string id;
    CostModel cost_model;

    IntentKind kind() const {
        return std::holds_alternative<GoalCost>(cost_model) ? IntentKind::goal : IntentKind::learned;
    }
    const GoalCost* goal() const { return std::get_if<GoalCost>(&cost_model); }
    const FeatureCost* features() const { return std::get_if<FeatureCost>(&cost_model); }

    static Intent make_goal(std::string id, Vec goal);
    static Intent make_learned(std::string id, Vec phi, RbfBasis basis);
};

/// Ordered intent collection with unique ids.
class IntentSet {
public:
    IntentSet() = default;
    explicit IntentSet(std::vector<Intent> intents);

    void add(Intent intent);
    IntentSet with(Intent intent) const;
    IntentSet without(const std::string& id) const;

    const Intent& at(const std::string& id) const;
    const Intent* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }
    std::vector<std::string> ids() const;

    /// First id of the form "<prefix><n>" not already taken.
    std::string fresh_id(const std::string& prefix) const;

    std::size_t size() const { return intents_.size(); }
    bool empty() const { return intents_.empty(); }
    const Intent& operator[](std::size_t i) const { return intents_[i]; }
    auto begin() const { return intents_.begin(); }
    auto end() const { return intents_.end(); }

private:
    std::vector<Intent> intents_;
};

/// Per-state cost of a single state.
double state_cost(const Intent& intent, const Vec& x);

/// d(state_cost)/dx. For goal costs the gradient at the goal itself is taken
/// to be zero.
Vec state_cost_gradient(const Intent& intent, const Vec& x);

/// Sum of per-state costs along the trajectory; inputs are ignored.
double cost(const Intent& intent, const Trajectory& traj);
double cost(const Intent& intent, std::span<const Vec> states);

/// Gradient of the trajectory cost with respect to the learned-cost weights:
/// the per-state feature vectors summed over the trajectory.
Vec cost_gradient(const Intent& intent, const Trajectory& traj);
Vec cost_gradient(const Intent& intent, std::span<const Vec> states);

}  // namespace casa
