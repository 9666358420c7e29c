#include "casa/intents.hpp"

#include <cmath>
#include <limits>

namespace casa {

RbfBasis::RbfBasis(std::vector<int> grid_dims, double bandwidth, Bounds bounds, bool bias)
    : grid_dims_(std::move(grid_dims)), bandwidth_(bandwidth), bounds_(std::move(bounds)), bias_(bias) {
    const int k = dim();
    if (k < 1 || static_cast<int>(grid_dims_.size()) != k || bounds_.hi.size() != k)
        throw Error(ErrorCode::dimension, "basis grid does not match bounds dimension");
    if (!(bandwidth_ > 0.0)) throw Error(ErrorCode::invalid_config, "RBF bandwidth must be positive");
    std::size_t total = 1;
    for (int n : grid_dims_) {
        if (n < 1) throw Error(ErrorCode::invalid_config, "grid dims must be >= 1");
        total *= static_cast<std::size_t>(n);
    }
    if (total == 0 && !bias_) throw Error(ErrorCode::dimension, "empty feature basis");

    // Row-major enumeration, last axis fastest.
    centers_.reserve(total);
    std::vector<int> idx(k, 0);
    for (std::size_t c = 0; c < total; ++c) {
        Vec center(k);
        for (int d = 0; d < k; ++d) {
            const int n = grid_dims_[d];
            center[d] = n == 1 ? 0.5 * (bounds_.lo[d] + bounds_.hi[d])
                               : bounds_.lo[d] + (bounds_.hi[d] - bounds_.lo[d]) * idx[d] / (n - 1);
        }
        centers_.push_back(std::move(center));
        for (int d = k - 1; d >= 0; --d) {
            if (++idx[d] < grid_dims_[d]) break;
            idx[d] = 0;
        }
    }
}

RbfBasis RbfBasis::for_workspace(const Bounds& workspace, int per_axis) {
    const int k = static_cast<int>(workspace.lo.size());
    const double spacing = (workspace.hi[0] - workspace.lo[0]) / std::max(1, per_axis - 1);
    return RbfBasis(std::vector<int>(k, per_axis), spacing, workspace, true);
}

Vec feature_vector(const RbfBasis& basis, const Vec& x) {
    if (x.size() != basis.dim()) throw Error(ErrorCode::dimension, "state dimension does not match basis");
    if (!all_finite(x)) throw Error(ErrorCode::invalid_input, "non-finite state");
    Vec f(basis.size());
    const double inv = 1.0 / (2.0 * basis.bandwidth() * basis.bandwidth());
    const auto& centers = basis.centers();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        f[static_cast<Eigen::Index>(j)] = std::exp(-(x - centers[j]).squaredNorm() * inv);
    }
    if (basis.bias()) f[basis.size() - 1] = 1.0;
    return f;
}

const Vec& FeatureCost::min_center() const {
    const auto& centers = basis.centers();
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double c = phi.dot(feature_vector(basis, centers[j]));
        if (c < best_cost) {
            best_cost = c;
            best = j;
        }
    }
    return centers.at(best);
}

Intent Intent::make_goal(std::string id, Vec goal) {
    if (!all_finite(goal)) throw Error(ErrorCode::invalid_input, "non-finite goal");
    return Intent{std::move(id), GoalCost{std::move(goal)}};
}

Intent Intent::make_learned(std::string id, Vec phi, RbfBasis basis) {
    if (phi.size() < 1 || phi.size() != basis.size())
        throw Error(ErrorCode::dimension, "weight vector does not match feature basis");
    if (!all_finite(phi)) throw Error(ErrorCode::invalid_input, "non-finite weights");
    return Intent{std::move(id), FeatureCost{std::move(phi), std::move(basis)}};
}

IntentSet::IntentSet(std::vector<Intent> intents) {
    for (auto& i : intents) add(std::move(i));
}

void IntentSet::add(Intent intent) {
    if (intent.id.empty()) throw Error(ErrorCode::invalid_input, "intent id must be non-empty");
    if (contains(intent.id)) throw Error(ErrorCode::duplicate_id, "duplicate intent id: " + intent.id);
    intents_.push_back(std::move(intent));
}

IntentSet IntentSet::with(Intent intent) const {
    IntentSet out = *this;
    out.add(std::move(intent));
    return out;
}

IntentSet IntentSet::without(const std::string& id) const {
    if (!contains(id)) throw Error(ErrorCode::unknown_id, "no intent with id " + id);
    IntentSet out;
    for (const auto& i : intents_)
        if (i.id != id) out.intents_.push_back(i);
    return out;
}

const Intent* IntentSet::find(const std::string& id) const {
    for (const auto& i : intents_)
        if (i.id == id) return &i;
    return nullptr;
}

const Intent& IntentSet::at(const std::string& id) const {
    if (const auto* p = find(id)) return *p;
    throw Error(ErrorCode::unknown_id, "no intent with id " + id);
}

std::vector<std::string> IntentSet::ids() const {
    std::vector<std::string> out;
    out.reserve(intents_.size());
    for (const auto& i : intents_) out.push_back(i.id);
    return out;
}

std::string IntentSet::fresh_id(const std::string& prefix) const {
    for (std::size_t n = 0;; ++n) {
        auto id = prefix + std::to_string(n);
        if (!contains(id)) return id;
    }
}

double state_cost(const Intent& intent, const Vec& x) {
    if (const auto* g = intent.goal()) {
        if (g->goal.size() != x.size()) throw Error(ErrorCode::dimension, "state and goal dimension differ");
        return (x - g->goal).norm();
    }
    const auto& fc = *intent.features();
    return fc.phi.dot(feature_vector(fc.basis, x));
}

Vec state_cost_gradient(const Intent& intent, const Vec& x) {
    if (const auto* g = intent.goal()) {
        if (g->goal.size() != x.size()) throw Error(ErrorCode::dimension, "state and goal dimension differ");
        const Vec d = x - g->goal;
        const double n = d.norm();
        return n > 0.0 ? Vec(d / n) : Vec(Vec::Zero(x.size()));
    }
    const auto& fc = *intent.features();
    const auto& centers = fc.basis.centers();
    const double s2 = fc.basis.bandwidth() * fc.basis.bandwidth();
    Vec grad = Vec::Zero(x.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const Vec d = x - centers[j];
        const double f = std::exp(-d.squaredNorm() / (2.0 * s2));
        grad -= fc.phi[static_cast<Eigen::Index>(j)] * f / s2 * d;
    }
    return grad;
}

double cost(const Intent& intent, std::span<const Vec> states) {
    if (states.empty()) throw Error(ErrorCode::invalid_input, "cost of an empty trajectory");
    double total = 0.0;
    for (const auto& x : states) total += state_cost(intent, x);
    return total;
}

double cost(const Intent& intent, const Trajectory& traj) {
    const auto xs = traj.states();
    return cost(intent, std::span<const Vec>(xs));
}

Vec cost_gradient(const Intent& intent, std::span<const Vec> states) {
    const auto* fc = intent.features();
    if (fc == nullptr) throw Error(ErrorCode::unsupported_intent, "cost_gradient requires a learned intent");
    if (fc->phi.size() < 1) throw Error(ErrorCode::dimension, "empty feature weights");
    Vec total = Vec::Zero(fc->basis.size());
    for (const auto& x : states) total += feature_vector(fc->basis, x);
    return total;
}

Vec cost_gradient(const Intent& intent, const Trajectory& traj) {
    const auto xs = traj.states();
    return cost_gradient(intent, std::span<const Vec>(xs));
}

}  // namespace casa
