#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "casa/core_types.hpp"
#include "casa/intents.hpp"

namespace casa {

struct DemoSet {
    std::vector<Trajectory> demos;
    std::optional<std::string> intent_hint;

    void validate() const;
};

struct IrlConfig {
    int n_samples = 16;
    double noise_scale = 0.05;     // m, per interior waypoint
    double learning_rate = 0.1;
    int max_iters = 500;
    double grad_tol = 1e-4;
    double l2 = 0.5;               // ridge weight; demos are rarely exactly realizable
    std::uint64_t seed = 0;
    int rbf_per_axis = 5;

    void validate() const;
};

/// Mean demo feature counts minus mean sample feature counts.
Vec irl_gradient(const DemoSet& demos, std::span<const Trajectory> samples, const Intent& intent);

/// The explicit two-term objective whose phi-gradient irl_gradient returns:
/// mean demo cost minus mean sample cost, samples held fixed.
double irl_objective(const DemoSet& demos, std::span<const Trajectory> samples, const Intent& intent);

/// Optimal plans under the intent's current weights, one per requested sample
/// with starts used round-robin, each perturbed by Gaussian noise on interior
/// waypoints and re-projected onto the speed constraint. `horizons` (aligned
/// with `starts`) defaults to the planning horizon.
std::vector<Trajectory> sample_near_optimal(const Intent& intent, std::span<const State> starts,
                                            const IrlConfig& cfg, const WorldConfig& world,
                                            std::span<const int> horizons = {});

struct LearnProgress {
    int iteration = 0;
    double gradient_norm = 0.0;
};

struct LearnOptions {
    std::string id;  // empty: "learned"
    std::function<void(const LearnProgress&)> on_progress;
    std::stop_token stop;
};

struct LearnResult {
    Intent intent;
    bool converged = false;
    bool cancelled = false;
    int iterations = 0;
    double gradient_norm = 0.0;
    std::vector<double> gradient_norms;
};

/// Maximum-entropy IRL over the RBF basis of the world's workspace, starting
/// from phi = 0 and descending the stated gradient so that demonstrations
/// become cheap relative to samples. Unless the gradient falls below grad_tol
/// (`converged`), the returned weights are the mean of the iterates over the
/// second half of the run.
LearnResult learn_intent(const DemoSet& demos, const IrlConfig& cfg, const WorldConfig& world,
                         const LearnOptions& options = {});

}  // namespace casa
