#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "casa/core_types.hpp"
#include "casa/inference.hpp"
#include "casa/intents.hpp"
#include "casa/planner.hpp"

namespace casa {

enum class Method { casa, pba, belief, none };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view name);

/// Tunables shared by every arbitration method.
struct AssistConfig {
    EstimatorConfig estimator;        // MAP with lambda = 1 by default
    double epsilon = 2.0;             // misspecification threshold on beta
    double pba_threshold = 2.0;       // D: distance past which PBA does not assist (m)

    void validate() const;
};

/// Human control authority under every method, computed on the same tick.
struct AlphaSet {
    double casa = 1.0;
    double pba = 1.0;
    std::optional<double> belief;  // needs at least two intents
};

struct ArbitrationResult {
    Method method = Method::none;
    double alpha = 1.0;
    std::string theta_star;
    Action u_star;
    Action u;

    // Trace of the inference that produced alpha; empty for Method::none.
    int t = 0;
    BetaMap betas;
    IntentPosterior posterior;        // per-intent beta-hat
    IntentPosterior pba_posterior;    // beta = 1 for every intent
    std::string pba_theta_star;
    AlphaSet alphas;
    bool misspecified = false;
    Plan star_plan;                   // optimal completion for theta_star
};

/// alpha = min(1, 1/beta); beta <= 1 (including 0) gives 1.
double casa_alpha(double beta);
double casa_alpha(const ConfidenceEstimate& beta_star);

/// alpha = min(1, d / D).
double pba_alpha(double distance, double threshold);

/// Human authority under belief-based arbitration: 1 at uniform belief (or
/// below), 0 when the most likely intent has probability 1.
double belief_alpha(double p_star, int n_intents);

/// alpha T(a) + (1 - alpha) u*, norm-clipped to max_speed. The endpoints
/// alpha = 0 and alpha = 1 return u* and T(a) exactly.
Action blend(const HumanInput& input, const Action& u_star, double alpha, const WorldConfig& config);

/// Point PBA measures distance to: the goal, or the learned cost's lowest-cost
/// RBF center.
Vec assistance_target(const Intent& intent);

/// Per-episode memo of the full-horizon optimal cost from the episode start.
struct ArbitrationCache {
    std::map<std::string, double> optimal_costs;
};

/// Runs inference over the whole intent set on the observed trajectory (whose
/// last step carries the current input) and arbitrates with `method`.
/// `t` defaults to the number of inference steps spanned by `traj`.
ArbitrationResult arbitrate(Method method, const Trajectory& traj, const IntentSet& intents,
                            const WorldConfig& config, const AssistConfig& assist = {},
                            std::optional<int> t = std::nullopt, ArbitrationCache* cache = nullptr,
                            const PlanFunction& plan_fn = default_plan_function());

}  // namespace casa
