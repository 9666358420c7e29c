#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "casa/core_types.hpp"
#include "casa/intents.hpp"
#include "casa/planner.hpp"

namespace casa {

/// Observed-prefix cost plus optimal-completion cost minus full-optimal cost.
///
/// The completion is the optimal plan from the last observed state; its first
/// state is that same observed state, so it is excluded from completion_cost.
/// With that convention the three state counts are t+1, T-t and T+1, which is
/// what makes a constant per-state offset cancel and makes an exact prefix of
/// the optimal trajectory score zero.
struct Suboptimality {
    double observed_cost = 0.0;
    double completion_cost = 0.0;
    double optimal_cost = 0.0;
    double value = 0.0;
    int t = 1;  // inference steps observed
    int k = 1;  // action dimensionality
};

/// Builds a Suboptimality from its three terms. The raw value is clamped at
/// zero, and magnitudes below 1e-9 of the terms' scale are treated as
/// optimizer slack and snapped to zero.
Suboptimality make_suboptimality(double observed, double completion, double optimal, int t, int k);

/// Number of inference steps covered by a trajectory spanning `tick_span`
/// ticks when inference runs every `period` ticks (the first tick counts).
int inference_steps(std::int64_t tick_span, int period);

/// Suboptimality of `traj` under `intent`. If `t` is not given it is derived
/// from the trajectory span and the inference period. `optimal` may carry a
/// precomputed full-horizon optimal cost from traj.front().
Suboptimality suboptimality(const Trajectory& traj, const Intent& intent, const WorldConfig& config,
                            std::optional<int> t = std::nullopt, std::optional<double> optimal = std::nullopt,
                            const PlanFunction& plan_fn = default_plan_function(),
                            Plan* completion_out = nullptr);

enum class EstimatorKind { mle, map };

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::map;
    double lambda = 1.0;
    double beta_cap = 1e6;
    double s_floor = 1e-9;
};

struct ConfidenceEstimate {
    double beta = 0.0;
    Suboptimality suboptimality;
    EstimatorKind estimator = EstimatorKind::map;
    double lambda = 0.0;  // only meaningful for MAP
};

/// beta = t k / (2 S); S below s_floor returns beta_cap.
ConfidenceEstimate beta_mle(const Suboptimality& s, double beta_cap = 1e6, double s_floor = 1e-9);

/// beta = t k / (2 (lambda + S)), the mode under an Exp(lambda) prior.
ConfidenceEstimate beta_map(const Suboptimality& s, double lambda);

ConfidenceEstimate estimate_confidence(const Suboptimality& s, const EstimatorConfig& config);

/// The objective maximized by the MLE: -beta S + (t k / 2) ln(beta / 2 pi).
/// It is also the log Laplace likelihood with the Hessian ratio set to 1.
double log_likelihood(const Suboptimality& s, double beta);
double log_likelihood(const Trajectory& traj, const Intent& intent, double beta, const WorldConfig& config);

using BetaMap = std::map<std::string, ConfidenceEstimate>;

struct IntentPosterior {
    std::vector<std::string> ids;        // intent-set order
    std::vector<double> probabilities;   // aligned with ids
    std::string argmax;

    double probability(const std::string& id) const;
};

/// Normalizes log-likelihoods (max-subtracted, tiny values flushed to zero).
/// Ties in the argmax go to the earliest id.
IntentPosterior posterior_from_log_likelihoods(std::vector<std::string> ids, const std::vector<double>& log_likelihoods);

/// Posterior using each intent's own beta and the suboptimality recorded in
/// its estimate.
IntentPosterior intent_posterior(const IntentSet& intents, const BetaMap& betas);

/// Same, with a fixed beta shared by every intent.
IntentPosterior intent_posterior_fixed_beta(const IntentSet& intents, const BetaMap& betas, double beta);

/// Recomputes suboptimality from the trajectory for every intent.
IntentPosterior intent_posterior(const Trajectory& traj, const IntentSet& intents, const BetaMap& betas,
                                 const WorldConfig& config);

}  // namespace casa
