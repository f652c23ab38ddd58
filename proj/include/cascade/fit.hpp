#pragma once

#include <cstdint>
#include <vector>

#include "cascade/types.hpp"

namespace cascade {

struct FitConfig {
    double horizon{0.0};              // observation window T, seconds; must be > 0
    std::size_t max_iterations{300};  // BFGS iterations per penalty stage
    double gradient_tolerance{1e-5};  // inf-norm on the transformed gradient
    double n_star_slack{1e-4};        // subcriticality margin, n* <= 1 - slack
    std::vector<HawkesParams> starts; // empty selects the default 16-point grid
};

struct FitResult {
    HawkesParams params;
    double log_likelihood{0.0};
    double n_star{0.0};
    bool converged{false};
    std::vector<std::string> active_constraints;
    std::size_t starts_tried{0};
};

// Default multi-start grid: kappa {0.1, 1} x beta {0.1, 0.5(alpha-1)} x
// c {1, 60} x theta {0.2, 0.8}.
std::vector<HawkesParams> default_starts(const InfluenceDistribution& dist);

// Maximizes the cascade log-likelihood over {kappa, beta, c, theta} subject
// to positivity, beta < alpha - 1 and n* <= 1 - n_star_slack. Positivity and
// the beta range are removed by a log/logit change of variables; the n*
// bound is enforced by an exact penalty with increasing weight followed by a
// feasibility projection of kappa. Returns the best feasible optimum across
// all starts; throws FitFailureError when every start fails.
FitResult fit(const Cascade& cascade, const FitConfig& config, const InfluenceDistribution& dist);

} // namespace cascade
