#pragma once

#include <array>

#include "cascade/types.hpp"

namespace cascade {

// Partials of the log-likelihood with respect to (kappa, beta, c, theta).
using LikelihoodGradient = std::array<double, 4>;

struct LikelihoodEval {
    double value{0.0};
    LikelihoodGradient gradient{};
};

// Point-process log-likelihood of the observed events on [0, horizon]:
//   sum_{i>=2} log kappa
// + sum_{i>=2} log( sum_{j<i} m_j^beta (t_i - t_j + c)^-(1+theta) )
// - kappa sum_i m_i^beta [c^-theta - (horizon + c - t_i)^-theta] / theta.
// Ties in event times use strict index order. If an inner sum underflows to
// zero the function returns -infinity rather than faulting.
double log_likelihood(const HawkesParams& params, const Cascade& cascade, double horizon);

// Analytic gradient of log_likelihood. Components are zero when the value
// degenerates to -infinity.
LikelihoodGradient log_likelihood_gradient(const HawkesParams& params, const Cascade& cascade,
                                           double horizon);

// Value and gradient in one O(n^2) pass; the fitting loop's workhorse.
LikelihoodEval log_likelihood_with_gradient(const HawkesParams& params, const Cascade& cascade,
                                            double horizon);

} // namespace cascade
