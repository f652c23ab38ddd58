#pragma once

#include <span>

#include "cascade/types.hpp"

namespace cascade {

// Triggering kernel phi_m(tau) = kappa * m^beta * (tau + c)^-(1+theta),
// the event rate contributed tau seconds after an event of magnitude m.
double kernel_value(const HawkesParams& params, double magnitude, double tau);

// Aggregate event rate at time t: sum of kernel contributions of all events
// strictly earlier than t. Zero when no event precedes t.
double intensity(const HawkesParams& params, const Cascade& cascade, double t);

// Closed-form branching factor
//   n* = kappa * m_min^beta * (alpha-1)/(alpha-beta-1) * 1/(theta c^theta).
// Throws UndefinedBranchingError when beta >= alpha-1 or theta <= 0.
double branching_factor(const HawkesParams& params, const InfluenceDistribution& dist);

struct QuadratureConfig {
    double abs_tolerance{1e-9};
    std::size_t max_panels{40000};
};

// Same quantity as branching_factor, evaluated as the double integral of
// P(m) * phi_m(tau) over magnitude [m_min, inf) and time [0, inf). Both axes
// are mapped to finite intervals (u = tau/(tau+1), v = m_min/m) and handled
// by adaptive Gauss-Legendre. Serves as an independent numeric oracle.
double branching_factor_numeric(const HawkesParams& params, const InfluenceDistribution& dist,
                                const QuadratureConfig& config = {});

// Continuous power-law MLE: alpha = 1 + N / sum(ln(m_i / m_min)) over samples
// >= m_min. Requires at least 100 such samples.
InfluenceDistribution fit_influence_alpha(std::span<const double> magnitudes, double m_min);

} // namespace cascade
