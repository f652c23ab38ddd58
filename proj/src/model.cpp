#include "cascade/model.hpp"

#include <cmath>

#include "cascade/quadrature.hpp"

namespace cascade {

double kernel_value(const HawkesParams& params, double magnitude, double tau) {
    params.validate();
    if (!std::isfinite(magnitude) || magnitude < 1.0) {
        throw ParameterDomainError("kernel magnitude must be >= 1");
    }
    if (!std::isfinite(tau) || tau < 0.0) {
        throw ParameterDomainError("kernel tau must be >= 0");
    }
    return params.kappa * std::pow(magnitude, params.beta) *
           std::pow(tau + params.c, -(1.0 + params.theta));
}

double intensity(const HawkesParams& params, const Cascade& cascade, double t) {
    params.validate();
    if (!std::isfinite(t) || t < 0.0) {
        throw ParameterDomainError("intensity time must be >= 0");
    }
    const double exponent = -(1.0 + params.theta);
    double rate = 0.0;
    for (const Event& e : cascade.events) {
        if (e.time >= t) {
            break;
        }
        rate += std::pow(e.magnitude, params.beta) * std::pow(t - e.time + params.c, exponent);
    }
    return params.kappa * rate;
}

namespace {

void check_branching_domain(const HawkesParams& params, const InfluenceDistribution& dist) {
    dist.validate();
    if (!(params.theta > 0.0) || params.beta >= dist.alpha - 1.0) {
        throw UndefinedBranchingError("branching factor undefined: requires theta > 0 and beta < alpha - 1");
    }
    params.validate();
}

} // namespace

double branching_factor(const HawkesParams& params, const InfluenceDistribution& dist) {
    check_branching_domain(params, dist);
    const double influence_moment =
        std::pow(dist.m_min, params.beta) * (dist.alpha - 1.0) / (dist.alpha - params.beta - 1.0);
    return params.kappa * influence_moment / (params.theta * std::pow(params.c, params.theta));
}

double branching_factor_numeric(const HawkesParams& params, const InfluenceDistribution& dist,
                                const QuadratureConfig& config) {
    check_branching_domain(params, dist);

    const double alpha = dist.alpha;
    const double m_min = dist.m_min;
    const double density_scale = (alpha - 1.0) * std::pow(m_min, alpha - 1.0);

    // Inner: time axis, tau = u/(1-u), dtau = (1-u)^-2 du.
    auto time_integrand = [&](double magnitude, double u) {
        const double one_minus = 1.0 - u;
        const double tau = u / one_minus;
        return kernel_value(params, magnitude, tau) / (one_minus * one_minus);
    };

    // Outer: magnitude axis, m = m_min/v, dm = m_min v^-2 dv.
    auto magnitude_integrand = [&](double v) {
        const double m = m_min / v;
        const double density = density_scale * std::pow(m, -alpha);
        const double jacobian = m_min / (v * v);
        const double inner = quad::integrate(
            [&](double u) { return time_integrand(m, u); }, 0.0, 1.0,
            0.1 * config.abs_tolerance, config.max_panels);
        return density * jacobian * inner;
    };

    return quad::integrate(magnitude_integrand, 0.0, 1.0, config.abs_tolerance, config.max_panels);
}

InfluenceDistribution fit_influence_alpha(std::span<const double> magnitudes, double m_min) {
    if (!std::isfinite(m_min) || m_min < 1.0) {
        throw ParameterDomainError("m_min must be >= 1");
    }
    std::size_t count = 0;
    double log_ratio_sum = 0.0;
    for (double m : magnitudes) {
        if (!std::isfinite(m)) {
            throw ParameterDomainError("magnitude samples must be finite");
        }
        if (m >= m_min) {
            ++count;
            log_ratio_sum += std::log(m / m_min);
        }
    }
    if (count < 100) {
        throw InsufficientDataError("power-law fit needs at least 100 samples >= m_min, got " +
                                    std::to_string(count));
    }
    if (log_ratio_sum <= 0.0) {
        throw InsufficientDataError("power-law fit degenerate: all samples equal m_min");
    }
    return InfluenceDistribution{1.0 + static_cast<double>(count) / log_ratio_sum, m_min};
}

} // namespace cascade
