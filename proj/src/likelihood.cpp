#include "cascade/likelihood.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cascade {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct EventView {
    const std::vector<Event>* events;
    std::size_t count;
};

EventView checked_events(const HawkesParams& params, const Cascade& cascade, double horizon) {
    params.validate();
    if (!std::isfinite(horizon) || horizon <= 0.0) {
        throw ParameterDomainError("likelihood horizon must be > 0");
    }
    for (std::size_t i = 0; i < cascade.events.size(); ++i) {
        if (cascade.events[i].time > horizon) {
            throw ParameterDomainError("event " + std::to_string(i) +
                                       " lies beyond the likelihood horizon");
        }
    }
    if (cascade.events.size() < 2) {
        throw InsufficientEventsError("log-likelihood needs at least 2 events, got " +
                                      std::to_string(cascade.events.size()));
    }
    return EventView{&cascade.events, cascade.events.size()};
}

template <bool WithGradient>
LikelihoodEval evaluate(const HawkesParams& params, const Cascade& cascade, double horizon) {
    const EventView view = checked_events(params, cascade, horizon);
    const std::vector<Event>& events = *view.events;
    const std::size_t n = view.count;

    const double kappa = params.kappa;
    const double beta = params.beta;
    const double c = params.c;
    const double theta = params.theta;
    const double exponent = -(1.0 + theta);

    std::vector<double> mag_pow(n);
    std::vector<double> mag_log(n);
    for (std::size_t i = 0; i < n; ++i) {
        mag_pow[i] = std::pow(events[i].magnitude, beta);
        mag_log[i] = std::log(events[i].magnitude);
    }

    LikelihoodEval out;
    double triggering = 0.0; // sum_i log S_i
    double trig_beta = 0.0;
    double trig_c = 0.0;
    double trig_theta = 0.0;

    for (std::size_t i = 1; i < n; ++i) {
        const double ti = events[i].time;
        double s = 0.0;
        double s_beta = 0.0;
        double s_c = 0.0;
        double s_theta = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double d = ti - events[j].time + c;
            const double ld = std::log(d);
            const double w = mag_pow[j] * std::exp(exponent * ld);
            s += w;
            if constexpr (WithGradient) {
                s_beta += w * mag_log[j];
                s_c += w / d;
                s_theta += w * ld;
            }
        }
        if (!(s > 0.0) || !std::isfinite(s)) {
            out.value = kNegInf;
            out.gradient = {};
            return out;
        }
        triggering += std::log(s);
        if constexpr (WithGradient) {
            trig_beta += s_beta / s;
            trig_c += -(1.0 + theta) * s_c / s;
            trig_theta += -s_theta / s;
        }
    }

    // Compensator: kappa * sum_i m_i^beta * G_i with
    // G_i = [c^-theta - (horizon + c - t_i)^-theta] / theta.
    const double c_pow = std::pow(c, -theta);
    const double log_c = std::log(c);
    double comp = 0.0;
    double comp_beta = 0.0;
    double comp_c = 0.0;
    double comp_theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = horizon + c - events[i].time;
        const double u_pow = std::pow(u, -theta);
        const double g = (c_pow - u_pow) / theta;
        comp += mag_pow[i] * g;
        if constexpr (WithGradient) {
            comp_beta += mag_pow[i] * mag_log[i] * g;
            comp_c += mag_pow[i] * (std::pow(u, exponent) - std::pow(c, exponent));
            const double g_theta = (-log_c * c_pow + std::log(u) * u_pow) / theta - g / theta;
            comp_theta += mag_pow[i] * g_theta;
        }
    }

    const double n_minus_1 = static_cast<double>(n - 1);
    out.value = n_minus_1 * std::log(kappa) + triggering - kappa * comp;
    if (!std::isfinite(out.value)) {
        out.value = kNegInf;
        out.gradient = {};
        return out;
    }
    if constexpr (WithGradient) {
        out.gradient[0] = n_minus_1 / kappa - comp;
        out.gradient[1] = trig_beta - kappa * comp_beta;
        out.gradient[2] = trig_c - kappa * comp_c;
        out.gradient[3] = trig_theta - kappa * comp_theta;
    }
    return out;
}

} // namespace

double log_likelihood(const HawkesParams& params, const Cascade& cascade, double horizon) {
    return evaluate<false>(params, cascade, horizon).value;
}

LikelihoodGradient log_likelihood_gradient(const HawkesParams& params, const Cascade& cascade,
                                           double horizon) {
    return evaluate<true>(params, cascade, horizon).gradient;
}

LikelihoodEval log_likelihood_with_gradient(const HawkesParams& params, const Cascade& cascade,
                                            double horizon) {
    return evaluate<true>(params, cascade, horizon);
}

} // namespace cascade
