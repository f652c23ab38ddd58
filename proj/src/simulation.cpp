#include "cascade/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cascade/model.hpp"

namespace cascade {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

void validate_sim_params(const HawkesParams& params) {
    if (!std::isfinite(params.kappa) || params.kappa < 0.0) {
        throw ParameterDomainError("simulation kappa must be >= 0");
    }
    if (params.kappa > 0.0) {
        params.validate();
    }
}

double uniform_open(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    while (u <= 0.0) {
        u = unif(rng);
    }
    return u;
}

struct BuiltEvent {
    double time;
    double magnitude;
    int generation;
    std::optional<std::size_t> parent; // index in build order
};

// Breadth-first cluster expansion of the offspring of `pending` events.
// Returns true when completed, false when the max_events cap was hit.
bool expand_cluster(std::vector<BuiltEvent>& events, std::size_t first_pending,
                    const HawkesParams& params, const InfluenceDistribution& dist,
                    std::optional<double> horizon, std::size_t max_events, std::mt19937_64& rng) {
    for (std::size_t cursor = first_pending; cursor < events.size(); ++cursor) {
        const BuiltEvent parent = events[cursor];
        std::optional<double> window;
        if (horizon) {
            if (parent.time >= *horizon) {
                continue;
            }
            window = *horizon - parent.time;
        }
        const std::vector<double> offsets =
            sample_offspring_offsets(params, parent.magnitude, window, rng);
        for (double tau : offsets) {
            if (events.size() >= max_events) {
                return false;
            }
            events.push_back(BuiltEvent{parent.time + tau, sample_magnitude(dist, rng),
                                        parent.generation + 1, cursor});
        }
    }
    return true;
}

SimCascade finish_cascade(std::vector<BuiltEvent> events, std::string id, bool truncated,
                          std::optional<double> horizon) {
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return events[a].time < events[b].time;
    });
    std::vector<std::size_t> position(events.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        position[order[i]] = i;
    }

    SimCascade out;
    out.truncated = truncated;
    out.cascade.id = std::move(id);
    out.cascade.events.reserve(events.size());
    out.generation.reserve(events.size());
    out.parent.reserve(events.size());
    for (std::size_t i : order) {
        const BuiltEvent& e = events[i];
        out.cascade.events.push_back(Event{e.time, e.magnitude, std::nullopt});
        out.generation.push_back(e.generation);
        if (e.parent) {
            out.parent.push_back(position[*e.parent]);
        } else {
            out.parent.push_back(std::nullopt);
        }
    }
    out.cascade.observed_until = horizon ? *horizon : out.cascade.events.back().time;
    return out;
}

} // namespace

double sample_magnitude(const InfluenceDistribution& dist, std::mt19937_64& rng) {
    dist.validate();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    return dist.m_min * std::pow(1.0 - u, -1.0 / (dist.alpha - 1.0));
}

std::vector<double> sample_offspring_offsets(const HawkesParams& params, double magnitude,
                                             std::optional<double> window, std::mt19937_64& rng) {
    validate_sim_params(params);
    if (!std::isfinite(magnitude) || magnitude < 1.0) {
        throw ParameterDomainError("offspring magnitude must be >= 1");
    }
    if (params.kappa == 0.0) {
        return {};
    }
    const double theta = params.theta;
    const double c = params.c;
    const double rate_scale = params.kappa * std::pow(magnitude, params.beta) / theta;
    const double total_mass = rate_scale * std::pow(c, -theta);

    double mass = total_mass;
    double window_pow = 0.0; // (window + c)^-theta
    if (window) {
        if (*window <= 0.0) {
            return {};
        }
        window_pow = std::pow(*window + c, -theta);
        mass = rate_scale * (std::pow(c, -theta) - window_pow);
    }
    if (!(mass > 0.0)) {
        return {};
    }

    std::poisson_distribution<long long> poisson(mass);
    const long long count = poisson(rng);
    std::vector<double> offsets;
    offsets.reserve(static_cast<std::size_t>(std::min<long long>(count, 1 << 20)));
    for (long long k = 0; k < count; ++k) {
        const double u = uniform_open(rng);
        double tau;
        if (window) {
            // Invert Lambda on (0, window]: (tau+c)^-theta = (1-u) c^-theta + u (window+c)^-theta.
            const double residual = (1.0 - u) * std::pow(c, -theta) + u * window_pow;
            tau = std::pow(residual, -1.0 / theta) - c;
        } else {
            tau = c * (std::pow(1.0 - u, -1.0 / theta) - 1.0);
        }
        if (tau <= 0.0) {
            tau = std::numeric_limits<double>::min();
        }
        offsets.push_back(tau);
    }
    return offsets;
}

SimCascade simulate(const SimConfig& config) {
    validate_sim_params(config.params);
    config.dist.validate();
    if (!std::isfinite(config.seed_magnitude) || config.seed_magnitude < 1.0) {
        throw ParameterDomainError("seed magnitude must be >= 1");
    }
    if (config.max_events < 1) {
        throw ConfigError("max_events must be >= 1");
    }
    if (!config.horizon && config.params.kappa > 0.0) {
        const double n_star = branching_factor(config.params, config.dist);
        if (n_star >= 1.0) {
            throw ConfigError("unbounded-horizon simulation requires n* < 1");
        }
    }
    if (config.horizon && *config.horizon <= 0.0) {
        throw ConfigError("simulation horizon must be > 0");
    }

    std::mt19937_64 rng(config.rng_seed);
    std::vector<BuiltEvent> events;
    events.push_back(BuiltEvent{0.0, config.seed_magnitude, 0, std::nullopt});
    const bool completed = expand_cluster(events, 0, config.params, config.dist, config.horizon,
                                          config.max_events, rng);
    return finish_cascade(std::move(events), "sim", !completed, config.horizon);
}

Cascade simulate_thinning(const SimConfig& config) {
    validate_sim_params(config.params);
    config.dist.validate();
    if (!std::isfinite(config.seed_magnitude) || config.seed_magnitude < 1.0) {
        throw ParameterDomainError("seed magnitude must be >= 1");
    }
    if (!config.horizon && config.params.kappa > 0.0) {
        const double n_star = branching_factor(config.params, config.dist);
        if (n_star >= 1.0) {
            throw ConfigError("unbounded-horizon simulation requires n* < 1");
        }
    }

    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Cascade cascade;
    cascade.id = "sim-thinning";
    cascade.events.push_back(Event{0.0, config.seed_magnitude, std::nullopt});
    if (config.params.kappa == 0.0) {
        cascade.observed_until = config.horizon.value_or(0.0);
        return cascade;
    }

    const double theta = config.params.theta;
    const double kappa = config.params.kappa;
    const double beta = config.params.beta;
    const double c = config.params.c;

    // Expected number of events still to come after t; used as the extinction
    // criterion for unbounded runs.
    auto remaining_mass = [&](double t) {
        double mass = 0.0;
        for (const Event& e : cascade.events) {
            mass += std::pow(e.magnitude, beta) * std::pow(t - e.time + c, -theta);
        }
        return kappa * mass / theta;
    };

    double t = 0.0;
    while (cascade.events.size() < config.max_events) {
        // The aggregate rate decays between events, so its value just after t
        // dominates the process on (t, next event).
        const double bound = intensity(config.params, cascade, std::nextafter(t, kInfinity));
        if (!(bound > 0.0)) {
            break;
        }
        if (config.horizon) {
            if (t >= *config.horizon) {
                break;
            }
        } else if (remaining_mass(t) < 1e-9) {
            break;
        }
        std::exponential_distribution<double> expo(bound);
        const double candidate = t + expo(rng);
        if (config.horizon && candidate > *config.horizon) {
            break;
        }
        const double rate = intensity(config.params, cascade, candidate);
        t = candidate;
        if (unif(rng) * bound <= rate) {
            cascade.events.push_back(Event{candidate, sample_magnitude(config.dist, rng), std::nullopt});
        }
    }
    cascade.observed_until = config.horizon.value_or(cascade.events.back().time);
    return cascade;
}

SimCascade continue_cascade(const Cascade& cascade, const HawkesParams& params,
                            const InfluenceDistribution& dist, double horizon,
                            std::mt19937_64& rng, std::size_t max_events) {
    cascade.validate();
    params.validate(dist);
    if (!std::isfinite(horizon) || horizon <= 0.0) {
        throw ParameterDomainError("continuation horizon must be > 0");
    }
    if (cascade.events.back().time > horizon) {
        throw ParameterDomainError("observed events extend beyond the continuation horizon");
    }
    if (branching_factor(params, dist) >= 1.0) {
        throw SupercriticalPredictionError("cannot continue a supercritical cascade");
    }

    const double theta = params.theta;
    const double c = params.c;
    std::vector<BuiltEvent> events;
    events.reserve(cascade.events.size());
    for (const Event& e : cascade.events) {
        events.push_back(BuiltEvent{e.time, e.magnitude, 0, std::nullopt});
    }

    // First generation: offspring of observed events restricted to (horizon, inf).
    const std::size_t observed = events.size();
    for (std::size_t i = 0; i < observed; ++i) {
        const double elapsed = horizon - events[i].time;
        const double tail_mass = params.kappa * std::pow(events[i].magnitude, params.beta) *
                                 std::pow(elapsed + c, -theta) / theta;
        if (!(tail_mass > 0.0)) {
            continue;
        }
        std::poisson_distribution<long long> poisson(tail_mass);
        const long long count = poisson(rng);
        for (long long k = 0; k < count && events.size() < max_events; ++k) {
            const double u = uniform_open(rng);
            // Inverse of the integrated kernel restricted to tau > elapsed.
            double tau = (elapsed + c) * std::pow(1.0 - u, -1.0 / theta) - c;
            if (tau <= elapsed) {
                tau = std::nextafter(elapsed, kInfinity);
            }
            events.push_back(BuiltEvent{events[i].time + tau, sample_magnitude(dist, rng), 1, i});
        }
    }

    const bool completed =
        expand_cluster(events, observed, params, dist, std::nullopt, max_events, rng);

    SimCascade out = finish_cascade(std::move(events), cascade.id + "-cont", !completed, std::nullopt);
    out.cascade.start_epoch = cascade.start_epoch;
    if (out.cascade.observed_until < horizon) {
        out.cascade.observed_until = horizon;
    }
    return out;
}

} // namespace cascade
