#include "cascade/types.hpp"

#include <cmath>

namespace cascade {

void Cascade::validate() const {
    if (events.empty()) {
        throw ParameterDomainError("cascade '" + id + "' has no events");
    }
    if (events.front().time != 0.0) {
        throw ParameterDomainError("cascade '" + id + "' must start at time 0");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (!std::isfinite(e.time) || e.time < 0.0) {
            throw ParameterDomainError("cascade '" + id + "': event " + std::to_string(i) +
                                       " has invalid time");
        }
        if (e.time < prev) {
            throw ParameterDomainError("cascade '" + id + "': events not sorted at index " +
                                       std::to_string(i));
        }
        if (!std::isfinite(e.magnitude) || e.magnitude < 1.0) {
            throw ParameterDomainError("cascade '" + id + "': event " + std::to_string(i) +
                                       " has magnitude < 1");
        }
        if (e.time > observed_until) {
            throw ParameterDomainError("cascade '" + id + "': event " + std::to_string(i) +
                                       " beyond observed_until");
        }
        prev = e.time;
    }
    if (!std::isfinite(observed_until) || observed_until < 0.0) {
        throw ParameterDomainError("cascade '" + id + "': invalid observed_until");
    }
}

void InfluenceDistribution::validate() const {
    if (!std::isfinite(alpha) || alpha <= 1.0) {
        throw ParameterDomainError("influence distribution requires alpha > 1");
    }
    if (!std::isfinite(m_min) || m_min < 1.0) {
        throw ParameterDomainError("influence distribution requires m_min >= 1");
    }
}

void HawkesParams::validate() const {
    if (!std::isfinite(kappa) || kappa <= 0.0) {
        throw ParameterDomainError("kappa must be > 0");
    }
    if (!std::isfinite(beta) || beta <= 0.0) {
        throw ParameterDomainError("beta must be > 0");
    }
    if (!std::isfinite(c) || c <= 0.0) {
        throw ParameterDomainError("c must be > 0");
    }
    if (!std::isfinite(theta) || theta <= 0.0) {
        throw ParameterDomainError("theta must be > 0");
    }
}

void HawkesParams::validate(const InfluenceDistribution& dist) const {
    validate();
    dist.validate();
    if (beta >= dist.alpha - 1.0) {
        throw ParameterDomainError("beta must be < alpha - 1");
    }
}

Cascade observed_prefix(const Cascade& cascade, double horizon) {
    cascade.validate();
    if (!std::isfinite(horizon) || horizon <= 0.0) {
        throw ParameterDomainError("observation horizon must be > 0");
    }
    Cascade prefix;
    prefix.id = cascade.id;
    prefix.start_epoch = cascade.start_epoch;
    prefix.observed_until = horizon;
    for (const Event& e : cascade.events) {
        if (e.time > horizon) {
            break;
        }
        prefix.events.push_back(e);
    }
    return prefix;
}

Cascade observed_prefix_by_count(const Cascade& cascade, std::size_t count) {
    cascade.validate();
    if (count == 0 || count > cascade.events.size()) {
        throw ParameterDomainError("prefix count out of range for cascade '" + cascade.id + "'");
    }
    Cascade prefix;
    prefix.id = cascade.id;
    prefix.start_epoch = cascade.start_epoch;
    prefix.events.assign(cascade.events.begin(),
                         cascade.events.begin() + static_cast<std::ptrdiff_t>(count));
    prefix.observed_until = prefix.events.back().time;
    return prefix;
}

} // namespace cascade
