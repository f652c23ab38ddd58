#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {

// Default influence exponent, fitted once on a large follower-count sample.
inline constexpr double kDefaultAlpha = 2.016;

struct UserMeta {
    double followers{0.0};
    double friends{0.0};
    double statuses{0.0};
    double account_created{0.0}; // seconds since epoch
    std::string user_key;
};

// One (re)tweet: time offset from the cascade start and the emitting user's
// influence (follower count, clamped to >= 1).
struct Event {
    double time{0.0};
    double magnitude{1.0};
    std::optional<UserMeta> user;
};

struct Cascade {
    std::string id;
    std::vector<Event> events;       // sorted non-decreasing by time, events[0].time == 0
    double observed_until{0.0};      // data horizon T, >= max event time
    double start_epoch{0.0};         // wall clock of the first event; 0 when unknown

    std::size_t size() const noexcept { return events.size(); }

    // Throws ParameterDomainError when an invariant is broken.
    void validate() const;
};

// Power law over user influence: P(m) = (alpha-1) m_min^(alpha-1) m^-alpha on [m_min, inf).
struct InfluenceDistribution {
    double alpha{kDefaultAlpha};
    double m_min{1.0};

    void validate() const;
};

struct HawkesParams {
    double kappa{0.0}; // content virality, > 0
    double beta{0.0};  // influence warping exponent, 0 < beta < alpha - 1
    double c{0.0};     // temporal shift, seconds, > 0
    double theta{0.0}; // memory decay exponent, > 0

    void validate() const;
    void validate(const InfluenceDistribution& dist) const;
};

// Restricts a cascade to events with time <= horizon and sets observed_until
// to the horizon. The horizon must be > 0 and at least the first event time.
Cascade observed_prefix(const Cascade& cascade, double horizon);

// First `count` events; observed_until becomes the last kept event time.
Cascade observed_prefix_by_count(const Cascade& cascade, std::size_t count);

} // namespace cascade
