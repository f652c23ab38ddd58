#pragma once

#include <random>
#include <vector>

#include "cascade/types.hpp"

namespace testsupport {

inline cascade::Cascade make_cascade(std::vector<double> times, std::vector<double> magnitudes,
                                     double observed_until = 0.0) {
    cascade::Cascade c;
    c.id = "test";
    for (std::size_t i = 0; i < times.size(); ++i) {
        c.events.push_back(cascade::Event{times[i], magnitudes[i], std::nullopt});
    }
    c.observed_until = observed_until > 0.0 ? observed_until : times.back();
    return c;
}

// The two-event toy cascade used by the documented likelihood examples.
inline cascade::Cascade toy_cascade() { return make_cascade({0.0, 1.0}, {4.0, 1.0}, 2.0); }

inline cascade::HawkesParams random_params(std::mt19937_64& rng, double alpha) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    cascade::HawkesParams p;
    p.kappa = 0.05 + 1.95 * unif(rng);
    p.beta = (0.05 + 0.80 * unif(rng)) * (alpha - 1.0);
    p.c = 0.5 + 80.0 * unif(rng);
    p.theta = 0.15 + 1.5 * unif(rng);
    return p;
}

inline cascade::Cascade random_cascade(std::mt19937_64& rng, std::size_t n_events, double horizon,
                                       double alpha) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> times{0.0};
    for (std::size_t i = 1; i < n_events; ++i) {
        times.push_back(unif(rng) * horizon);
    }
    std::sort(times.begin(), times.end());
    std::vector<double> mags;
    for (std::size_t i = 0; i < n_events; ++i) {
        mags.push_back(std::pow(1.0 - unif(rng) * 0.9999, -1.0 / (alpha - 1.0)));
    }
    return make_cascade(std::move(times), std::move(mags), horizon);
}

} // namespace testsupport
