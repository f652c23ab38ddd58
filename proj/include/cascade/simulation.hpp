#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cascade/types.hpp"

namespace cascade {

struct SimConfig {
    HawkesParams params;               // kappa == 0 is allowed here (no offspring)
    InfluenceDistribution dist;
    double seed_magnitude{1.0};
    std::optional<double> horizon;     // empty: run until extinction (requires n* < 1)
    std::size_t max_events{1000000};
    std::uint64_t rng_seed{0};
};

// A simulated cascade with its branching structure: per-event generation
// (seed = 0) and parent index into cascade.events (empty for immigrants).
struct SimCascade {
    Cascade cascade;
    std::vector<int> generation;
    std::vector<std::optional<std::size_t>> parent;
    bool truncated{false};
};

// Inverse-CDF sample of the influence power law: m = m_min (1-u)^(-1/(alpha-1)).
double sample_magnitude(const InfluenceDistribution& dist, std::mt19937_64& rng);

// Offspring time offsets of one event of the given magnitude, sampled by
// inverting the integrated kernel
//   Lambda(tau) = kappa m^beta (c^-theta - (tau+c)^-theta) / theta.
// The count is Poisson with mean Lambda(window) (total mass when the window
// is unbounded). Offsets are strictly positive and unsorted.
std::vector<double> sample_offspring_offsets(const HawkesParams& params, double magnitude,
                                             std::optional<double> window, std::mt19937_64& rng);

// Cluster (branching) construction: every event spawns offspring from an
// inhomogeneous Poisson process with rate phi_m(tau). Events are returned in
// time order with generation and parent labels.
SimCascade simulate(const SimConfig& config);

// Ogata thinning on the aggregate rate; cross-check path without lineage.
Cascade simulate_thinning(const SimConfig& config);

// Treats the observed events as immigrant parents and samples their future
// offspring on (horizon, inf) plus all descendants. Observed events keep
// generation 0.
SimCascade continue_cascade(const Cascade& cascade, const HawkesParams& params,
                            const InfluenceDistribution& dist, double horizon,
                            std::mt19937_64& rng, std::size_t max_events = 1000000);

} // namespace cascade
