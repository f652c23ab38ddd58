#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cascade/fit.hpp"
#include "cascade/forest.hpp"
#include "cascade/types.hpp"

namespace cascade {

struct PredictionOutcome {
    std::size_t n_observed{0};
    double a1{0.0};     // expected first-generation events after the horizon
    double n_star{0.0};
    double n_inf_raw{0.0};
    std::optional<double> omega;
    std::optional<double> n_inf_corrected;
};

// A1 = kappa * sum_i m_i^beta / (theta (horizon + c - t_i)^theta), the
// expected number of direct offspring of the observed events after the
// horizon. All events must lie within the horizon.
double expected_first_generation(const HawkesParams& params, const Cascade& cascade,
                                 double horizon);

// N_inf = n + A1 / (1 - n*). Throws SupercriticalPredictionError when
// n* >= 1 (the cascade counts as failed).
PredictionOutcome predict_raw(const HawkesParams& params, const Cascade& cascade, double horizon,
                              const InfluenceDistribution& dist);

// Percentile ranks of theta and n* over the training values, by linear
// interpolation on the empirical CDF. The training minimum maps to 0, the
// maximum to 1; queries outside the range clamp.
class PercentileMap {
  public:
    PercentileMap() = default;
    PercentileMap(std::vector<double> theta_values, std::vector<double> n_star_values);

    double theta_rank(double theta) const;
    double n_star_rank(double n_star) const;

    const std::vector<double>& theta_values() const noexcept { return theta_values_; }
    const std::vector<double>& n_star_values() const noexcept { return n_star_values_; }

  private:
    std::vector<double> theta_values_;  // sorted
    std::vector<double> n_star_values_; // sorted
};

// The predictive layer's feature vector {c, theta percentile, A1, n*
// percentile}; kappa and beta are deliberately excluded.
struct LayerFeatures {
    double c{0.0};
    double theta_pct{0.0};
    double a1{0.0};
    double n_star_pct{0.0};

    std::array<double, 4> as_row() const { return {c, theta_pct, a1, n_star_pct}; }
    static std::vector<std::string> schema() { return {"c", "theta_pct", "a1", "n_star_pct"}; }
};

LayerFeatures build_layer_features(const FitResult& fit, double a1, const PercentileMap& pmap);

// Same construction, consumed by the will-double classifier.
LayerFeatures build_hawkesc_features(const FitResult& fit, double a1, const PercentileMap& pmap);

// Regression target for the scaling factor: inverts N_hat = n + w A1/(1-n*)
// at the realized final size, clamped to [1e-3, 1e3].
double omega_target(double n_real, std::size_t n_observed, double a1, double n_star);

inline constexpr double kOmegaFloor = 1e-3;
inline constexpr double kOmegaCeil = 1e3;

struct LayerTrainingExample {
    FitResult fit;
    double a1{0.0};
    std::size_t n_observed{0};
    double n_real{0.0};
};

struct PredictiveLayer {
    PercentileMap percentiles;
    forest::ForestModel model;

    void save(std::ostream& out) const;
    static PredictiveLayer load(std::istream& in);
};

// Builds the percentile map from the usable training cascades (subcritical,
// a1 > 0) and trains the scaling-factor regressor on their layer features.
// Needs at least 50 usable examples.
PredictiveLayer train_layer(const std::vector<LayerTrainingExample>& training,
                            const forest::ForestConfig& config = {});

// Corrected prediction N_hat = n + omega * A1/(1 - n*), with omega from the
// trained layer. Also carries the raw estimate.
PredictionOutcome predict_corrected(const PredictiveLayer& layer, const FitResult& fit,
                                    const Cascade& cascade, double horizon);

} // namespace cascade
