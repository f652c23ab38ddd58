#include "cascade/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "cascade/model.hpp"

namespace cascade {

namespace {

double rank_in(const std::vector<double>& sorted, double value) {
    const std::size_t n = sorted.size();
    if (n == 0) {
        throw ParameterDomainError("percentile map queried before construction");
    }
    if (n == 1 || sorted.front() == sorted.back()) {
        if (value < sorted.front()) {
            return 0.0;
        }
        return value > sorted.back() ? 1.0 : 0.5;
    }
    if (value <= sorted.front()) {
        return 0.0;
    }
    if (value >= sorted.back()) {
        return 1.0;
    }
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), value);
    const double denom = static_cast<double>(n - 1);
    if (lo != hi) {
        // Exact matches: midpoint of the tied block keeps ranks monotone.
        const double first = static_cast<double>(lo - sorted.begin());
        const double last = static_cast<double>(hi - sorted.begin()) - 1.0;
        return 0.5 * (first + last) / denom;
    }
    const std::size_t upper = static_cast<std::size_t>(lo - sorted.begin());
    const double x0 = sorted[upper - 1];
    const double x1 = sorted[upper];
    const double frac = (value - x0) / (x1 - x0);
    return (static_cast<double>(upper - 1) + frac) / denom;
}

void write_values(std::ostream& out, const std::vector<double>& values) {
    const auto count = static_cast<std::uint32_t>(values.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_values(std::istream& in) {
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) {
        throw ModelFormatError("predictive layer payload truncated");
    }
    return values;
}

constexpr std::uint32_t kLayerMagic = 0x48504c52; // "HPLR"
constexpr std::uint32_t kLayerVersion = 1;

} // namespace

double expected_first_generation(const HawkesParams& params, const Cascade& cascade,
                                 double horizon) {
    params.validate();
    if (!std::isfinite(horizon) || horizon <= 0.0) {
        throw ParameterDomainError("prediction horizon must be > 0");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < cascade.events.size(); ++i) {
        const Event& e = cascade.events[i];
        if (e.time > horizon) {
            throw ParameterDomainError("event " + std::to_string(i) +
                                       " lies beyond the prediction horizon");
        }
        sum += std::pow(e.magnitude, params.beta) *
               std::pow(horizon + params.c - e.time, -params.theta);
    }
    return params.kappa * sum / params.theta;
}

PredictionOutcome predict_raw(const HawkesParams& params, const Cascade& cascade, double horizon,
                              const InfluenceDistribution& dist) {
    const double n_star = branching_factor(params, dist);
    if (n_star >= 1.0) {
        throw SupercriticalPredictionError("n* >= 1: no finite size prediction");
    }
    PredictionOutcome outcome;
    outcome.n_observed = cascade.events.size();
    outcome.a1 = expected_first_generation(params, cascade, horizon);
    outcome.n_star = n_star;
    outcome.n_inf_raw = static_cast<double>(outcome.n_observed) + outcome.a1 / (1.0 - n_star);
    return outcome;
}

PercentileMap::PercentileMap(std::vector<double> theta_values, std::vector<double> n_star_values)
    : theta_values_(std::move(theta_values)), n_star_values_(std::move(n_star_values)) {
    if (theta_values_.empty() || n_star_values_.empty()) {
        throw ParameterDomainError("percentile map needs non-empty training values");
    }
    std::sort(theta_values_.begin(), theta_values_.end());
    std::sort(n_star_values_.begin(), n_star_values_.end());
}

double PercentileMap::theta_rank(double theta) const { return rank_in(theta_values_, theta); }

double PercentileMap::n_star_rank(double n_star) const { return rank_in(n_star_values_, n_star); }

LayerFeatures build_layer_features(const FitResult& fit, double a1, const PercentileMap& pmap) {
    LayerFeatures features;
    features.c = fit.params.c;
    features.theta_pct = pmap.theta_rank(fit.params.theta);
    features.a1 = a1;
    features.n_star_pct = pmap.n_star_rank(fit.n_star);
    return features;
}

LayerFeatures build_hawkesc_features(const FitResult& fit, double a1, const PercentileMap& pmap) {
    return build_layer_features(fit, a1, pmap);
}

double omega_target(double n_real, std::size_t n_observed, double a1, double n_star) {
    if (!(a1 > 0.0)) {
        throw ParameterDomainError("omega target undefined for a1 <= 0");
    }
    if (!(n_star < 1.0)) {
        throw ParameterDomainError("omega target undefined for supercritical fits");
    }
    const double omega = (n_real - static_cast<double>(n_observed)) * (1.0 - n_star) / a1;
    return std::clamp(omega, kOmegaFloor, kOmegaCeil);
}

PredictiveLayer train_layer(const std::vector<LayerTrainingExample>& training,
                            const forest::ForestConfig& config) {
    std::vector<const LayerTrainingExample*> usable;
    usable.reserve(training.size());
    for (const LayerTrainingExample& example : training) {
        if (example.fit.n_star < 1.0 && example.a1 > 0.0) {
            usable.push_back(&example);
        }
    }
    if (usable.size() < 50) {
        throw InsufficientTrainingError("predictive layer needs at least 50 usable cascades, got " +
                                        std::to_string(usable.size()));
    }

    std::vector<double> thetas;
    std::vector<double> n_stars;
    thetas.reserve(usable.size());
    n_stars.reserve(usable.size());
    for (const LayerTrainingExample* example : usable) {
        thetas.push_back(example->fit.params.theta);
        n_stars.push_back(example->fit.n_star);
    }

    PredictiveLayer layer;
    layer.percentiles = PercentileMap(std::move(thetas), std::move(n_stars));

    forest::Matrix x;
    std::vector<double> y;
    x.reserve(usable.size());
    y.reserve(usable.size());
    for (const LayerTrainingExample* example : usable) {
        const LayerFeatures features =
            build_layer_features(example->fit, example->a1, layer.percentiles);
        const auto row = features.as_row();
        x.emplace_back(row.begin(), row.end());
        y.push_back(omega_target(example->n_real, example->n_observed, example->a1,
                                 example->fit.n_star));
    }

    layer.model = forest::train_regressor(x, y, LayerFeatures::schema(), config);
    return layer;
}

PredictionOutcome predict_corrected(const PredictiveLayer& layer, const FitResult& fit,
                                    const Cascade& cascade, double horizon) {
    if (!(fit.n_star < 1.0)) {
        throw SupercriticalPredictionError("n* >= 1: no finite size prediction");
    }
    PredictionOutcome outcome;
    outcome.n_observed = cascade.events.size();
    outcome.a1 = expected_first_generation(fit.params, cascade, horizon);
    outcome.n_star = fit.n_star;
    const double future = outcome.a1 / (1.0 - fit.n_star);
    outcome.n_inf_raw = static_cast<double>(outcome.n_observed) + future;

    const LayerFeatures features = build_layer_features(fit, outcome.a1, layer.percentiles);
    const auto row = features.as_row();
    const double omega = forest::predict_value(layer.model, row);
    outcome.omega = omega;
    outcome.n_inf_corrected = static_cast<double>(outcome.n_observed) + omega * future;
    return outcome;
}

void PredictiveLayer::save(std::ostream& out) const {
    out.write(reinterpret_cast<const char*>(&kLayerMagic), sizeof(kLayerMagic));
    out.write(reinterpret_cast<const char*>(&kLayerVersion), sizeof(kLayerVersion));
    write_values(out, percentiles.theta_values());
    write_values(out, percentiles.n_star_values());
    forest::save(model, out);
    if (!out) {
        throw ModelFormatError("failed to write predictive layer payload");
    }
}

PredictiveLayer PredictiveLayer::load(std::istream& in) {
    std::uint32_t magic = 0;
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || magic != kLayerMagic) {
        throw ModelFormatError("not a predictive layer payload (bad magic)");
    }
    if (version != kLayerVersion) {
        throw ModelFormatError("unsupported predictive layer version " + std::to_string(version));
    }
    PredictiveLayer layer;
    std::vector<double> thetas = read_values(in);
    std::vector<double> n_stars = read_values(in);
    layer.percentiles = PercentileMap(std::move(thetas), std::move(n_stars));
    layer.model = forest::load(in);
    return layer;
}

} // namespace cascade
