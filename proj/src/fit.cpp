#include "cascade/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "cascade/likelihood.hpp"
#include "cascade/model.hpp"

namespace cascade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<double, 4> kPenaltyWeights = {1e2, 1e4, 1e6, 1e8};

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double inf_norm(const Vec4& a) {
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

Mat4 identity() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) {
        m[i][i] = 1.0;
    }
    return m;
}

Vec4 mat_vec(const Mat4& m, const Vec4& v) {
    Vec4 out{};
    for (int i = 0; i < 4; ++i) {
        out[i] = dot(m[i], v);
    }
    return out;
}

// Optimization variables: x = (log kappa, logit(beta/(alpha-1)), log c, log theta).
struct Transform {
    double beta_range; // alpha - 1

    HawkesParams to_params(const Vec4& x) const {
        const double sigma = 1.0 / (1.0 + std::exp(-x[1]));
        return HawkesParams{std::exp(x[0]), beta_range * sigma, std::exp(x[2]), std::exp(x[3])};
    }

    Vec4 to_x(const HawkesParams& p) const {
        const double ratio = std::clamp(p.beta / beta_range, 1e-8, 1.0 - 1e-8);
        return Vec4{std::log(p.kappa), std::log(ratio / (1.0 - ratio)), std::log(p.c),
                    std::log(p.theta)};
    }

    // Chain-rule factors d(param)/d(x) for each coordinate.
    Vec4 jacobian_diag(const HawkesParams& p) const {
        return Vec4{p.kappa, p.beta * (1.0 - p.beta / beta_range), p.c, p.theta};
    }
};

struct Objective {
    const Cascade* cascade;
    double horizon;
    const InfluenceDistribution* dist;
    Transform transform;
    double n_star_bound;
    double penalty_weight;

    double n_star_of(const HawkesParams& p) const {
        return p.kappa * std::pow(dist->m_min, p.beta) * (dist->alpha - 1.0) /
               ((dist->alpha - p.beta - 1.0) * p.theta * std::pow(p.c, p.theta));
    }

    double value(const Vec4& x) const {
        const HawkesParams p = transform.to_params(x);
        if (!finite_params(p)) {
            return kInf;
        }
        const double ll = log_likelihood(p, *cascade, horizon);
        if (!std::isfinite(ll)) {
            return kInf;
        }
        return -ll + penalty_weight * std::max(0.0, n_star_of(p) - n_star_bound);
    }

    double value_gradient(const Vec4& x, Vec4& grad) const {
        const HawkesParams p = transform.to_params(x);
        if (!finite_params(p)) {
            return kInf;
        }
        const LikelihoodEval eval = log_likelihood_with_gradient(p, *cascade, horizon);
        if (!std::isfinite(eval.value)) {
            return kInf;
        }
        Vec4 grad_params{-eval.gradient[0], -eval.gradient[1], -eval.gradient[2],
                         -eval.gradient[3]};
        double objective = -eval.value;

        const double n_star = n_star_of(p);
        if (n_star > n_star_bound) {
            objective += penalty_weight * (n_star - n_star_bound);
            // d n*/d params, with n* linear in kappa.
            grad_params[0] += penalty_weight * n_star / p.kappa;
            grad_params[1] += penalty_weight * n_star *
                              (std::log(dist->m_min) + 1.0 / (dist->alpha - p.beta - 1.0));
            grad_params[2] += penalty_weight * n_star * (-p.theta / p.c);
            grad_params[3] += penalty_weight * n_star * (-1.0 / p.theta - std::log(p.c));
        }

        const Vec4 jac = transform.jacobian_diag(p);
        for (int i = 0; i < 4; ++i) {
            grad[i] = grad_params[i] * jac[i];
        }
        return objective;
    }

    static bool finite_params(const HawkesParams& p) {
        return std::isfinite(p.kappa) && p.kappa > 0.0 && std::isfinite(p.beta) && p.beta > 0.0 &&
               std::isfinite(p.c) && p.c > 0.0 && std::isfinite(p.theta) && p.theta > 0.0;
    }
};

struct StageResult {
    Vec4 x;
    double objective;
    double gradient_norm;
    bool gradient_converged;
    std::size_t iterations;
    std::string failure; // empty on success
};

StageResult minimize_bfgs(const Objective& objective, Vec4 x0, std::size_t max_iterations,
                          double gradient_tolerance) {
    StageResult result{x0, kInf, kInf, false, 0, ""};

    Vec4 grad{};
    double f = objective.value_gradient(x0, grad);
    if (!std::isfinite(f)) {
        result.failure = "non-finite objective at start";
        return result;
    }

    Vec4 x = x0;
    Mat4 h = identity();
    int stall_count = 0;

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        result.iterations = iter;
        const double gnorm = inf_norm(grad);
        if (gnorm <= gradient_tolerance) {
            result.gradient_converged = true;
            break;
        }

        Vec4 direction = mat_vec(h, grad);
        for (double& d : direction) {
            d = -d;
        }
        double slope = dot(grad, direction);
        if (!(slope < 0.0)) {
            h = identity();
            for (int i = 0; i < 4; ++i) {
                direction[i] = -grad[i];
            }
            slope = dot(grad, direction);
        }

        // Armijo backtracking.
        double step = 1.0;
        Vec4 x_next{};
        Vec4 grad_next{};
        double f_next = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            for (int i = 0; i < 4; ++i) {
                x_next[i] = x[i] + step * direction[i];
            }
            f_next = objective.value_gradient(x_next, grad_next);
            if (std::isfinite(f_next) && f_next <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (iter == 0) {
                result.failure = "line search failed at start";
                return result;
            }
            break; // converged as far as the line search allows
        }
        stall_count = f - f_next <= 1e-11 * (1.0 + std::abs(f)) ? stall_count + 1 : 0;

        Vec4 s{};
        Vec4 y{};
        for (int i = 0; i < 4; ++i) {
            s[i] = x_next[i] - x[i];
            y[i] = grad_next[i] - grad[i];
        }
        const double ys = dot(y, s);
        if (ys > 1e-12) {
            const double rho = 1.0 / ys;
            const Vec4 hy = mat_vec(h, y);
            const double yhy = dot(y, hy);
            // BFGS inverse update: H += (1 + yHy rho) rho s s^T - rho (s (Hy)^T + Hy s^T).
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    h[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] -
                               rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        x = x_next;
        grad = grad_next;
        f = f_next;
        if (stall_count >= 6) {
            break;
        }
    }

    result.x = x;
    result.objective = f;
    result.gradient_norm = inf_norm(grad);
    result.gradient_converged = result.gradient_converged || result.gradient_norm <= gradient_tolerance;
    return result;
}

} // namespace

std::vector<HawkesParams> default_starts(const InfluenceDistribution& dist) {
    dist.validate();
    const double range = dist.alpha - 1.0;
    const std::array<double, 2> kappas = {0.1, 1.0};
    const std::array<double, 2> betas = {std::min(0.1, 0.4 * range), 0.5 * range};
    const std::array<double, 2> cs = {1.0, 60.0};
    const std::array<double, 2> thetas = {0.2, 0.8};
    std::vector<HawkesParams> starts;
    starts.reserve(16);
    for (double k : kappas) {
        for (double b : betas) {
            for (double c : cs) {
                for (double t : thetas) {
                    starts.push_back(HawkesParams{k, b, c, t});
                }
            }
        }
    }
    return starts;
}

FitResult fit(const Cascade& cascade, const FitConfig& config, const InfluenceDistribution& dist) {
    dist.validate();
    if (!std::isfinite(config.horizon) || config.horizon <= 0.0) {
        throw ConfigError("fit horizon must be > 0");
    }
    if (!(config.n_star_slack > 0.0) || config.n_star_slack > 0.1) {
        throw ConfigError("n_star_slack must lie in (0, 0.1]");
    }
    if (config.max_iterations == 0) {
        throw ConfigError("max_iterations must be >= 1");
    }

    const Cascade prefix = observed_prefix(cascade, config.horizon);
    if (prefix.events.size() < 2) {
        throw InsufficientEventsError("fit needs at least 2 events within the horizon, got " +
                                      std::to_string(prefix.events.size()));
    }

    std::vector<HawkesParams> starts = config.starts.empty() ? default_starts(dist) : config.starts;
    const double beta_range = dist.alpha - 1.0;
    for (HawkesParams& start : starts) {
        if (!Objective::finite_params(start)) {
            throw ConfigError("fit start point outside the parameter domain");
        }
        start.beta = std::clamp(start.beta, 1e-6 * beta_range, (1.0 - 1e-6) * beta_range);
    }

    const Transform transform{beta_range};
    const double bound = 1.0 - config.n_star_slack;

    bool have_best = false;
    FitResult best;
    std::vector<std::string> diagnostics;

    for (std::size_t s = 0; s < starts.size(); ++s) {
        Objective objective{&prefix, config.horizon, &dist, transform, bound, kPenaltyWeights[0]};
        Vec4 x = transform.to_x(starts[s]);

        StageResult stage{};
        bool failed = false;
        for (std::size_t k = 0; k < kPenaltyWeights.size(); ++k) {
            objective.penalty_weight = kPenaltyWeights[k];
            // The first stage does the real work; later ones only push a
            // boundary solution toward feasibility from a warm start.
            const std::size_t budget =
                k == 0 ? std::max<std::size_t>(30, config.max_iterations * 2 / 5)
                       : std::max<std::size_t>(15, config.max_iterations / 5);
            stage = minimize_bfgs(objective, x, budget, config.gradient_tolerance);
            if (!stage.failure.empty()) {
                failed = true;
                break;
            }
            x = stage.x;
            const HawkesParams p = transform.to_params(x);
            if (objective.n_star_of(p) <= bound + 1e-12) {
                break; // feasible; no need to raise the penalty weight
            }
        }
        if (failed) {
            diagnostics.push_back("start " + std::to_string(s) + ": " + stage.failure);
            continue;
        }

        HawkesParams params = transform.to_params(x);
        std::vector<std::string> active;
        double n_star = branching_factor(params, dist);
        if (n_star > bound) {
            // Feasibility projection; n* is exactly linear in kappa.
            params.kappa *= bound / n_star;
            n_star = branching_factor(params, dist);
            active.push_back("n_star_upper");
        } else if (n_star >= bound * (1.0 - 1e-9)) {
            active.push_back("n_star_upper");
        }

        const double ll = log_likelihood(params, prefix, config.horizon);
        if (!std::isfinite(ll)) {
            diagnostics.push_back("start " + std::to_string(s) +
                                  ": non-finite likelihood at solution");
            continue;
        }

        FitResult candidate;
        candidate.params = params;
        candidate.log_likelihood = ll;
        candidate.n_star = n_star;
        candidate.converged = stage.gradient_converged || !active.empty();
        candidate.active_constraints = std::move(active);
        candidate.starts_tried = s + 1;

        if (!have_best || candidate.log_likelihood > best.log_likelihood) {
            best = candidate;
            have_best = true;
        }
        diagnostics.push_back("start " + std::to_string(s) + ": ok");
    }

    if (!have_best) {
        throw FitFailureError("all " + std::to_string(starts.size()) + " fit starts failed",
                              std::move(diagnostics));
    }
    best.starts_tried = starts.size();
    return best;
}

} // namespace cascade
