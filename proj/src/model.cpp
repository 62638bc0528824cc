#include "carbon/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "carbon/error.hpp"

namespace carbon {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorCode::NonPositiveCoefficient,
                    std::string(name) + " must be positive and finite, got " + std::to_string(value));
    }
}

}  // namespace

ModelParams validate_params(const RawParams& raw) {
    require_positive(raw.sigma, "sigma");
    require_positive(raw.nu, "nu");
    require_positive(raw.r, "r");
    require_positive(raw.m, "m");
    require_positive(raw.T, "T");
    if (!std::isfinite(raw.mu)) {
        throw Error(ErrorCode::NonPositiveCoefficient, "mu must be finite");
    }
    if (!(raw.mu > raw.r)) {
        throw Error(ErrorCode::MuNotGreaterThanR,
                    "mu=" + std::to_string(raw.mu) + " must exceed r=" + std::to_string(raw.r));
    }
    return ModelParams{raw.mu, raw.sigma, raw.nu, raw.r, raw.m, raw.T,
                       (raw.mu - raw.r) / (2.0 * raw.m)};
}

void validate_penalty(const PenaltyConfig& cfg) {
    auto in_range = [](double e) { return e > 0.0 && e <= 1.0; };
    if (!in_range(cfg.epsilon)) {
        throw Error(ErrorCode::InvalidPenalty, "epsilon must lie in (0, 1]");
    }
    for (std::size_t k = 0; k < cfg.epsilon_schedule.size(); ++k) {
        if (!in_range(cfg.epsilon_schedule[k])) {
            throw Error(ErrorCode::InvalidPenalty, "schedule entry outside (0, 1]");
        }
        if (k > 0 && !(cfg.epsilon_schedule[k] < cfg.epsilon_schedule[k - 1])) {
            throw Error(ErrorCode::InvalidPenalty, "schedule must be strictly decreasing");
        }
    }
}

BoundConstants make_bound_constants(const ModelParams& p, std::optional<double> kappa,
                                    std::optional<double> a_const) {
    const double kappa_floor = 2.0 * (p.sigma * p.sigma + p.mu);
    BoundConstants c{p.delta, kappa.value_or(kappa_floor + 10.0), a_const.value_or(1.0)};
    if (!(c.kappa > kappa_floor)) {
        throw Error(ErrorCode::ValidationError,
                    "kappa must exceed 2(sigma^2+mu)=" + std::to_string(kappa_floor));
    }
    if (!(c.a_const > 0.0)) {
        throw Error(ErrorCode::ValidationError, "a must be positive");
    }
    return c;
}

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gaussian_pdf(double z) {
    return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double terminal_payoff(double x, double s) { return std::max(x, 0.0) * s; }

double zero_strategy_cost(double x, double s, double tau, const ModelParams& p) {
    if (tau <= 0.0) {
        return terminal_payoff(x, s);
    }
    const double spread = p.nu * std::sqrt(tau);
    const double z = x / spread;
    return s * std::exp(p.excess_drift() * tau) * (x * gaussian_cdf(z) + spread * gaussian_pdf(z));
}

double zero_strategy_cost_bound(double x, double s, double tau, const ModelParams& p) {
    const double spread = p.nu * std::sqrt(std::max(tau, 0.0));
    return s * std::exp(p.excess_drift() * tau) *
           (std::max(x, 0.0) + spread * gaussian_pdf(0.0));
}

double beta(double z, const ModelParams& p) {
    const double scale = 2.0 * p.excess_drift();
    if (z <= 0.0) {
        return scale * (1.0 - 2.0 * z);
    }
    if (z >= 1.0) {
        return 0.0;
    }
    return scale * (1.0 - z) * (1.0 - z);
}

double beta_derivative(double z, const ModelParams& p) {
    const double scale = 2.0 * p.excess_drift();
    if (z <= 0.0) {
        return -2.0 * scale;
    }
    if (z >= 1.0) {
        return 0.0;
    }
    return -2.0 * scale * (1.0 - z);
}

double smooth_ramp(double z) {
    if (z <= 1.0) {
        return 0.0;
    }
    if (z >= 3.0) {
        return 1.0;
    }
    return 0.5 * (z - 1.0) - std::sin(std::numbers::pi * (z - 1.0)) / (2.0 * std::numbers::pi);
}

double initial_profile(double x, double eps) {
    if (x <= -eps) {
        return 0.0;
    }
    if (x >= 0.0) {
        return 1.0 + eps;
    }
    const double w = (x + eps) / eps;
    return (1.0 + eps) * w * w * (3.0 - 2.0 * w);
}

double initial_profile_primitive(double x, double eps) {
    if (x <= -eps) {
        return 0.0;
    }
    if (x >= 0.0) {
        return (1.0 + eps) * (0.5 * eps + x);
    }
    // d/dx [eps (w^3 - w^4/2)] = 3w^2 - 2w^3
    const double w = (x + eps) / eps;
    return (1.0 + eps) * eps * (w * w * w - 0.5 * w * w * w * w);
}

double initial_profile_cell_average(double lo, double hi, double eps) {
    return (initial_profile_primitive(hi, eps) - initial_profile_primitive(lo, eps)) / (hi - lo);
}

}  // namespace carbon
