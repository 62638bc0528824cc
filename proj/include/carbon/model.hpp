#pragma once

#include <optional>
#include <vector>

namespace carbon {

/// Unvalidated market/cost coefficients, as read from a config file.
struct RawParams {
    double mu = 0.05;     // allowance price drift (1/time)
    double sigma = 0.2;   // allowance price volatility (1/sqrt(time))
    double nu = 0.5;      // emission-surplus volatility (quota/sqrt(time))
    double r = 0.03;      // discount rate (1/time)
    double m = 0.3;       // quadratic abatement cost coefficient
    double T = 1.0;       // horizon
};

/// Validated coefficients. Only `validate_params` produces these.
struct ModelParams {
    double mu;
    double sigma;
    double nu;
    double r;
    double m;
    double T;
    double delta;  // (mu - r) / (2 m)

    /// Excess drift of the discounted allowance price, mu - r > 0.
    double excess_drift() const { return mu - r; }
};

ModelParams validate_params(const RawParams& raw);

/// Reference parameter set used as the project default.
inline RawParams default_raw_params() { return RawParams{}; }

struct PenaltyConfig {
    double epsilon = 0.01;
    std::vector<double> epsilon_schedule{0.1, 0.05, 0.02, 0.01};
};

/// Throws InvalidPenalty unless every eps is in (0, 1] and the schedule is
/// strictly decreasing.
void validate_penalty(const PenaltyConfig& cfg);

/// Constants of the exponential/ramp barriers that bracket the penalized
/// solution and its free boundary.
struct BoundConstants {
    double delta;
    double kappa;
    double a_const;
};

/// kappa defaults to 2(sigma^2 + mu) + 10, a to 1. Throws ValidationError when
/// kappa <= 2(sigma^2 + mu) or a <= 0.
BoundConstants make_bound_constants(const ModelParams& p,
                                    std::optional<double> kappa = std::nullopt,
                                    std::optional<double> a_const = std::nullopt);

double gaussian_cdf(double z);
double gaussian_pdf(double z);

/// Terminal cost max(x, 0) * s of holding surplus x at price s.
double terminal_payoff(double x, double s);

/// Expected discounted cost of never abating and never buying: the surplus
/// at the horizon is x + nu sqrt(tau) Z, settled at the price S_T.
double zero_strategy_cost(double x, double s, double tau, const ModelParams& p);

/// Upper bound s e^{(mu-r)tau} [x^+ + nu sqrt(tau)/sqrt(2 pi)] on the value
/// function; dominates `zero_strategy_cost`, with equality at x = 0.
double zero_strategy_cost_bound(double x, double s, double tau, const ModelParams& p);

/// Penalty function: 2(mu-r)(1-2z) for z <= 0, 2(mu-r)(1-z)^2 on [0,1],
/// zero for z >= 1. C^1, nonincreasing, convex.
double beta(double z, const ModelParams& p);
double beta_derivative(double z, const ModelParams& p);

/// Sine-corrected ramp from 0 (z <= 1) to 1 (z >= 3), used as a lower barrier.
double smooth_ramp(double z);

/// Smoothed unit step: 0 for x <= -eps, 1+eps for x >= 0, cubic smoothstep
/// in between.
double initial_profile(double x, double eps);

/// Antiderivative of `initial_profile` normalized to vanish at -infinity.
double initial_profile_primitive(double x, double eps);

/// Mean of `initial_profile` over [lo, hi]; lo < hi.
double initial_profile_cell_average(double lo, double hi, double eps);

}  // namespace carbon
