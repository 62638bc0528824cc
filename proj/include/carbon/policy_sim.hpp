#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carbon/free_boundary.hpp"
#include "carbon/grid.hpp"
#include "carbon/model.hpp"

namespace carbon {

struct RateQuery {
    double rate;
    bool clamped;  // the query left the solved box
};

/// Abatement rate a(x, s, theta) plus a buy boundary: whenever the surplus
/// exceeds it, the excess is bought back at the current price.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual RateQuery rate(double x, double s, double theta) const = 0;
    /// +infinity when the strategy never buys.
    virtual double buy_boundary(double s, double theta) const = 0;
    /// Phi_x / s at a point, for strategies read off a value function.
    virtual std::optional<double> gradient_ratio(double, double, double) const { return std::nullopt; }
};

/// Never abate, never buy.
class ZeroStrategy final : public Strategy {
public:
    std::string name() const override { return "zero"; }
    RateQuery rate(double, double, double) const override { return {0.0, false}; }
    double buy_boundary(double, double) const override;
};

/// Abate at a fixed rate, never buy.
class ConstantRateStrategy final : public Strategy {
public:
    explicit ConstantRateStrategy(double a) : a_(a) {}
    std::string name() const override;
    RateQuery rate(double, double, double) const override { return {a_, false}; }
    double buy_boundary(double, double) const override;

private:
    double a_;
};

/// Feedback policy read off a penalty surface: a* = s min(v, 1)/m with v taken
/// at (x, log s, T - theta), buying down to the extracted free boundary.
/// Boundary rows that exit the box are pinned to the box face they exit
/// through, which is the condition the solver imposed there.
class Policy final : public Strategy {
public:
    Policy(std::shared_ptr<const ValueSurface> v, FreeBoundary fb, const ModelParams& params);

    std::string name() const override { return "policy"; }
    RateQuery rate(double x, double s, double theta) const override;
    double buy_boundary(double s, double theta) const override;
    std::optional<double> gradient_ratio(double x, double s, double theta) const override;

    const FreeBoundary& boundary() const { return fb_; }

private:
    std::shared_ptr<const ValueSurface> v_;
    FreeBoundary fb_;
    ModelParams params_;
    double x_min_;
    double x_max_;
};

/// Throws MissingSurface when v is null or empty, not of kind v, or the
/// boundary has no time levels.
std::shared_ptr<Policy> extract_policy(std::shared_ptr<const ValueSurface> v, FreeBoundary fb,
                                       const ModelParams& params);

struct SimRequest {
    double x0 = 0.0;
    double s0 = 1.0;
    double t0 = 0.0;
    std::size_t n_paths = 10000;
    std::size_t n_steps = 400;
    std::uint64_t seed = 20240601;
    bool keep_paths = false;
};

struct PathCost {
    double total;
    double terminal;
    double purchase;
    double internal;
};

struct SimReport {
    std::string strategy;
    SimRequest request;
    double mean_cost = 0.0;
    double stderr_cost = 0.0;
    double mean_terminal = 0.0;
    double mean_purchase = 0.0;
    double mean_internal = 0.0;
    double exit_fraction = 0.0;
    std::size_t purchase_events = 0;
    /// Purchases made where Phi_x/s < 1 - 5e-2 (policy strategies only).
    std::size_t purchases_outside_buy_region = 0;
    std::vector<PathCost> paths;  // filled when request.keep_paths
};

/// Sum of `values` by recursive halving; the result does not depend on how
/// the paths were scheduled.
double pairwise_sum(std::span<const double> values);

/// Mixes (seed, path, stream) into a 64-bit generator seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

/// Replays the strategy on [t0, T]: exact lognormal price steps, Euler
/// surplus steps with the rate frozen over each step, end-of-step projection
/// onto the buy boundary (and once at t0). Costs are discounted to t0.
/// Throws InvalidCounts, NonpositivePrice.
SimReport simulate_paths(const Strategy& strategy, const SimRequest& request,
                         const ModelParams& params);

enum class Verdict { pass, fail, inconclusive };

const char* to_string(Verdict verdict);

struct ValueCheck {
    double phi = 0.0;
    double mean_cost = 0.0;
    double difference = 0.0;
    double tolerance = 0.0;
    double exit_fraction = 0.0;
    Verdict verdict = Verdict::fail;
    std::string note;  // reason for an inconclusive verdict
};

/// Passes when |mean - Phi(x0, s0, t0)| <= max(3 stderr, rel_tol Phi);
/// inconclusive when fewer than `min_paths` paths were run (the standard
/// error is not trustworthy) or more than 1% of paths left the box.
ValueCheck verify_value(const SimReport& report, const ValueSurface& phi, const ModelParams& params,
                        double rel_tol = 0.02, std::size_t min_paths = 1000);

struct DominanceEntry {
    std::string strategy;
    double mean_cost;
    double stderr_cost;
    /// (alternative - policy) / sqrt(se_alt^2 + se_policy^2)
    double separation;
    /// same difference over the stderr of the paired per-path differences
    double paired_separation;
    bool dominated;  // separation > 3
};

struct DominanceRow {
    double x0;
    double s0;
    double policy_mean;
    double policy_stderr;
    std::vector<DominanceEntry> alternatives;
};

/// Runs the policy and each alternative from every point with the same seed
/// (common random numbers).
std::vector<DominanceRow> strategy_dominance(
    const std::vector<std::pair<double, double>>& points, const Policy& policy,
    const std::vector<std::shared_ptr<const Strategy>>& alternatives, SimRequest base,
    const ModelParams& params);

/// key=value lines.
std::string format_sim_report(const SimReport& report);
/// path_index,total,terminal,purchase,internal
std::string format_path_dump(const SimReport& report);

}  // namespace carbon
