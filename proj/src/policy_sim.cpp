#include "carbon/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/surface_io.hpp"

namespace carbon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBuyRegionSlack = 5e-2;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Position of q among sorted nodes: left index and weight of the right one.
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double q) {
    if (nodes.size() == 1 || q <= nodes.front()) {
        return {0, 0.0};
    }
    if (q >= nodes.back()) {
        return {nodes.size() - 2, 1.0};
    }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), q);
    const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return {k, (q - nodes[k]) / (nodes[k + 1] - nodes[k])};
}

double mean_and_stderr(std::span<const double> values, double& stderr_out) {
    const double n = static_cast<double>(values.size());
    const double mean = pairwise_sum(values) / n;
    if (values.size() < 2) {
        stderr_out = 0.0;
        return mean;
    }
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [mean](double v) { return (v - mean) * (v - mean); });
    stderr_out = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    return mean;
}

}  // namespace

double ZeroStrategy::buy_boundary(double, double) const { return kInf; }

std::string ConstantRateStrategy::name() const { return "constant_a=" + format_double(a_); }

double ConstantRateStrategy::buy_boundary(double, double) const { return kInf; }

Policy::Policy(std::shared_ptr<const ValueSurface> v, FreeBoundary fb, const ModelParams& params)
    : v_(std::move(v)), fb_(std::move(fb)), params_(params),
      x_min_(v_->grid().spec.x_min), x_max_(v_->grid().spec.x_max) {}

RateQuery Policy::rate(double x, double s, double theta) const {
    const Interpolated q = interpolate(*v_, x, std::log(s), params_.T - theta);
    // The limit problem caps v at 1; the penalty surface overshoots by O(eps).
    return {s * std::clamp(q.value, 0.0, 1.0) / params_.m, q.clamped};
}

double Policy::buy_boundary(double s, double theta) const {
    const auto [j, wy] = locate(fb_.y_nodes, std::log(s));
    const auto [k, wt] = locate(fb_.t_nodes, params_.T - theta);
    auto node = [&](std::size_t kk, std::size_t jj) {
        const double x = fb_.at(kk, jj);
        return x == kInf ? x_max_ : (x == -kInf ? x_min_ : x);
    };
    const std::size_t j1 = std::min(j + 1, fb_.ny() - 1);
    const std::size_t k1 = std::min(k + 1, fb_.t_nodes.size() - 1);
    const double lo = (1.0 - wy) * node(k, j) + wy * node(k, j1);
    const double hi = (1.0 - wy) * node(k1, j) + wy * node(k1, j1);
    return (1.0 - wt) * lo + wt * hi;
}

std::optional<double> Policy::gradient_ratio(double x, double s, double theta) const {
    return interpolate(*v_, x, std::log(s), params_.T - theta).value;
}

std::shared_ptr<Policy> extract_policy(std::shared_ptr<const ValueSurface> v, FreeBoundary fb,
                                       const ModelParams& params) {
    if (!v || v->empty() || v->kind() != SurfaceKind::v) {
        throw Error(ErrorCode::MissingSurface, "policy needs a solved v surface");
    }
    if (fb.t_nodes.empty() || fb.x_of.empty()) {
        throw Error(ErrorCode::MissingSurface, "policy needs an extracted free boundary");
    }
    return std::make_shared<Policy>(std::move(v), std::move(fb), params);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) {
            acc += v;
        }
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
    return splitmix64(splitmix64(splitmix64(seed) ^ path) ^ (stream + 1));
}

SimReport simulate_paths(const Strategy& strategy, const SimRequest& req, const ModelParams& p) {
    if (req.n_paths < 1 || req.n_steps < 1) {
        throw Error(ErrorCode::InvalidCounts, "need at least one path and one step");
    }
    if (!(req.s0 > 0.0) || !std::isfinite(req.s0)) {
        throw Error(ErrorCode::NonpositivePrice, "initial price must be positive");
    }
    if (!(req.t0 >= 0.0 && req.t0 < p.T)) {
        throw Error(ErrorCode::ValidationError, "start time must lie in [0, T)");
    }

    const double dtheta = (p.T - req.t0) / static_cast<double>(req.n_steps);
    const double price_drift = (p.mu - 0.5 * p.sigma * p.sigma) * dtheta;
    const double price_vol = p.sigma * std::sqrt(dtheta);
    const double surplus_vol = p.nu * std::sqrt(dtheta);
    const double half_m = 0.5 * p.m;

    std::vector<double> total(req.n_paths), terminal(req.n_paths), purchase(req.n_paths),
        internal(req.n_paths), exited(req.n_paths);
    SimReport report;
    report.strategy = strategy.name();
    report.request = req;

    for (std::size_t path = 0; path < req.n_paths; ++path) {
        std::mt19937_64 price_rng(substream_seed(req.seed, path, 0));
        std::mt19937_64 surplus_rng(substream_seed(req.seed, path, 1));
        std::normal_distribution<double> price_normal;
        std::normal_distribution<double> surplus_normal;

        double x = req.x0;
        double s = req.s0;
        double bought = 0.0;
        double abated = 0.0;
        bool left_box = false;

        auto buy_down = [&](double theta) {
            const double xb = strategy.buy_boundary(s, theta);
            if (x > xb) {
                ++report.purchase_events;
                if (const auto ratio = strategy.gradient_ratio(x, s, theta);
                    ratio && *ratio < 1.0 - kBuyRegionSlack) {
                    ++report.purchases_outside_buy_region;
                }
                bought += std::exp(-p.r * (theta - req.t0)) * s * (x - xb);
                x = xb;
            }
        };

        buy_down(req.t0);
        for (std::size_t k = 0; k < req.n_steps; ++k) {
            const double theta = req.t0 + dtheta * static_cast<double>(k);
            const RateQuery a = strategy.rate(x, s, theta);
            left_box = left_box || a.clamped;
            abated += std::exp(-p.r * (theta - req.t0)) * half_m * a.rate * a.rate * dtheta;
            s *= std::exp(price_drift + price_vol * price_normal(price_rng));
            x += -a.rate * dtheta + surplus_vol * surplus_normal(surplus_rng);
            const double next = k + 1 == req.n_steps ? p.T : theta + dtheta;
            buy_down(next);
        }
        terminal[path] = std::exp(-p.r * (p.T - req.t0)) * std::max(x, 0.0) * s;
        purchase[path] = bought;
        internal[path] = abated;
        total[path] = terminal[path] + bought + abated;
        exited[path] = left_box ? 1.0 : 0.0;
    }

    const double n = static_cast<double>(req.n_paths);
    report.mean_cost = mean_and_stderr(total, report.stderr_cost);
    report.mean_terminal = pairwise_sum(terminal) / n;
    report.mean_purchase = pairwise_sum(purchase) / n;
    report.mean_internal = pairwise_sum(internal) / n;
    report.exit_fraction = pairwise_sum(exited) / n;
    if (req.keep_paths) {
        report.paths.reserve(req.n_paths);
        for (std::size_t i = 0; i < req.n_paths; ++i) {
            report.paths.push_back(PathCost{total[i], terminal[i], purchase[i], internal[i]});
        }
    }
    return report;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

ValueCheck verify_value(const SimReport& report, const ValueSurface& phi, const ModelParams& p,
                        double rel_tol, std::size_t min_paths) {
    const SimRequest& req = report.request;
    ValueCheck check;
    check.phi = interpolate(phi, req.x0, std::log(req.s0), p.T - req.t0).value;
    check.mean_cost = report.mean_cost;
    check.difference = std::abs(report.mean_cost - check.phi);
    check.tolerance = std::max(3.0 * report.stderr_cost, rel_tol * check.phi);
    check.exit_fraction = report.exit_fraction;
    if (req.n_paths < min_paths) {
        check.verdict = Verdict::inconclusive;
        check.note = "fewer than " + std::to_string(min_paths) + " paths";
    } else if (report.exit_fraction > 0.01) {
        check.verdict = Verdict::inconclusive;
        check.note = "more than 1% of paths left the box";
    } else {
        check.verdict = check.difference <= check.tolerance ? Verdict::pass : Verdict::fail;
    }
    return check;
}

std::vector<DominanceRow> strategy_dominance(
    const std::vector<std::pair<double, double>>& points, const Policy& policy,
    const std::vector<std::shared_ptr<const Strategy>>& alternatives, SimRequest base,
    const ModelParams& params) {
    base.keep_paths = true;
    std::vector<DominanceRow> rows;
    for (const auto& [x0, s0] : points) {
        base.x0 = x0;
        base.s0 = s0;
        const SimReport own = simulate_paths(policy, base, params);
        DominanceRow row{x0, s0, own.mean_cost, own.stderr_cost, {}};
        for (const auto& alt : alternatives) {
            const SimReport other = simulate_paths(*alt, base, params);
            std::vector<double> diff(own.paths.size());
            for (std::size_t i = 0; i < diff.size(); ++i) {
                diff[i] = other.paths[i].total - own.paths[i].total;
            }
            double paired_se = 0.0;
            const double mean_diff = mean_and_stderr(diff, paired_se);
            const double combined =
                std::sqrt(other.stderr_cost * other.stderr_cost + own.stderr_cost * own.stderr_cost);
            const double separation = combined > 0.0 ? (other.mean_cost - own.mean_cost) / combined
                                                     : (other.mean_cost > own.mean_cost ? kInf : 0.0);
            const double paired = paired_se > 0.0 ? mean_diff / paired_se
                                                  : (mean_diff > 0.0 ? kInf : 0.0);
            row.alternatives.push_back(DominanceEntry{alt->name(), other.mean_cost, other.stderr_cost,
                                                      separation, paired, separation > 3.0});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_sim_report(const SimReport& r) {
    std::ostringstream out;
    out << "strategy=" << r.strategy << '\n'
        << "x0=" << format_double(r.request.x0) << '\n'
        << "s0=" << format_double(r.request.s0) << '\n'
        << "t0=" << format_double(r.request.t0) << '\n'
        << "n_paths=" << r.request.n_paths << '\n'
        << "n_steps=" << r.request.n_steps << '\n'
        << "seed=" << r.request.seed << '\n'
        << "mean_cost=" << format_double(r.mean_cost) << '\n'
        << "stderr=" << format_double(r.stderr_cost) << '\n'
        << "terminal_cost=" << format_double(r.mean_terminal) << '\n'
        << "purchase_cost=" << format_double(r.mean_purchase) << '\n'
        << "internal_cost=" << format_double(r.mean_internal) << '\n'
        << "exit_fraction=" << format_double(r.exit_fraction) << '\n'
        << "purchase_events=" << r.purchase_events << '\n'
        << "purchases_outside_buy_region=" << r.purchases_outside_buy_region << '\n';
    return out.str();
}

std::string format_path_dump(const SimReport& r) {
    std::ostringstream out;
    out << "path_index,total,terminal,purchase,internal\n";
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
        const PathCost& c = r.paths[i];
        out << i << ',' << format_double(c.total) << ',' << format_double(c.terminal) << ','
            << format_double(c.purchase) << ',' << format_double(c.internal) << '\n';
    }
    return out.str();
}

}  // namespace carbon
