#include "carbon/checks.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/surface_io.hpp"

namespace carbon {

namespace {

// Tracks the largest violation and where it happened.
struct Worst {
    double value = 0.0;
    std::string where;

    void offer(double violation, const Grid& g, std::size_t i, std::size_t j, double t) {
        if (violation > value) {
            value = violation;
            std::ostringstream at;
            at << "x=" << format_double(g.x_nodes[i]) << " y=" << format_double(g.y_nodes[j])
               << " t=" << format_double(t);
            where = at.str();
        }
    }
};

CheckResult finish(std::string tag, std::string description, bool hard, const Worst& worst,
                   double tolerance) {
    CheckResult r;
    r.tag = std::move(tag);
    r.description = std::move(description);
    r.hard = hard;
    r.worst = worst.value;
    r.tolerance = tolerance;
    r.passed = worst.value <= tolerance;
    r.where = worst.where;
    return r;
}

template <typename F>
void for_each_node(const ValueSurface& s, F&& f) {
    const Grid& g = s.grid();
    for (std::size_t k = 0; k < s.slice_count(); ++k) {
        for (std::size_t j = 0; j < g.ny(); ++j) {
            for (std::size_t i = 0; i < g.nx(); ++i) {
                f(k, i, j);
            }
        }
    }
}

}  // namespace

std::string format_check(const CheckResult& r) {
    std::ostringstream out;
    out << (r.passed ? "PASS " : "FAIL ") << r.tag << (r.hard ? " [hard]" : " [diagnostic]")
        << " worst=" << format_double(r.worst) << " tol=" << format_double(r.tolerance) << " "
        << r.description;
    if (!r.where.empty()) {
        out << " at " << r.where;
    }
    return out.str();
}

CheckResult check_penalized_range(const ValueSurface& v) {
    const Grid& g = v.grid();
    const double cap = 1.0 + v.epsilon();
    Worst w;
    for_each_node(v, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double value = v.at(k, i, j);
        w.offer(std::max(-value, value - cap), g, i, j, v.time(k));
    });
    return finish("penalized-range", "0 <= v <= 1+eps (eps=" + format_double(v.epsilon()) + ")",
                  true, w, 1e-12);
}

CheckResult check_increasing_in_x(const ValueSurface& v) {
    const Grid& g = v.grid();
    Worst w;
    for_each_node(v, [&](std::size_t k, std::size_t i, std::size_t j) {
        if (i > 0) {
            w.offer(v.at(k, i - 1, j) - v.at(k, i, j), g, i, j, v.time(k));
        }
    });
    return finish("v-increasing-in-x", "v nondecreasing in x (eps=" + format_double(v.epsilon()) + ")",
                  true, w, 1e-8);
}

CheckResult check_exponential_bound(const ValueSurface& v, const ModelParams& p) {
    const Grid& g = v.grid();
    const double rate = 0.5 * p.nu * p.nu + p.excess_drift();
    Worst w;
    for_each_node(v, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double t = v.time(k);
        const double bound = std::exp(g.x_nodes[i] + rate * t + v.epsilon());
        w.offer(v.at(k, i, j) - bound, g, i, j, t);
    });
    return finish("exponential-upper-bound",
                  "v <= exp(x + (nu^2/2 + mu - r) t + eps) (eps=" + format_double(v.epsilon()) + ")",
                  true, w, 1e-8);
}

CheckResult check_ramp_barrier(const ValueSurface& v, const ModelParams&, const BoundConstants& c) {
    const Grid& g = v.grid();
    std::size_t total = 0;
    std::size_t below = 0;
    Worst w;
    for_each_node(v, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double t = v.time(k);
        const double z = c.delta * g.x_nodes[i] * std::exp(-c.kappa * t) / (c.a_const + std::exp(g.y_nodes[j]));
        const double gap = smooth_ramp(z) - 1e-3 - v.at(k, i, j);
        ++total;
        if (gap > 0.0) {
            ++below;
            w.offer(gap, g, i, j, t);
        }
    });
    CheckResult r = finish("ramp-lower-barrier",
                           "share of nodes with v < rho(delta x e^{-kappa t}/(a+e^y)) - 1e-3 (eps=" +
                               format_double(v.epsilon()) + ")",
                           false, w, 0.01);
    r.worst = total == 0 ? 0.0 : static_cast<double>(below) / static_cast<double>(total);
    r.passed = r.worst <= r.tolerance;
    return r;
}

CheckResult check_penalty_activity(const ValueSurface& v, const ModelParams& p) {
    const Grid& g = v.grid();
    const double eps = v.epsilon();
    const double cap = 2.0 * p.excess_drift();
    Worst w;
    for_each_node(v, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double b = beta((1.0 + eps - v.at(k, i, j)) / eps, p);
        w.offer(std::max(-b, b - cap), g, i, j, v.time(k));
    });
    return finish("penalty-activity",
                  "0 <= beta((1+eps-v)/eps) <= 2(mu-r) (eps=" + format_double(eps) + ")", true, w, 1e-12);
}

CheckResult check_epsilon_ordering(const std::vector<const ValueSurface*>& vs) {
    Worst w;
    for (std::size_t n = 0; n + 1 < vs.size(); ++n) {
        const ValueSurface& coarse = *vs[n];
        const ValueSurface& fine = *vs[n + 1];
        const Grid& g = fine.grid();
        for (std::size_t k = 0; k < fine.slice_count(); ++k) {
            const auto kc = coarse.find_step(fine.step(k));
            if (!kc) {
                continue;
            }
            for (std::size_t j = 0; j < g.ny(); ++j) {
                for (std::size_t i = 0; i < g.nx(); ++i) {
                    w.offer(fine.at(k, i, j) - coarse.at(*kc, i, j), g, i, j, fine.time(k));
                }
            }
        }
    }
    return finish("epsilon-ordering", "v decreases as eps decreases", true, w, 1e-6);
}

CheckResult check_u_initial(const ValueSurface& u) {
    const Grid& g = u.grid();
    Worst w;
    if (!u.empty() && u.step(0) == 0) {
        for (std::size_t j = 0; j < g.ny(); ++j) {
            for (std::size_t i = 0; i < g.nx(); ++i) {
                w.offer(std::abs(u.at(0, i, j) - std::max(g.x_nodes[i], 0.0)), g, i, j, 0.0);
            }
        }
    }
    return finish("u-initial", "u(x, y, 0) = max(x, 0)", true, w, 1e-12);
}

CheckResult check_u_slope(const ValueSurface& u) {
    const Grid& g = u.grid();
    Worst w;
    for_each_node(u, [&](std::size_t k, std::size_t i, std::size_t j) {
        if (i > 0) {
            const double slope = (u.at(k, i, j) - u.at(k, i - 1, j)) / g.dx;
            w.offer(std::max(-slope, slope - 1.0), g, i, j, u.time(k));
        }
        w.offer(-u.at(k, i, j), g, i, j, u.time(k));
    });
    return finish("u-slope", "u >= 0 and 0 <= u_x <= 1", true, w, 1e-8);
}

CheckResult check_phi_terminal(const ValueSurface& phi) {
    const Grid& g = phi.grid();
    Worst w;
    if (!phi.empty() && phi.step(0) == 0) {
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double s = std::exp(g.y_nodes[j]);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                w.offer(std::abs(phi.at(0, i, j) - terminal_payoff(g.x_nodes[i], s)), g, i, j, 0.0);
            }
        }
    }
    return finish("phi-terminal", "Phi(x, s, T) = max(x, 0) s", true, w, 1e-12);
}

CheckResult check_phi_x_gradient(const ValueSurface& phi, const ModelParams& p) {
    const Grid& g = phi.grid();
    Worst w;
    for_each_node(phi, [&](std::size_t k, std::size_t i, std::size_t j) {
        if (i == 0) {
            return;
        }
        const double t = phi.time(k);
        const double cap = std::exp(g.y_nodes[j]) * std::exp(p.excess_drift() * t) * (1.0 + 1e-6);
        const double slope = (phi.at(k, i, j) - phi.at(k, i - 1, j)) / g.dx;
        w.offer(std::max(-slope, slope - cap), g, i, j, t);
    });
    return finish("phi-x-gradient", "0 <= dPhi/dx <= s e^{(mu-r)(T-theta)}", true, w, 0.0);
}

CheckResult check_phi_s_gradient(const ValueSurface& phi) {
    const Grid& g = phi.grid();
    Worst w;
    for_each_node(phi, [&](std::size_t k, std::size_t i, std::size_t j) {
        if (j + 1 == g.ny()) {
            return;
        }
        const double s0 = std::exp(g.y_nodes[j]);
        const double s1 = std::exp(g.y_nodes[j + 1]);
        const double here = phi.at(k, i, j);
        const double slope = (phi.at(k, i, j + 1) - here) / (s1 - s0);
        w.offer(std::max(-slope, slope - here / s0 - 1e-6), g, i, j, phi.time(k));
    });
    return finish("phi-s-gradient", "0 <= dPhi/ds <= Phi/s + 1e-6 (forward difference)", true, w, 1e-10);
}

CheckResult check_phi_convexity(const ValueSurface& phi) {
    const Grid& g = phi.grid();
    Worst w;
    for_each_node(phi, [&](std::size_t k, std::size_t i, std::size_t j) {
        if (i == 0 || i + 1 == g.nx()) {
            return;
        }
        const double second =
            (phi.at(k, i + 1, j) - 2.0 * phi.at(k, i, j) + phi.at(k, i - 1, j)) / (g.dx * g.dx);
        w.offer(-second, g, i, j, phi.time(k));
    });
    return finish("phi-convex-in-x", "d2Phi/dx2 >= -1e-8", true, w, 1e-8);
}

CheckResult check_phi_upper_bound(const ValueSurface& phi, const ModelParams& p) {
    const Grid& g = phi.grid();
    Worst w;
    for_each_node(phi, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double s = std::exp(g.y_nodes[j]);
        const double t = phi.time(k);
        const double bound = zero_strategy_cost_bound(g.x_nodes[i], s, t, p) + 1e-3 * s;
        const double value = phi.at(k, i, j);
        w.offer(std::max(-value, value - bound), g, i, j, t);
    });
    return finish("phi-upper-bound",
                  "0 <= Phi <= s e^{(mu-r)(T-theta)} (x^+ + nu sqrt(T-theta)/sqrt(2 pi)) + 1e-3 s",
                  true, w, 0.0);
}

CheckResult check_phi_below_zero_strategy(const ValueSurface& phi, const ModelParams& p) {
    const Grid& g = phi.grid();
    Worst w;
    for_each_node(phi, [&](std::size_t k, std::size_t i, std::size_t j) {
        const double s = std::exp(g.y_nodes[j]);
        const double t = phi.time(k);
        w.offer(phi.at(k, i, j) - zero_strategy_cost(g.x_nodes[i], s, t, p) - 1e-3 * s, g, i, j, t);
    });
    return finish("phi-below-zero-strategy", "Phi <= expected cost of never abating + 1e-3 s", true,
                  w, 0.0);
}

CheckResult check_boundary_monotone(const FreeBoundary& fb) {
    const MonotonicityReport m = monotonicity_in_y(fb);
    CheckResult r;
    r.tag = "boundary-increasing-in-y";
    r.description = "free boundary nondecreasing in y (level " + format_double(fb.level) + ")";
    r.worst = std::max(0.0, -m.worst_increment);
    r.tolerance = m.tolerance;
    r.passed = m.passed();
    if (m.worst_increment < 0.0) {
        r.where = "y=" + format_double(m.worst_y) + " step=" + std::to_string(m.worst_step);
    }
    return r;
}

CheckResult check_boundary_containment(const FreeBoundary& fb, const ModelParams& p,
                                       const BoundConstants& consts, const GridSpec& grid) {
    const BoundsReport b = check_boundary_bounds(fb, p, consts, grid.x_min, grid.x_max);
    CheckResult r;
    r.tag = "boundary-containment";
    r.description = "share of boundary points outside the two-sided bound (eps=" +
                    format_double(fb.epsilon) + ")";
    r.worst = b.violation_fraction();
    r.tolerance = 0.0;
    r.passed = b.lower_violations + b.upper_violations == 0;
    return r;
}

CheckResult check_boundary_epsilon_order(const std::vector<FreeBoundary>& fbs) {
    const EpsilonOrderReport e = epsilon_monotonicity(fbs);
    CheckResult r;
    r.tag = "boundary-epsilon-order";
    r.description = "free boundary moves right as eps decreases";
    r.worst = std::max(0.0, -e.worst_shortfall);
    r.tolerance = e.tolerance;
    r.passed = e.passed();
    if (e.worst_shortfall < 0.0) {
        r.where = "y=" + format_double(e.worst_y) + " step=" + std::to_string(e.worst_step);
    }
    return r;
}

namespace {

// A row that is not monotone has no well-defined crossing; report it as a
// failed check instead of aborting the suite.
std::optional<FreeBoundary> boundary_or_failure(const ValueSurface& v, double level,
                                                std::vector<CheckResult>& out) {
    try {
        return extract_boundary(v, level);
    } catch (const Error& e) {
        CheckResult r;
        r.tag = "boundary-extraction";
        r.description = "free boundary extracted at level " + format_double(level);
        r.worst = 1.0;
        r.passed = false;
        r.where = e.what();
        out.push_back(r);
        return std::nullopt;
    }
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const SuiteInputs& in) {
    std::vector<CheckResult> out;
    std::vector<FreeBoundary> boundaries;
    for (const ValueSurface* v : in.v_by_decreasing_eps) {
        out.push_back(check_penalized_range(*v));
        out.push_back(check_increasing_in_x(*v));
        out.push_back(check_exponential_bound(*v, in.params));
        out.push_back(check_ramp_barrier(*v, in.params, in.consts));
        out.push_back(check_penalty_activity(*v, in.params));
        std::optional<FreeBoundary> fb = boundary_or_failure(*v, penalty_level(v->epsilon()), out);
        if (!fb) {
            continue;
        }
        boundaries.push_back(std::move(*fb));
        out.push_back(check_boundary_monotone(boundaries.back()));
        out.push_back(check_boundary_containment(boundaries.back(), in.params, in.consts,
                                                 v->grid().spec));
    }
    if (in.v_by_decreasing_eps.size() > 1) {
        out.push_back(check_epsilon_ordering(in.v_by_decreasing_eps));
        if (boundaries.size() == in.v_by_decreasing_eps.size()) {
            out.push_back(check_boundary_epsilon_order(boundaries));
        }
    }
    if (!in.v_by_decreasing_eps.empty()) {
        if (auto limit = boundary_or_failure(*in.v_by_decreasing_eps.back(), kLimitLevel, out)) {
            CheckResult r = check_boundary_monotone(*limit);
            r.tag = "limit-boundary-increasing-in-y";
            out.push_back(r);
        }
    }
    if (in.u != nullptr) {
        out.push_back(check_u_initial(*in.u));
        out.push_back(check_u_slope(*in.u));
    }
    if (in.phi != nullptr) {
        out.push_back(check_phi_terminal(*in.phi));
        out.push_back(check_phi_x_gradient(*in.phi, in.params));
        out.push_back(check_phi_s_gradient(*in.phi));
        out.push_back(check_phi_convexity(*in.phi));
        out.push_back(check_phi_upper_bound(*in.phi, in.params));
        out.push_back(check_phi_below_zero_strategy(*in.phi, in.params));
    }
    return out;
}

bool hard_checks_pass(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return !r.hard || r.passed; });
}

}  // namespace carbon
