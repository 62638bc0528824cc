#include "carbon/penalty_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "carbon/error.hpp"
#include "carbon/tridiagonal.hpp"

namespace carbon {

namespace {

// Constant-coefficient part of the discrete operator for one step length.
struct Stencil {
    double inv_dt;
    double growth;     // mu - r
    double ax;         // (nu^2/2) / dx^2
    double base_diag;  // inv_dt - growth + 2 ax
    std::vector<double> y_lo;    // weight of the j-1 neighbor
    std::vector<double> y_hi;    // weight of the j+1 neighbor
    std::vector<double> y_diag;  // y contribution to the diagonal
    std::vector<double> transport;  // e^{y_j} / (m dx)
    std::vector<std::size_t> jm;    // j-1 with reflection at the y faces
    std::vector<std::size_t> jp;

    Stencil(const Grid& g, const ModelParams& p, double dt) {
        inv_dt = 1.0 / dt;
        growth = p.excess_drift();
        ax = 0.5 * p.nu * p.nu / (g.dx * g.dx);
        base_diag = inv_dt - growth + 2.0 * ax;

        const double dy_diff = 0.5 * p.sigma * p.sigma / (g.dy * g.dy);
        const double drift = p.mu + 0.5 * p.sigma * p.sigma;
        // Centered drift keeps both neighbor weights nonnegative iff
        // drift * dy <= 2 * (sigma^2/2).
        const bool centered = drift * g.dy <= p.sigma * p.sigma;
        const std::size_t ny = g.ny();
        y_lo.resize(ny);
        y_hi.resize(ny);
        y_diag.resize(ny);
        transport.resize(ny);
        jm.resize(ny);
        jp.resize(ny);
        for (std::size_t j = 0; j < ny; ++j) {
            if (centered) {
                y_lo[j] = dy_diff - 0.5 * drift / g.dy;
                y_hi[j] = dy_diff + 0.5 * drift / g.dy;
                y_diag[j] = 2.0 * dy_diff;
            } else {
                y_lo[j] = dy_diff;
                y_hi[j] = dy_diff + drift / g.dy;
                y_diag[j] = 2.0 * dy_diff + drift / g.dy;
            }
            transport[j] = std::exp(g.y_nodes[j]) / (p.m * g.dx);
            jm[j] = j > 0 ? j - 1 : 1;
            jp[j] = j + 1 < ny ? j + 1 : ny - 2;
        }
    }
};

double penalty_arg(double v, double eps) { return (1.0 + eps - v) / eps; }

// Transport difference: a blend w * backward + (1 - w) * centered with the
// least upwind weight w that keeps the stencil monotone, i.e. the v_{i+1}
// weight stays nonpositive. w goes continuously from 0 (cell Peclet number
// below 2) toward 1. It is frozen per step from the previous slice so every
// step solves one fixed system.
double upwind_weight(const Stencil& st, std::size_t j, double v_prev) {
    const double speed = st.transport[j] * std::max(v_prev, 0.0);
    return speed <= 2.0 * st.ax ? 0.0 : 1.0 - 2.0 * st.ax / speed;
}

// tr * (w (v_i - v_{i-1}) + (1 - w)(v_{i+1} - v_{i-1}) / 2), tr = e^y/(m dx)
double blended_difference(double w, double left, double mid, double right) {
    return w * (mid - left) + 0.5 * (1.0 - w) * (right - left);
}

double transport_term(const Stencil& st, std::size_t j, double w, double left, double mid,
                      double right) {
    return st.transport[j] * mid * blended_difference(w, left, mid, right);
}

// Discrete B_h[v] + beta at interior node (i, j).
double node_residual(const Stencil& st, const Grid& g, const ModelParams& p, double eps,
                     std::span<const double> v, std::span<const double> v_prev, std::size_t i,
                     std::size_t j) {
    const std::size_t nx = g.nx();
    const std::size_t c = j * nx + i;
    const double vc = v[c];
    const double left = v[c - 1];
    const double right = v[c + 1];
    const double down = v[st.jm[j] * nx + i];
    const double up = v[st.jp[j] * nx + i];
    return (vc - v_prev[c]) * st.inv_dt - st.ax * (right - 2.0 * vc + left) +
           st.y_diag[j] * vc - st.y_lo[j] * down - st.y_hi[j] * up - st.growth * vc +
           transport_term(st, j, upwind_weight(st, j, v_prev[c]), left, vc, right) +
           beta(penalty_arg(vc, eps), p);
}

void apply_dirichlet(std::span<double> v, const Grid& g, double eps) {
    const std::size_t nx = g.nx();
    for (std::size_t j = 0; j < g.ny(); ++j) {
        v[j * nx] = 0.0;
        v[j * nx + nx - 1] = 1.0 + eps;
    }
}

}  // namespace

void validate_solver_config(const SolverConfig& cfg) {
    validate_penalty(cfg.penalty);
    if (!(cfg.newton_tol > 0.0)) {
        throw Error(ErrorCode::ValidationError, "newton_tol must be positive");
    }
    if (cfg.newton_max_iter < 1) {
        throw Error(ErrorCode::ValidationError, "newton_max_iter must be at least 1");
    }
    if (cfg.store_every < 1) {
        throw Error(ErrorCode::ValidationError, "store_every must be at least 1");
    }
}

std::string format_step_log(const StepReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "step=%zu t=%.6g newton=%d resid=%.3e vmin=%.15g vmax=%.15g clipped=%zu",
                  r.step, r.t, r.newton_iterations, r.max_residual, r.v_min, r.v_max, r.clipped);
    return buf;
}

std::vector<double> initial_slice(const Grid& g, double eps, InitialSampling sampling) {
    std::vector<double> v(g.nodes_per_slice());
    const double half = 0.5 * g.dx;
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double x = g.x_nodes[i];
        const double value = sampling == InitialSampling::cell_average
                                 ? initial_profile_cell_average(x - half, x + half, eps)
                                 : initial_profile(x, eps);
        for (std::size_t j = 0; j < g.ny(); ++j) {
            v[g.index(i, j)] = value;
        }
    }
    apply_dirichlet(v, g, eps);
    return v;
}

SliceStep time_step(std::span<const double> v_prev, double eps, double dt, const Grid& g,
                    const ModelParams& p, double newton_tol, int newton_max_iter,
                    std::size_t step_index) {
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const std::size_t nodes = g.nodes_per_slice();
    const Stencil st(g, p, dt);

    std::vector<double> w(v_prev.begin(), v_prev.end());
    apply_dirichlet(w, g, eps);
    std::vector<double> next(w);

    // Per-node linearization: diagonal increment, weights on v_{i-1} and
    // v_{i+1}, and the constant left over from the Taylor expansion.
    std::vector<double> lin_diag(nodes), lin_left(nodes), lin_right(nodes), lin_const(nodes);
    const std::size_t n_line = std::max(nx, ny);
    std::vector<double> lower(n_line), diag(n_line), upper(n_line), rhs(n_line), scratch(n_line);

    auto max_residual = [&](std::span<const double> v) -> double {
        double worst = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const double r = node_residual(st, g, p, eps, v, v_prev, i, j);
                if (!std::isfinite(r)) {
                    return std::numeric_limits<double>::infinity();
                }
                worst = std::max(worst, std::abs(r));
            }
        }
        return worst;
    };

    double residual = max_residual(w);
    int iterations = 0;
    while (residual > newton_tol) {
        if (iterations == newton_max_iter) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "step %zu: residual %.3e above tolerance %.3e after %d iterations",
                          step_index, residual, newton_tol, iterations);
            throw Error(ErrorCode::NewtonDiverged, buf);
        }
        ++iterations;

        for (std::size_t j = 0; j < ny; ++j) {
            const double c = st.transport[j];
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const std::size_t k = j * nx + i;
                const double wi = w[k];
                const double wl = w[k - 1];
                const double wr = w[k + 1];
                const double pos = std::max(wi, 0.0);
                const double up = upwind_weight(st, j, v_prev[k]);
                const double diff = blended_difference(up, wl, wi, wr);
                // Exact derivative except that a negative difference is
                // dropped from the diagonal, keeping it dominant.
                const double d_self = c * (std::max(diff, 0.0) + up * pos);
                const double d_left = -c * pos * (0.5 + 0.5 * up);
                const double d_right = c * pos * 0.5 * (1.0 - up);
                const double z = penalty_arg(wi, eps);
                const double pen = beta(z, p);
                const double pen_slope = -beta_derivative(z, p) / eps;
                lin_diag[k] = d_self + pen_slope;
                lin_left[k] = d_left;
                lin_right[k] = d_right;
                lin_const[k] = c * wi * diff -
                               d_self * wi - d_left * wl - d_right * wr + pen - pen_slope * wi;
            }
        }

        // x-lines, y-neighbors from the linearization point.
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t n = nx - 2;
            for (std::size_t q = 0; q < n; ++q) {
                const std::size_t i = q + 1;
                const std::size_t k = j * nx + i;
                lower[q] = -st.ax + lin_left[k];
                diag[q] = st.base_diag + st.y_diag[j] + lin_diag[k];
                upper[q] = -st.ax + lin_right[k];
                rhs[q] = v_prev[k] * st.inv_dt + st.y_lo[j] * w[st.jm[j] * nx + i] +
                         st.y_hi[j] * w[st.jp[j] * nx + i] - lin_const[k];
            }
            rhs[0] -= lower[0] * w[j * nx];
            rhs[n - 1] -= upper[n - 1] * w[j * nx + nx - 1];
            solve_tridiagonal(std::span(lower).first(n), std::span(diag).first(n),
                              std::span(upper).first(n), std::span(rhs).first(n),
                              std::span(scratch).first(n));
            std::copy_n(rhs.begin(), n, next.begin() + static_cast<std::ptrdiff_t>(j * nx + 1));
        }

        // y-lines, x-neighbors from the x-sweep.
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t k = j * nx + i;
                diag[j] = st.base_diag + st.y_diag[j] + lin_diag[k];
                if (j == 0) {
                    lower[j] = 0.0;
                    upper[j] = -(st.y_lo[j] + st.y_hi[j]);
                } else if (j + 1 == ny) {
                    lower[j] = -(st.y_lo[j] + st.y_hi[j]);
                    upper[j] = 0.0;
                } else {
                    lower[j] = -st.y_lo[j];
                    upper[j] = -st.y_hi[j];
                }
                rhs[j] = v_prev[k] * st.inv_dt + (st.ax - lin_right[k]) * next[k + 1] +
                         (st.ax - lin_left[k]) * next[k - 1] - lin_const[k];
            }
            solve_tridiagonal(std::span(lower).first(ny), std::span(diag).first(ny),
                              std::span(upper).first(ny), std::span(rhs).first(ny),
                              std::span(scratch).first(ny));
            for (std::size_t j = 0; j < ny; ++j) {
                next[j * nx + i] = rhs[j];
            }
        }

        w.swap(next);
        residual = max_residual(w);
        if (!std::isfinite(residual)) {
            throw Error(ErrorCode::NewtonDiverged,
                        "step " + std::to_string(step_index) + ": non-finite iterate");
        }
        std::copy(w.begin(), w.end(), next.begin());
    }

    StepReport report;
    report.step = step_index;
    report.newton_iterations = iterations;
    report.max_residual = residual;
    const double cap = 1.0 + eps;
    for (double& value : w) {
        if (value < 0.0 || value > cap) {
            ++report.clipped;
            value = std::clamp(value, 0.0, cap);
        }
    }
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    report.v_min = *lo;
    report.v_max = *hi;
    return SliceStep{std::move(w), report};
}

ValueSurface solve_penalized(double eps, std::shared_ptr<const Grid> grid, const ModelParams& params,
                             const SolverConfig& config, const StepLogger& log) {
    validate_solver_config(config);
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw Error(ErrorCode::InvalidPenalty, "epsilon must lie in (0, 1]");
    }
    const Grid& g = *grid;
    ValueSurface surface(grid, SurfaceKind::v);
    surface.set_epsilon(eps);

    std::vector<double> current = initial_slice(g, eps, config.initial_sampling);
    surface.push_slice(0, current);
    for (std::size_t n = 1; n <= g.nt(); ++n) {
        SliceStep next = time_step(current, eps, g.dt, g, params, config.newton_tol,
                                   config.newton_max_iter, n);
        next.report.t = g.t_nodes[n];
        if (log) {
            log(next.report);
        }
        current = std::move(next.values);
        if (n % config.store_every == 0 || n == g.nt()) {
            surface.push_slice(n, current);
        }
    }
    return surface;
}

double ResidualField::max_abs() const {
    double worst = 0.0;
    for (const auto& slice : values) {
        for (double r : slice) {
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

ResidualField residual_field(const ValueSurface& v, double eps, const ModelParams& params) {
    const Grid& g = v.grid();
    ResidualField field;
    for (std::size_t k = 1; k < v.slice_count(); ++k) {
        const Stencil st(g, params, v.time(k) - v.time(k - 1));
        std::vector<double> values(g.nodes_per_slice(), 0.0);
        for (std::size_t j = 0; j < g.ny(); ++j) {
            for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
                values[g.index(i, j)] = node_residual(st, g, params, eps, v.slice(k), v.slice(k - 1), i, j);
            }
        }
        field.steps.push_back(v.step(k));
        field.values.push_back(std::move(values));
    }
    return field;
}

double initial_layer_error(const ValueSurface& v, double t_small, double y_band,
                           const ModelParams& params) {
    const auto k = v.find_time(t_small);
    if (!k || !(t_small > 0.0)) {
        throw Error(ErrorCode::SliceNotStored, "no stored slice at t=" + std::to_string(t_small));
    }
    const Grid& g = v.grid();
    const double spread = params.nu * std::sqrt(t_small);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        if (std::abs(g.y_nodes[j]) > y_band + 1e-12) {
            continue;
        }
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double target = gaussian_cdf(g.x_nodes[i] / spread);
            worst = std::max(worst, std::abs(v.at(*k, i, j) - target));
        }
    }
    return worst;
}

}  // namespace carbon
