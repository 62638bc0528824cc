#include "carbon/obstacle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/surface_io.hpp"
#include "carbon/tridiagonal.hpp"

namespace carbon {

namespace {

constexpr double kMonotoneTol = 1e-8;

struct YWeights {
    std::vector<double> lo, hi, diag;
};

// Same drift treatment as the penalty scheme: centered unless the cell
// Peclet number forbids it.
YWeights y_weights(const Grid& g, const ModelParams& p) {
    const double diff = 0.5 * p.sigma * p.sigma / (g.dy * g.dy);
    const double drift = p.mu + 0.5 * p.sigma * p.sigma;
    const bool centered = drift * g.dy <= p.sigma * p.sigma;
    YWeights w;
    w.lo.assign(g.ny(), centered ? diff - 0.5 * drift / g.dy : diff);
    w.hi.assign(g.ny(), centered ? diff + 0.5 * drift / g.dy : diff + drift / g.dy);
    w.diag.assign(g.ny(), centered ? 2.0 * diff : 2.0 * diff + drift / g.dy);
    return w;
}

std::size_t below(std::size_t j) { return j > 0 ? j - 1 : 1; }
std::size_t above(std::size_t j, std::size_t ny) { return j + 1 < ny ? j + 1 : ny - 2; }

}  // namespace

ValueSurface integrate_v_to_u(const ValueSurface& v) {
    const Grid& g = v.grid();
    ValueSurface u(v.grid_ptr(), SurfaceKind::u);
    for (std::size_t k = 0; k < v.slice_count(); ++k) {
        std::vector<double> values(g.nodes_per_slice());
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double left = v.at(k, 0, j);
            if (std::abs(left) > 0.01) {
                std::ostringstream msg;
                msg << "v(x_min)=" << left << " at y=" << g.y_nodes[j] << " t=" << v.time(k)
                    << "; widen the box to the left";
                throw Error(ErrorCode::LeftBoundaryNotVanishing, msg.str());
            }
            double acc = 0.0;
            values[g.index(0, j)] = 0.0;
            for (std::size_t i = 1; i < g.nx(); ++i) {
                acc += 0.5 * g.dx * (v.at(k, i - 1, j) + v.at(k, i, j));
                values[g.index(i, j)] = acc;
            }
        }
        u.push_slice(v.step(k), std::move(values));
    }
    return u;
}

void gradient_project(std::span<double> row, double dx) {
    for (std::size_t i = 1; i < row.size(); ++i) {
        row[i] = std::min(row[i], row[i - 1] + dx);
    }
}

ValueSurface solve_u_projected(std::shared_ptr<const Grid> grid, const ModelParams& p,
                               std::size_t store_every) {
    if (store_every < 1) {
        throw Error(ErrorCode::ValidationError, "store_every must be at least 1");
    }
    const Grid& g = *grid;
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double dt = g.dt;
    const double diffusion = 0.5 * p.nu * p.nu;
    const double ax = diffusion / (g.dx * g.dx);
    const double growth = p.excess_drift();
    const double c_max = std::exp(g.spec.y_max) / p.m;
    const YWeights yw = y_weights(g, p);

    ValueSurface surface(grid, SurfaceKind::u);
    std::vector<double> u(g.nodes_per_slice());
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            u[g.index(i, j)] = std::max(g.x_nodes[i], 0.0);
        }
    }
    surface.push_slice(0, u);

    std::vector<double> half(u.size());
    const std::size_t n_line = std::max(nx, ny);
    std::vector<double> lower(n_line), diag(n_line), upper(n_line), rhs(n_line), scratch(n_line);

    for (std::size_t n = 1; n <= g.nt(); ++n) {
        // x-sweep: unknowns i = 1..nx-1, last row enforces unit slope.
        for (std::size_t j = 0; j < ny; ++j) {
            const double c = std::exp(g.y_nodes[j]) / p.m;
            const std::size_t row = j * nx;
            const std::size_t m = nx - 1;
            for (std::size_t q = 0; q + 1 < m; ++q) {
                const std::size_t i = q + 1;
                // Slope blended between backward and centered differences.
                // The centered share 2/sqrt(P P_max) keeps the stencil
                // monotone (it is below 2/P) and falls off like c^{-1/2}, slow
                // enough that (c/2) slope^2 still grows with c at a kink; the
                // second property keeps u ordered in y.
                const double back = (u[row + i] - u[row + i - 1]) / g.dx;
                const double centered = (u[row + i + 1] - u[row + i - 1]) / (2.0 * g.dx);
                const double per_c = std::max({back, centered, 0.0}) * g.dx / diffusion;
                const double peclet = std::sqrt(c * c_max) * per_c;
                const double up = peclet <= 2.0 ? 0.0 : 1.0 - 2.0 / peclet;
                const double slope = up * back + (1.0 - up) * centered;
                const double speed = c * slope / g.dx;
                lower[q] = -ax - speed * (0.5 + 0.5 * up);
                diag[q] = 1.0 / dt - growth + 2.0 * ax + speed * up;
                upper[q] = -ax + speed * 0.5 * (1.0 - up);
                rhs[q] = u[row + i] / dt + 0.5 * c * slope * slope;
            }
            lower[m - 1] = -1.0;
            diag[m - 1] = 1.0;
            rhs[m - 1] = g.dx;
            solve_tridiagonal(std::span(lower).first(m), std::span(diag).first(m),
                              std::span(upper).first(m), std::span(rhs).first(m),
                              std::span(scratch).first(m));
            half[row] = 0.0;
            std::copy_n(rhs.begin(), m, half.begin() + static_cast<std::ptrdiff_t>(row + 1));
        }

        // y-sweep on every column but the anchored one.
        for (std::size_t i = 1; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                diag[j] = 1.0 / dt + yw.diag[j];
                if (j == 0) {
                    lower[j] = 0.0;
                    upper[j] = -(yw.lo[j] + yw.hi[j]);
                } else if (j + 1 == ny) {
                    lower[j] = -(yw.lo[j] + yw.hi[j]);
                    upper[j] = 0.0;
                } else {
                    lower[j] = -yw.lo[j];
                    upper[j] = -yw.hi[j];
                }
                rhs[j] = half[j * nx + i] / dt;
            }
            solve_tridiagonal(std::span(lower).first(ny), std::span(diag).first(ny),
                              std::span(upper).first(ny), std::span(rhs).first(ny),
                              std::span(scratch).first(ny));
            for (std::size_t j = 0; j < ny; ++j) {
                u[j * nx + i] = rhs[j];
            }
        }

        for (std::size_t j = 0; j < ny; ++j) {
            std::span<double> row(u.data() + j * nx, nx);
            row[0] = 0.0;
            row[nx - 1] = row[nx - 2] + g.dx;
            gradient_project(row, g.dx);
            for (std::size_t i = 1; i < nx; ++i) {
                if (row[i] < row[i - 1] - kMonotoneTol) {
                    std::ostringstream msg;
                    msg << "u decreases at x=" << g.x_nodes[i] << " y=" << g.y_nodes[j]
                        << " step " << n;
                    throw Error(ErrorCode::NonmonotoneSlice, msg.str());
                }
            }
        }
        if (n % store_every == 0 || n == g.nt()) {
            surface.push_slice(n, u);
        }
    }
    return surface;
}

ValueSurface phi_from_u(const ValueSurface& u) {
    const Grid& g = u.grid();
    ValueSurface phi(u.grid_ptr(), SurfaceKind::phi);
    for (std::size_t k = 0; k < u.slice_count(); ++k) {
        std::vector<double> values(u.slice(k).begin(), u.slice(k).end());
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double s = std::exp(g.y_nodes[j]);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                values[g.index(i, j)] *= s;
            }
        }
        phi.push_slice(u.step(k), std::move(values));
    }
    return phi;
}

CrossCheckReport cross_validate(const ValueSurface& v, const ValueSurface& u,
                                const ModelParams& p, const CrossCheckOptions& options) {
    if (!v.grid().same_mesh(u.grid())) {
        throw Error(ErrorCode::GridMismatch, "penalty and projected surfaces use different meshes");
    }
    const Grid& g = u.grid();
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const ValueSurface u_pen = integrate_v_to_u(v);
    const double ax = 0.5 * p.nu * p.nu;
    const double growth = p.excess_drift();
    const YWeights yw = y_weights(g, p);
    const double x_cut = g.spec.x_max - options.x_band;

    CrossCheckReport report;
    report.options = options;
    for (std::size_t k = 0; k < u.slice_count(); ++k) {
        const auto kv = v.find_step(u.step(k));
        // Both routes start from their own initial data; only solved levels count.
        if (!kv || u.step(k) == 0) {
            continue;
        }
        SliceDiscrepancy d;
        d.step = u.step(k);
        d.t = u.time(k);
        for (std::size_t j = 0; j < ny; ++j) {
            const double s = std::exp(g.y_nodes[j]);
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const double ux = (u.at(k, i + 1, j) - u.at(k, i - 1, j)) / (2.0 * g.dx);
                const double gap = std::abs(ux - v.at(*kv, i, j));
                report.full_box_gradient_gap = std::max(report.full_box_gradient_gap, gap);
                if (g.x_nodes[i] <= x_cut) {
                    d.gradient_gap = std::max(d.gradient_gap, gap);
                }
            }
            for (std::size_t i = 0; i < nx && g.x_nodes[i] <= x_cut; ++i) {
                const double proj = s * u.at(k, i, j);
                const double pen = s * u_pen.at(*kv, i, j);
                d.phi_gap = std::max(d.phi_gap,
                                     std::abs(pen - proj) / std::max(proj, s * options.phi_floor));
            }
        }
        const double dt = u.time(k) - u.time(k - 1);
        for (std::size_t j = 0; j < ny; ++j) {
            const double c = std::exp(g.y_nodes[j]) / p.m;
            for (std::size_t i = 1; i + 1 < nx && g.x_nodes[i] <= x_cut; ++i) {
                const double uc = u.at(k, i, j);
                const double ux = (uc - u.at(k, i - 1, j)) / g.dx;
                const double uxx = (u.at(k, i + 1, j) - 2.0 * uc + u.at(k, i - 1, j)) / (g.dx * g.dx);
                const double y_part = yw.diag[j] * uc - yw.lo[j] * u.at(k, i, below(j)) -
                                      yw.hi[j] * u.at(k, i, above(j, ny));
                const double op = (uc - u.at(k - 1, i, j)) / dt - ax * uxx + y_part - growth * uc +
                                  0.5 * c * ux * ux;
                d.complementarity = std::max(d.complementarity, std::abs(std::min(1.0 - ux, -op)));
            }
        }
        report.max_gradient_gap = std::max(report.max_gradient_gap, d.gradient_gap);
        report.max_relative_phi_gap = std::max(report.max_relative_phi_gap, d.phi_gap);
        report.max_complementarity = std::max(report.max_complementarity, d.complementarity);
        report.final_gradient_gap = d.gradient_gap;
        report.final_phi_gap = d.phi_gap;
        report.slices.push_back(d);
    }
    return report;
}

std::string format_cross_check(const CrossCheckReport& r) {
    std::ostringstream out;
    out << "phi_floor=" << format_double(r.options.phi_floor) << '\n'
        << "x_band=" << format_double(r.options.x_band) << '\n'
        << "max_gradient_gap=" << format_double(r.max_gradient_gap) << '\n'
        << "max_relative_phi_gap=" << format_double(r.max_relative_phi_gap) << '\n'
        << "final_gradient_gap=" << format_double(r.final_gradient_gap) << '\n'
        << "final_phi_gap=" << format_double(r.final_phi_gap) << '\n'
        << "full_box_gradient_gap=" << format_double(r.full_box_gradient_gap) << '\n'
        << "max_complementarity=" << format_double(r.max_complementarity) << '\n'
        << "slices=" << r.slices.size() << '\n';
    for (const auto& d : r.slices) {
        out << "slice step=" << d.step << " t=" << format_double(d.t)
            << " gradient_gap=" << format_double(d.gradient_gap)
            << " phi_gap=" << format_double(d.phi_gap)
            << " complementarity=" << format_double(d.complementarity) << '\n';
    }
    return out.str();
}

}  // namespace carbon
