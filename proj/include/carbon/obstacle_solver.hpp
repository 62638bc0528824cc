#pragma once

#include <span>
#include <string>
#include <vector>

#include "carbon/grid.hpp"
#include "carbon/model.hpp"

namespace carbon {

/// u(x) = integral of v from x_min to x, trapezoid rule, per (y, t) line.
/// Throws LeftBoundaryNotVanishing when |v(x_min)| > 0.01 on any line.
ValueSurface integrate_v_to_u(const ValueSurface& v);

/// One left-to-right sweep u_i <- min(u_i, u_{i-1} + dx), in place.
void gradient_project(std::span<double> row, double dx);

/// Solves
///   max{u_x - 1, u_t - (nu^2/2) u_xx - (sigma^2/2) u_yy - (mu + sigma^2/2) u_y
///                - (mu - r) u + (e^y/2m) u_x^2} = 0,   u(x, y, 0) = x^+
/// by an implicit x-sweep (quadratic term linearized about the previous
/// slice, slope blended toward upwind only as far as the largest e^y/m needs),
/// an implicit y-sweep, then gradient projection of every
/// row. u = 0 at x_min, unit slope at x_max, zero normal derivative in y.
/// Stores the same time levels as the penalty solver does for `store_every`.
/// Throws NonmonotoneSlice if a row decreases by more than 1e-8.
ValueSurface solve_u_projected(std::shared_ptr<const Grid> grid, const ModelParams& params,
                               std::size_t store_every);

/// Phi(x, s, theta) = s u(x, log s, T - theta), kept on the (x, y, t) mesh.
ValueSurface phi_from_u(const ValueSurface& u);

struct SliceDiscrepancy {
    std::size_t step = 0;
    double t = 0.0;
    double gradient_gap = 0.0;
    double phi_gap = 0.0;
    double complementarity = 0.0;
};

struct CrossCheckOptions {
    /// Relative Phi gaps are taken against max(Phi_proj, s * phi_floor) so
    /// the region where Phi vanishes does not dominate.
    double phi_floor = 0.1;
    /// Nodes with x > x_max - x_band are left out of the gaps: both routes
    /// impose a buy-region condition there that the solution may not satisfy
    /// when the free boundary lies outside the box.
    double x_band = 1.0;
};

struct CrossCheckReport {
    CrossCheckOptions options;
    /// max |(u_{i+1} - u_{i-1}) / 2dx - v_i| over compared nodes, all solved levels.
    double max_gradient_gap = 0.0;
    /// max |Phi_pen - Phi_proj| / max(Phi_proj, s * phi_floor), all solved levels.
    double max_relative_phi_gap = 0.0;
    /// Same two measures on the last level (t = T).
    double final_gradient_gap = 0.0;
    double final_phi_gap = 0.0;
    /// Gradient gap with no band removed.
    double full_box_gradient_gap = 0.0;
    /// max |min(1 - u_x, -E_h[u])| over compared interior nodes, E_h the
    /// discrete operator of the u equation.
    double max_complementarity = 0.0;
    std::vector<SliceDiscrepancy> slices;
};

/// Compares the penalty route (v, its integral) with the projected u on
/// every solved time level stored by both. Throws GridMismatch.
CrossCheckReport cross_validate(const ValueSurface& v, const ValueSurface& u,
                                const ModelParams& params, const CrossCheckOptions& options = {});

/// key=value lines; per-slice lines are `slice step=.. t=.. gradient_gap=..`.
std::string format_cross_check(const CrossCheckReport& report);

}  // namespace carbon
