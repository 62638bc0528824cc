#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "carbon/grid.hpp"
#include "carbon/model.hpp"

namespace carbon {

/// How the discontinuous-limit initial profile is put on the mesh.
enum class InitialSampling {
    cell_average,  // mean of the profile over each node's cell
    pointwise,     // profile evaluated at the node
};

struct SolverConfig {
    PenaltyConfig penalty;
    double newton_tol = 1e-8;
    int newton_max_iter = 100;
    std::size_t store_every = 4;
    InitialSampling initial_sampling = InitialSampling::cell_average;
};

void validate_solver_config(const SolverConfig& cfg);

struct StepReport {
    std::size_t step = 0;
    double t = 0.0;
    int newton_iterations = 0;
    double max_residual = 0.0;
    double v_min = 0.0;
    double v_max = 0.0;
    std::size_t clipped = 0;
};

/// `step=<k> t=<t> newton=<n> resid=<r> vmin=<a> vmax=<b> clipped=<c>`
std::string format_step_log(const StepReport& report);

struct SliceStep {
    std::vector<double> values;
    StepReport report;
};

/// Advances the penalized equation
///   v_t = (nu^2/2) v_xx + (sigma^2/2) v_yy + (mu + sigma^2/2) v_y + (mu - r) v
///         - (e^y/m) v v_x - beta((1 + eps - v)/eps)
/// by one backward-Euler step of length dt. The nonlinear system is solved by
/// Newton linearization of the pointwise terms (transport, penalty), each
/// linearization relaxed with one x-line then one y-line tridiagonal sweep.
/// Transport and y-drift are centered where the cell Peclet number keeps the
/// stencil monotone and upwinded (backward in x) elsewhere; the transport
/// choice is frozen from v_prev. Boundaries: v = 0 at
/// x_min, v = 1 + eps at x_max, zero normal derivative in y. The converged
/// slice is clipped to [0, 1 + eps]. Throws NewtonDiverged.
SliceStep time_step(std::span<const double> v_prev, double eps, double dt, const Grid& grid,
                    const ModelParams& params, double newton_tol, int newton_max_iter,
                    std::size_t step_index = 0);

/// Initial slice for the penalized problem at penalty eps.
std::vector<double> initial_slice(const Grid& grid, double eps, InitialSampling sampling);

using StepLogger = std::function<void(const StepReport&)>;

/// Marches from t = 0 to T and returns the stored slices (every
/// `store_every` steps plus the last one). NewtonDiverged carries the step.
ValueSurface solve_penalized(double eps, std::shared_ptr<const Grid> grid,
                             const ModelParams& params, const SolverConfig& config,
                             const StepLogger& log = {});

/// Discrete B_h[v] + beta on every stored slice after the first, using the
/// previous stored slice as the time level below. With store_every = 1 this
/// is exactly the residual of the equations `time_step` solves. Dirichlet
/// columns are reported as zero.
struct ResidualField {
    std::vector<std::size_t> steps;
    std::vector<std::vector<double>> values;

    double max_abs() const;
};

ResidualField residual_field(const ValueSurface& v, double eps, const ModelParams& params);

/// sup over x nodes and |y| <= y_band of |v(x, y, t_small) - N(x / (nu sqrt(t_small)))|.
/// Throws SliceNotStored when no stored slice sits at t_small.
double initial_layer_error(const ValueSurface& v, double t_small, double y_band,
                           const ModelParams& params);

}  // namespace carbon
