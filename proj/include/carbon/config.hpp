#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carbon/grid.hpp"
#include "carbon/model.hpp"
#include "carbon/obstacle_solver.hpp"
#include "carbon/penalty_solver.hpp"

namespace carbon {

struct SimSettings {
    std::size_t paths = 10000;
    std::size_t zero_paths = 100000;  // closed-form comparison of the zero strategy
    std::size_t steps = 400;
    std::uint64_t seed = 20240601;
    std::vector<std::pair<double, double>> points{{1.0, 1.0}, {0.0, 1.0}, {-1.0, 2.0}};
    std::vector<double> constant_rates{1.0, 2.0};
    double rel_tol = 0.02;
    std::size_t min_paths = 1000;  // fewer paths give an inconclusive verdict
};

struct FigureSettings {
    double x0_min = -3.0;
    double x0_max = 6.0;
    std::size_t n_x0 = 37;
    double s0_min = 0.2;
    double s0_max = 5.0;
    std::size_t n_s0 = 25;
    double probe_x0 = 1.0;
    double probe_s0 = 1.0;
    std::vector<double> sweep_m{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> sweep_nu{0.3, 0.4, 0.5, 0.6, 0.7};
    std::vector<double> sweep_mu{0.04, 0.045, 0.05, 0.055, 0.06};
    std::vector<double> sweep_sigma{0.1, 0.15, 0.2, 0.25, 0.3};
    bool plot_script = true;
};

struct CheckSettings {
    double t_small = 0.01;
    double y_band = 1.0;
    std::optional<double> kappa;
    std::optional<double> a_const;
};

struct RunConfig {
    RawParams raw;
    ModelParams params{};
    GridSpec grid;
    SolverConfig solver;
    CrossCheckOptions cross;
    SimSettings sim;
    FigureSettings figures;
    CheckSettings check;
    std::string output_dir = "out";
    std::size_t slice_every = 40;  // time levels written to surface tables
};

/// Parses `key = value` lines (`#` starts a comment). Unknown keys and bad
/// values raise ParseError naming the line; the result is validated.
RunConfig parse_config(const std::string& text);

/// Sets one key as if it appeared in the file. Does not re-validate.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Validates every sub-config and fills `params`. Throws the module errors
/// (MuNotGreaterThanR, InvalidPenalty, InvalidSpec, ...) or ValidationError.
void validate_run_config(RunConfig& cfg);

/// Every recognized key with its current value, one `key=value` per line in
/// a fixed order, excluding output.dir.
std::string canonical_settings(const RunConfig& cfg);

/// FNV-1a 64-bit hash of `canonical_settings`, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Same hash over the keys that change solve artifacts (model, grid, solver,
/// bounds, cross-check, stored slices). Simulation and figure settings do
/// not enter it, so artifacts stay valid when only those change.
std::string solve_hash(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace carbon
