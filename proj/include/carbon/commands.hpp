#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carbon/checks.hpp"
#include "carbon/config.hpp"
#include "carbon/error.hpp"
#include "carbon/free_boundary.hpp"
#include "carbon/obstacle_solver.hpp"
#include "carbon/policy_sim.hpp"

namespace carbon {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverFailed = 3;

/// Maps a library error to the exit code of the command that raised it.
int exit_code_for(ErrorCode code);

/// Surfaces produced by a solve, penalty surfaces by decreasing epsilon.
struct SolveArtifacts {
    std::shared_ptr<const Grid> grid;
    std::vector<std::shared_ptr<const ValueSurface>> v;
    std::shared_ptr<const ValueSurface> u;
    std::shared_ptr<const ValueSurface> phi;
    std::optional<CrossCheckReport> cross;

    const ValueSurface& finest_v() const { return *v.back(); }
};

std::shared_ptr<const Grid> make_grid(const RunConfig& cfg);

/// Runs the penalty solve for every epsilon of the schedule, the projected
/// solve and the cross-check. Grid warnings and per-epsilon summaries go to
/// `log`. Solver errors propagate.
SolveArtifacts compute_artifacts(const RunConfig& cfg, std::ostream& log);

/// `v_eps<eps>.csv` with eps printed in shortest %g form.
std::string v_file_name(double eps);

/// Stored steps written to the surface tables: multiples of
/// output.slice_every, the step at check.t_small and the last step.
bool keep_step(const RunConfig& cfg, const Grid& grid, std::size_t step);

/// Writes every surface, the limit boundary and crosscheck.txt into
/// cfg.output_dir, each table headed by `# config_hash=<hash>`.
void write_artifacts(const SolveArtifacts& artifacts, const RunConfig& cfg);

/// Reads what `write_artifacts` wrote. Throws MissingArtifacts when a file
/// is absent or was written under a different config hash.
SolveArtifacts load_artifacts(const RunConfig& cfg);

/// Phi at (x0, s0, theta = 0) from a projected solve under `raw`, used by
/// the parameter sweeps. Throws the validation errors of `raw`.
double probe_phi(const RawParams& raw, const GridSpec& grid, double x0, double s0);

struct SweepPoint {
    double value;
    double phi;
};

/// Re-solves at every value of one parameter ("m", "nu", "mu", "sigma"),
/// all other settings held fixed. Solves run concurrently.
std::vector<SweepPoint> parameter_sweep(const RunConfig& cfg, const std::string& name,
                                        const std::vector<double>& values);

/// True when the sweep column is strictly increasing (sign > 0) or strictly
/// decreasing (sign < 0).
bool strictly_monotone(const std::vector<SweepPoint>& sweep, int sign);

int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_figures(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);

}  // namespace carbon
