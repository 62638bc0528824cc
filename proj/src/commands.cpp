#include "carbon/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/penalty_solver.hpp"
#include "carbon/surface_io.hpp"

namespace carbon {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::MuNotGreaterThanR:
        case ErrorCode::NonPositiveCoefficient:
        case ErrorCode::InvalidPenalty:
        case ErrorCode::InvalidSpec:
        case ErrorCode::MissingArtifacts:
            return kExitConfigError;
        default:
            return kExitSolverFailed;
    }
}

namespace {

std::string header(const RunConfig& cfg) { return "config_hash=" + config_hash(cfg); }
std::string solve_header(const RunConfig& cfg) { return "solve_hash=" + solve_hash(cfg); }

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    return fs::path(cfg.output_dir) / name;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    return out;
}

void ensure_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create " + cfg.output_dir + ": " + ec.message());
    }
}

BoundConstants constants(const RunConfig& cfg) {
    return make_bound_constants(cfg.params, cfg.check.kappa, cfg.check.a_const);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return out;
}

// First-line hash of a table plus, for surfaces, the solve hash on line two.
std::string read_comment_value(std::istream& in, const std::string& key) {
    std::string line;
    while (std::getline(in, line) && !line.empty() && line.front() == '#') {
        const auto pos = line.find(key + "=");
        if (pos != std::string::npos) {
            return line.substr(pos + key.size() + 1);
        }
    }
    return {};
}

std::shared_ptr<const ValueSurface> load_surface(const RunConfig& cfg,
                                                 std::shared_ptr<const Grid> grid,
                                                 const std::string& name, SurfaceKind kind,
                                                 double eps) {
    const fs::path path = out_path(cfg, name);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingArtifacts, path.string() + " not found; run solve first");
    }
    const std::string found = read_comment_value(in, "solve_hash");
    if (found != solve_hash(cfg)) {
        throw Error(ErrorCode::MissingArtifacts,
                    path.string() + " was written under different solve settings; run solve again");
    }
    in.clear();
    in.seekg(0);
    auto surface = std::make_shared<ValueSurface>(read_surface_csv(in, std::move(grid), kind));
    if (surface->empty()) {
        throw Error(ErrorCode::MissingArtifacts, path.string() + " holds no slices");
    }
    surface->set_epsilon(eps);
    return surface;
}

std::size_t step_of(const Grid& grid, double t) {
    return static_cast<std::size_t>(std::llround(t / grid.dt));
}

}  // namespace

std::shared_ptr<const Grid> make_grid(const RunConfig& cfg) {
    return std::make_shared<const Grid>(build_grid(cfg.grid, constants(cfg)));
}

SolveArtifacts compute_artifacts(const RunConfig& cfg, std::ostream& log) {
    SolveArtifacts a;
    a.grid = make_grid(cfg);
    for (const std::string& w : a.grid->warnings) {
        log << "warning: " << w << '\n';
    }
    for (double eps : cfg.solver.penalty.epsilon_schedule) {
        int worst_newton = 0;
        double worst_resid = 0.0;
        std::size_t clipped = 0;
        auto v = solve_penalized(eps, a.grid, cfg.params, cfg.solver, [&](const StepReport& r) {
            worst_newton = std::max(worst_newton, r.newton_iterations);
            worst_resid = std::max(worst_resid, r.max_residual);
            clipped += r.clipped;
        });
        log << "penalty eps=" << format_double(eps) << " max_newton=" << worst_newton
            << " max_residual=" << format_double(worst_resid) << " clipped=" << clipped << '\n';
        a.v.push_back(std::make_shared<const ValueSurface>(std::move(v)));
    }
    a.u = std::make_shared<const ValueSurface>(
        solve_u_projected(a.grid, cfg.params, cfg.solver.store_every));
    a.phi = std::make_shared<const ValueSurface>(phi_from_u(*a.u));
    a.cross = cross_validate(a.finest_v(), *a.u, cfg.params, cfg.cross);
    log << "crosscheck final_gradient_gap=" << format_double(a.cross->final_gradient_gap)
        << " final_phi_gap=" << format_double(a.cross->final_phi_gap) << '\n';
    return a;
}

std::string v_file_name(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v_eps%g.csv", eps);
    return buf;
}

bool keep_step(const RunConfig& cfg, const Grid& grid, std::size_t step) {
    return step % cfg.slice_every == 0 || step == grid.nt() ||
           step == step_of(grid, cfg.check.t_small);
}

void write_artifacts(const SolveArtifacts& a, const RunConfig& cfg) {
    ensure_dir(cfg);
    const std::string comment = header(cfg) + "\n# " + solve_header(cfg);
    auto write = [&](const ValueSurface& s, const std::string& name) {
        std::ofstream out = open_out(out_path(cfg, name));
        write_surface_csv(out, s, comment,
                          [&](std::size_t k) { return keep_step(cfg, s.grid(), s.step(k)); });
        if (!out) {
            throw Error(ErrorCode::Io, "write failed for " + name);
        }
    };
    for (const auto& v : a.v) {
        write(*v, v_file_name(v->epsilon()));
    }
    write(*a.u, "u.csv");
    write(*a.phi, "phi.csv");
    {
        std::ofstream out = open_out(out_path(cfg, "boundary.csv"));
        write_boundary_csv(out, extract_boundary(a.finest_v(), kLimitLevel), header(cfg));
    }
    if (a.cross) {
        std::ofstream out = open_out(out_path(cfg, "crosscheck.txt"));
        out << "# " << header(cfg) << '\n' << format_cross_check(*a.cross);
    }
}

SolveArtifacts load_artifacts(const RunConfig& cfg) {
    SolveArtifacts a;
    a.grid = make_grid(cfg);
    for (double eps : cfg.solver.penalty.epsilon_schedule) {
        a.v.push_back(load_surface(cfg, a.grid, v_file_name(eps), SurfaceKind::v, eps));
    }
    a.u = load_surface(cfg, a.grid, "u.csv", SurfaceKind::u, 0.0);
    a.phi = load_surface(cfg, a.grid, "phi.csv", SurfaceKind::phi, 0.0);
    return a;
}

double probe_phi(const RawParams& raw, const GridSpec& spec, double x0, double s0) {
    const ModelParams p = validate_params(raw);
    GridSpec gs = spec;
    gs.T = raw.T;
    auto grid = std::make_shared<const Grid>(build_grid(gs));
    const ValueSurface u = solve_u_projected(grid, p, grid->nt());
    const ValueSurface phi = phi_from_u(u);
    return interpolate(phi, x0, std::log(s0), raw.T).value;
}

std::vector<SweepPoint> parameter_sweep(const RunConfig& cfg, const std::string& name,
                                        const std::vector<double>& values) {
    std::vector<std::future<double>> jobs;
    for (double value : values) {
        RawParams raw = cfg.raw;
        if (name == "m") {
            raw.m = value;
        } else if (name == "nu") {
            raw.nu = value;
        } else if (name == "mu") {
            raw.mu = value;
        } else if (name == "sigma") {
            raw.sigma = value;
        } else {
            throw Error(ErrorCode::ValidationError, "no sweep over parameter '" + name + "'");
        }
        jobs.push_back(std::async(std::launch::async, probe_phi, raw, cfg.grid,
                                  cfg.figures.probe_x0, cfg.figures.probe_s0));
    }
    std::vector<SweepPoint> out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        out.push_back({values[k], jobs[k].get()});
    }
    return out;
}

bool strictly_monotone(const std::vector<SweepPoint>& sweep, int sign) {
    for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
        const double d = sweep[k + 1].phi - sweep[k].phi;
        if (!(sign > 0 ? d > 0.0 : d < 0.0)) {
            return false;
        }
    }
    return true;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    SolveArtifacts a;
    try {
        a = compute_artifacts(cfg, log);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitSolverFailed;
    }
    write_artifacts(a, cfg);
    log << "wrote artifacts to " << cfg.output_dir << '\n';
    return kExitOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const SolveArtifacts a = load_artifacts(cfg);
    SuiteInputs in;
    for (const auto& v : a.v) {
        in.v_by_decreasing_eps.push_back(v.get());
    }
    in.u = a.u.get();
    in.phi = a.phi.get();
    in.params = cfg.params;
    in.consts = constants(cfg);
    std::vector<CheckResult> results = run_invariant_suite(in);

    // The initial layer is reported but not enforced: its size is set by the
    // mesh, not by a structural property.
    CheckResult layer;
    layer.tag = "initial-layer";
    layer.description = "sup |v(x,y,t_small) - N(x/(nu sqrt(t_small)))| over |y| <= y_band";
    layer.hard = false;
    layer.tolerance = 0.08;
    try {
        layer.worst = initial_layer_error(a.finest_v(), cfg.check.t_small, cfg.check.y_band, cfg.params);
        layer.passed = layer.worst <= layer.tolerance;
    } catch (const Error& e) {
        layer.where = "not stored";
    }
    results.push_back(layer);

    out << "# " << header(cfg) << '\n';
    for (const CheckResult& r : results) {
        out << format_check(r) << '\n';
    }
    const bool ok = hard_checks_pass(results);
    out << (ok ? "all hard checks passed" : "hard check failure") << '\n';
    return ok ? kExitOk : kExitCheckFailed;
}

namespace {

void write_sweep(const RunConfig& cfg, const std::string& file, const std::string& column,
                 const std::vector<SweepPoint>& sweep) {
    std::ofstream out = open_out(out_path(cfg, file));
    out << "# " << header(cfg) << '\n'
        << column << ",phi\n";
    for (const SweepPoint& p : sweep) {
        out << format_double(p.value) << ',' << format_double(p.phi) << '\n';
    }
}

constexpr const char* kPlotScript = R"py(import sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

d = sys.argv[1] if len(sys.argv) > 1 else "."

def load(name):
    return pd.read_csv(f"{d}/{name}", comment="#")

def surface(name, column, label):
    t = load(name)
    fig = plt.figure()
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(t["x0"], t["s0"], t[column], cmap="viridis")
    ax.set_xlabel("X0")
    ax.set_ylabel("S0")
    ax.set_zlabel(label)
    fig.savefig(f"{d}/{name[:-4]}.png", dpi=120)

surface("fig1_phi_x0_s0.csv", "phi", "Phi")
surface("fig3_v.csv", "v", "v")
surface("fig4_policy.csv", "a_star", "a*")

b = load("fig2_boundary.csv")
b = b[b["flag"] == "inside"]
fig = plt.figure()
ax = fig.add_subplot(projection="3d")
ax.scatter(b["s"], b["theta"], b["x_boundary"], s=2)
ax.set_xlabel("s")
ax.set_ylabel("theta")
ax.set_zlabel("x(s, theta)")
fig.savefig(f"{d}/fig2_boundary.png", dpi=120)

for name, col in [("fig5_m.csv", "m"), ("fig6_nu.csv", "nu"), ("fig7_mu.csv", "mu"), ("fig8_sigma.csv", "sigma")]:
    t = load(name)
    fig, ax = plt.subplots()
    ax.plot(t[col], t["phi"], marker="o")
    ax.set_xlabel(col)
    ax.set_ylabel("Phi at probe")
    fig.savefig(f"{d}/{name[:-4]}.png", dpi=120)
)py";

}  // namespace

int cmd_figures(const RunConfig& cfg, std::ostream& log) {
    const SolveArtifacts a = load_artifacts(cfg);
    const FigureSettings& f = cfg.figures;
    const double T = cfg.params.T;
    const auto xs = linspace(f.x0_min, f.x0_max, f.n_x0);
    const auto ss = linspace(f.s0_min, f.s0_max, f.n_s0);
    const ValueSurface& v = a.finest_v();

    {
        std::ofstream fig1 = open_out(out_path(cfg, "fig1_phi_x0_s0.csv"));
        std::ofstream fig3 = open_out(out_path(cfg, "fig3_v.csv"));
        std::ofstream fig4 = open_out(out_path(cfg, "fig4_policy.csv"));
        fig1 << "# " << header(cfg) << "\nx0,s0,phi\n";
        fig3 << "# " << header(cfg) << "\nx0,s0,v\n";
        fig4 << "# " << header(cfg) << "\nx0,s0,a_star\n";
        const Policy policy(a.v.back(), extract_boundary(v, kLimitLevel), cfg.params);
        for (double s0 : ss) {
            for (double x0 : xs) {
                const std::string key = format_double(x0) + ',' + format_double(s0) + ',';
                fig1 << key << format_double(interpolate(*a.phi, x0, std::log(s0), T).value) << '\n';
                fig3 << key << format_double(interpolate(v, x0, std::log(s0), T).value) << '\n';
                fig4 << key << format_double(policy.rate(x0, s0, 0.0).rate) << '\n';
            }
        }
    }
    {
        std::ofstream out = open_out(out_path(cfg, "fig2_boundary.csv"));
        write_boundary_csv(out, extract_boundary(v, kLimitLevel), header(cfg));
    }
    struct Sweep {
        const char* file;
        const char* name;
        const std::vector<double>* values;
        int sign;
    };
    const Sweep sweeps[] = {{"fig5_m.csv", "m", &f.sweep_m, +1},
                            {"fig6_nu.csv", "nu", &f.sweep_nu, +1},
                            {"fig7_mu.csv", "mu", &f.sweep_mu, +1},
                            {"fig8_sigma.csv", "sigma", &f.sweep_sigma, -1}};
    for (const Sweep& s : sweeps) {
        const auto points = parameter_sweep(cfg, s.name, *s.values);
        write_sweep(cfg, s.file, s.name, points);
        log << s.file << ": phi " << (s.sign > 0 ? "increasing" : "decreasing") << " in " << s.name
            << ": " << (strictly_monotone(points, s.sign) ? "yes" : "no") << '\n';
    }
    if (f.plot_script) {
        std::ofstream out = open_out(out_path(cfg, "plot_figures.py"));
        out << kPlotScript;
    }
    log << "wrote figure data to " << cfg.output_dir << '\n';
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const SolveArtifacts a = load_artifacts(cfg);
    ensure_dir(cfg);
    const ModelParams& p = cfg.params;
    auto policy = extract_policy(a.v.back(), extract_boundary(a.finest_v(), kLimitLevel), p);

    SimRequest base;
    base.n_paths = cfg.sim.paths;
    base.n_steps = cfg.sim.steps;
    base.seed = cfg.sim.seed;

    std::ostringstream report;
    report << "# " << header(cfg) << '\n';
    bool all_pass = true;

    SimRequest zero_req = base;
    zero_req.n_paths = cfg.sim.zero_paths;
    const SimReport zero = simulate_paths(ZeroStrategy{}, zero_req, p);
    const double closed = zero_strategy_cost(zero_req.x0, zero_req.s0, p.T, p);
    const bool zero_ok = std::abs(zero.mean_cost - closed) <= 3.0 * zero.stderr_cost;
    all_pass = all_pass && zero_ok;
    report << "[zero_strategy]\n" << format_sim_report(zero) << "closed_form=" << format_double(closed)
           << "\nverdict=" << (zero_ok ? "PASS" : "FAIL") << "\n\n";
    out << (zero_ok ? "PASS" : "FAIL") << " zero-strategy x0=0 s0=1 mc=" << format_double(zero.mean_cost)
        << " stderr=" << format_double(zero.stderr_cost) << " closed_form=" << format_double(closed)
        << '\n';

    for (const auto& [x0, s0] : cfg.sim.points) {
        SimRequest req = base;
        req.x0 = x0;
        req.s0 = s0;
        const SimReport r = simulate_paths(*policy, req, p);
        const ValueCheck c = verify_value(r, *a.phi, p, cfg.sim.rel_tol, cfg.sim.min_paths);
        all_pass = all_pass && c.verdict == Verdict::pass;
        report << "[policy x0=" << format_double(x0) << " s0=" << format_double(s0) << "]\n"
               << format_sim_report(r) << "phi=" << format_double(c.phi)
               << "\ndifference=" << format_double(c.difference)
               << "\ntolerance=" << format_double(c.tolerance) << "\nverdict=" << to_string(c.verdict);
        if (!c.note.empty()) {
            report << "\nnote=" << c.note;
        }
        report << "\n\n";
        out << to_string(c.verdict) << " policy x0=" << format_double(x0) << " s0=" << format_double(s0)
            << " mc=" << format_double(r.mean_cost) << " phi=" << format_double(c.phi)
            << " diff=" << format_double(c.difference) << " tol=" << format_double(c.tolerance)
            << " exit_fraction=" << format_double(r.exit_fraction);
        if (!c.note.empty()) {
            out << " (" << c.note << ")";
        }
        out << '\n';
    }

    if (!cfg.sim.points.empty()) {
        std::vector<std::shared_ptr<const Strategy>> alternatives{std::make_shared<ZeroStrategy>()};
        for (double rate : cfg.sim.constant_rates) {
            alternatives.push_back(std::make_shared<ConstantRateStrategy>(rate));
        }
        const auto rows =
            strategy_dominance({cfg.sim.points.front()}, *policy, alternatives, base, p);
        std::ofstream csv = open_out(out_path(cfg, "dominance.csv"));
        csv << "# " << header(cfg) << '\n'
            << "x0,s0,strategy,mean_cost,stderr,policy_mean,policy_stderr,separation,paired_separation,"
               "dominated\n";
        for (const DominanceRow& row : rows) {
            for (const DominanceEntry& e : row.alternatives) {
                const bool enough = cfg.sim.paths >= cfg.sim.min_paths;
                all_pass = all_pass && e.dominated && enough;
                csv << format_double(row.x0) << ',' << format_double(row.s0) << ',' << e.strategy << ','
                    << format_double(e.mean_cost) << ',' << format_double(e.stderr_cost) << ','
                    << format_double(row.policy_mean) << ',' << format_double(row.policy_stderr) << ','
                    << format_double(e.separation) << ',' << format_double(e.paired_separation) << ','
                    << (e.dominated ? "true" : "false") << '\n';
                out << (!enough ? "INCONCLUSIVE" : (e.dominated ? "PASS" : "FAIL"))
                    << " dominance x0=" << format_double(row.x0) << " s0=" << format_double(row.s0)
                    << " over " << e.strategy << " separation=" << format_double(e.separation) << '\n';
            }
        }
    }

    std::ofstream file = open_out(out_path(cfg, "simulate.txt"));
    file << report.str();
    out << (all_pass ? "all verifications passed" : "verification not passed") << '\n';
    return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace carbon
