// Acceptance run at desk scale: one PASS/FAIL line per criterion, exit 1 if
// any criterion fails. Takes a scratch directory as its only argument.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "carbon/checks.hpp"
#include "carbon/commands.hpp"
#include "carbon/config.hpp"
#include "carbon/free_boundary.hpp"
#include "carbon/obstacle_solver.hpp"
#include "carbon/penalty_solver.hpp"
#include "carbon/policy_sim.hpp"
#include "carbon/surface_io.hpp"

using namespace carbon;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kExactTol = 1e-12;
constexpr double kClipFraction = 1e-3;
constexpr double kBarrierShare = 0.01;
constexpr double kOrderTol = 1e-6;
constexpr double kZeroClosedForm = 0.20350;
constexpr double kZeroSlack = 1e-3;
constexpr std::size_t kZeroPaths = 100000;
constexpr double kGradientGap = 0.03;
constexpr double kPhiGap = 0.02;
constexpr double kHalvingLo = 0.35;
constexpr double kHalvingHi = 0.65;
constexpr double kLinearTol = 5e-3;
constexpr double kLinearEps = 1e-3;
constexpr double kLayerTol = 0.08;
constexpr std::size_t kPolicyPaths = 10000;

int failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << n << ". " << name << ": " << detail << std::endl;
    if (!ok) {
        ++failures;
    }
}

std::string num(double x) { return format_double(x); }

std::string failed_tags(const std::vector<CheckResult>& rs) {
    std::string out;
    for (const CheckResult& r : rs) {
        if (!r.passed) {
            out += " [" + format_check(r) + "]";
        }
    }
    return out;
}

bool all_passed(const std::vector<CheckResult>& rs) {
    for (const CheckResult& r : rs) {
        if (!r.passed) {
            return false;
        }
    }
    return true;
}

double worst_of(const std::vector<CheckResult>& rs) {
    double w = 0.0;
    for (const CheckResult& r : rs) {
        w = std::max(w, r.worst);
    }
    return w;
}

struct PenaltyRun {
    std::shared_ptr<const ValueSurface> v;
    std::size_t clipped = 0;
    std::size_t visited = 0;
};

PenaltyRun solve_logged(double eps, std::shared_ptr<const Grid> g, const ModelParams& p,
                        const SolverConfig& cfg) {
    PenaltyRun run;
    ValueSurface v = solve_penalized(eps, g, p, cfg, [&](const StepReport& r) {
        run.clipped += r.clipped;
        run.visited += g->nodes_per_slice();
    });
    run.v = std::make_shared<const ValueSurface>(std::move(v));
    return run;
}

std::shared_ptr<const Grid> grid_from(const GridSpec& spec) {
    return std::make_shared<const Grid>(build_grid(spec));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "carbon_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const auto started = std::chrono::steady_clock::now();

    RunConfig cfg = parse_config("");
    const ModelParams& p = cfg.params;
    const BoundConstants consts = make_bound_constants(p, cfg.check.kappa, cfg.check.a_const);
    auto grid = grid_from(cfg.grid);

    std::vector<PenaltyRun> runs;
    for (double eps : cfg.solver.penalty.epsilon_schedule) {
        runs.push_back(solve_logged(eps, grid, p, cfg.solver));
    }
    const ValueSurface& v_fine = *runs.back().v;
    const ValueSurface u = solve_u_projected(grid, p, cfg.solver.store_every);
    const ValueSurface phi = phi_from_u(u);

    // 1
    {
        const CheckResult a = check_u_initial(u);
        const CheckResult b = check_phi_terminal(phi);
        report(1, "terminal and initial exactness", a.worst <= kExactTol && b.worst <= kExactTol,
               "u(x,y,0) err=" + num(a.worst) + " Phi(x,s,T) err=" + num(b.worst) + " tol=" + num(kExactTol));
    }

    // 2
    {
        std::vector<CheckResult> rs;
        std::size_t clipped = 0;
        std::size_t visited = 0;
        for (const PenaltyRun& r : runs) {
            rs.push_back(check_penalized_range(*r.v));
            clipped += r.clipped;
            visited += r.visited;
        }
        const double share = static_cast<double>(clipped) / static_cast<double>(visited);
        report(2, "penalized range", all_passed(rs) && share <= kClipFraction,
               "worst range violation=" + num(worst_of(rs)) + " clip fraction=" + num(share) +
                   " (limit " + num(kClipFraction) + ")" + failed_tags(rs));
    }

    // 3
    {
        std::vector<CheckResult> bound;
        double barrier = 0.0;
        for (const PenaltyRun& r : runs) {
            bound.push_back(check_exponential_bound(*r.v, p));
            barrier = std::max(barrier, check_ramp_barrier(*r.v, p, consts).worst);
        }
        report(3, "exponential bound and lower barrier", all_passed(bound) && barrier <= kBarrierShare,
               "bound worst=" + num(worst_of(bound)) + " barrier failing share=" + num(barrier) +
                   " (limit " + num(kBarrierShare) + ", diagnostic)" + failed_tags(bound));
    }

    // 4
    {
        std::vector<const ValueSurface*> vs;
        for (const PenaltyRun& r : runs) {
            vs.push_back(r.v.get());
        }
        const CheckResult r = check_epsilon_ordering(vs);
        report(4, "epsilon ordering", r.worst <= kOrderTol,
               "schedule " + num(vs.front()->epsilon()) + ".." + num(vs.back()->epsilon()) +
                   " worst=" + num(r.worst) + " tol=" + num(kOrderTol));
    }

    // 5
    {
        const std::vector<CheckResult> rs{check_phi_x_gradient(phi, p), check_phi_s_gradient(phi),
                                          check_phi_convexity(phi), check_phi_upper_bound(phi, p)};
        std::string detail;
        for (const CheckResult& r : rs) {
            detail += r.tag + "=" + num(r.worst) + " ";
        }
        report(5, "Phi gradient, convexity and upper bound", all_passed(rs), detail + failed_tags(rs));
    }

    // 6
    {
        SimRequest req;
        req.n_paths = kZeroPaths;
        req.n_steps = cfg.sim.steps;
        req.seed = cfg.sim.seed;
        const SimReport z = simulate_paths(ZeroStrategy{}, req, p);
        const double phi0 = interpolate(phi, 0.0, 0.0, p.T).value;
        const bool mc_ok = std::abs(z.mean_cost - kZeroClosedForm) <= 3.0 * z.stderr_cost;
        const bool phi_ok = phi0 <= kZeroClosedForm + kZeroSlack;
        report(6, "zero-strategy closed form", mc_ok && phi_ok,
               "mc=" + num(z.mean_cost) + " stderr=" + num(z.stderr_cost) + " closed_form=" +
                   num(kZeroClosedForm) + " Phi(0,1,0)=" + num(phi0));
    }

    // 7
    {
        const CrossCheckReport base = cross_validate(v_fine, u, p, cfg.cross);
        GridSpec fine = cfg.grid;
        fine.nx = 2 * (fine.nx - 1) + 1;
        fine.nt *= 2;
        auto fine_grid = grid_from(fine);
        SolverConfig fine_solver = cfg.solver;
        fine_solver.store_every = 2 * cfg.solver.store_every;
        const ValueSurface v2 = solve_penalized(v_fine.epsilon(), fine_grid, p, fine_solver);
        const ValueSurface u2 = solve_u_projected(fine_grid, p, fine_solver.store_every);
        const CrossCheckReport refined = cross_validate(v2, u2, p, cfg.cross);
        const double rg = refined.max_gradient_gap / base.max_gradient_gap;
        const double rp = refined.max_relative_phi_gap / base.max_relative_phi_gap;
        const bool within = base.max_gradient_gap <= kGradientGap && base.max_relative_phi_gap <= kPhiGap;
        const bool halves = rg >= kHalvingLo && rg <= kHalvingHi && rp >= kHalvingLo && rp <= kHalvingHi;
        report(7, "penalty and projected routes agree", within && halves,
               "gradient gap=" + num(base.max_gradient_gap) + " (tol " + num(kGradientGap) + ") phi gap=" +
                   num(base.max_relative_phi_gap) + " (tol " + num(kPhiGap) + ") refined ratios " + num(rg) +
                   ", " + num(rp) + " (need [" + num(kHalvingLo) + ", " + num(kHalvingHi) +
                   "]); last level " + num(base.final_gradient_gap) + ", " + num(base.final_phi_gap) +
                   " refined " + num(refined.final_gradient_gap) + ", " + num(refined.final_phi_gap));
    }

    // 8
    {
        RawParams raw = cfg.raw;
        raw.m = 1e6;
        raw.T = 0.25;
        const ModelParams lin = validate_params(raw);
        GridSpec spec = cfg.grid;
        spec.T = raw.T;
        spec.nt = static_cast<std::size_t>(std::llround(raw.T / grid->dt));
        auto g = grid_from(spec);
        SolverConfig sc = cfg.solver;
        sc.store_every = spec.nt;
        auto worst_at = [&](double eps) {
            const ValueSurface v = solve_penalized(eps, g, lin, sc);
            const std::size_t k = v.slice_count() - 1;
            const std::size_t j = g->ny() / 2;
            double worst = 0.0;
            for (std::size_t i = 1; g->x_nodes[i] < 0.0; ++i) {
                const double x = g->x_nodes[i];
                const double want = std::exp(lin.excess_drift() * raw.T) * gaussian_cdf(x / (lin.nu * std::sqrt(raw.T)));
                worst = std::max(worst, std::abs(v.at(k, i, j) - want));
            }
            return worst;
        };
        const double small = worst_at(kLinearEps);
        const double desk = worst_at(v_fine.epsilon());
        report(8, "linear limit", small <= kLinearTol,
               "eps=" + num(kLinearEps) + " worst=" + num(small) + " tol=" + num(kLinearTol) +
                   " (eps=" + num(v_fine.epsilon()) + " gives " + num(desk) + ")");
    }

    // 9
    {
        const double t_small = cfg.check.t_small;
        const double base = initial_layer_error(v_fine, t_small, cfg.check.y_band, p);
        std::vector<double> levels{base};
        for (int k = 1; k <= 2; ++k) {
            const double scale = std::pow(0.5, k);
            const double ts = t_small * scale;
            RawParams raw = cfg.raw;
            // Only the first few steps matter; a short horizon keeps the run cheap.
            raw.T = 4.0 * ts;
            GridSpec spec = cfg.grid;
            spec.T = raw.T;
            spec.nx = static_cast<std::size_t>(std::llround((spec.nx - 1) / scale)) + 1;
            spec.nt = static_cast<std::size_t>(std::llround(raw.T / (grid->dt * scale)));
            SolverConfig sc = cfg.solver;
            sc.store_every = 1;
            const ValueSurface v = solve_penalized(v_fine.epsilon(), grid_from(spec), validate_params(raw), sc);
            levels.push_back(initial_layer_error(v, ts, cfg.check.y_band, p));
        }
        const bool decreasing = levels[1] < levels[0] && levels[2] < levels[1];
        report(9, "initial layer", base <= kLayerTol && decreasing,
               "sup error=" + num(base) + " tol=" + num(kLayerTol) + "; under (dx, dt, t_small) halving " +
                   num(levels[0]) + " -> " + num(levels[1]) + " -> " + num(levels[2]));
    }

    // 10
    {
        std::vector<FreeBoundary> fbs;
        std::vector<CheckResult> rs;
        for (const PenaltyRun& r : runs) {
            fbs.push_back(extract_boundary(*r.v, penalty_level(r.v->epsilon())));
            rs.push_back(check_boundary_monotone(fbs.back()));
            rs.push_back(check_boundary_containment(fbs.back(), p, consts, cfg.grid));
        }
        rs.push_back(check_boundary_monotone(extract_boundary(v_fine, kLimitLevel)));
        rs.push_back(check_boundary_epsilon_order(fbs));
        report(10, "free boundary monotone, contained and ordered", all_passed(rs),
               "worst=" + num(worst_of(rs)) + failed_tags(rs));
    }

    // 11
    {
        auto policy = extract_policy(runs.back().v, extract_boundary(v_fine, kLimitLevel), p);
        SimRequest base;
        base.n_paths = kPolicyPaths;
        base.n_steps = cfg.sim.steps;
        base.seed = cfg.sim.seed;
        bool ok = true;
        std::string detail;
        for (const auto& [x0, s0] : cfg.sim.points) {
            SimRequest req = base;
            req.x0 = x0;
            req.s0 = s0;
            const ValueCheck c = verify_value(simulate_paths(*policy, req, p), phi, p, cfg.sim.rel_tol);
            ok = ok && c.verdict == Verdict::pass;
            detail += "(" + num(x0) + "," + num(s0) + ") mc=" + num(c.mean_cost) + " Phi=" + num(c.phi) +
                      " " + to_string(c.verdict) + "; ";
        }
        std::vector<std::shared_ptr<const Strategy>> alts{std::make_shared<ZeroStrategy>()};
        for (double a : cfg.sim.constant_rates) {
            alts.push_back(std::make_shared<ConstantRateStrategy>(a));
        }
        const auto rows = strategy_dominance({{1.0, 1.0}}, *policy, alts, base, p);
        for (const DominanceEntry& e : rows.front().alternatives) {
            ok = ok && e.dominated;
            detail += e.strategy + " separation=" + num(e.separation) + " ";
        }
        report(11, "policy verification and dominance", ok, detail);
    }

    // 12
    {
        struct Sweep {
            const char* name;
            const std::vector<double>* values;
            int sign;
        };
        const FigureSettings& f = cfg.figures;
        const Sweep sweeps[] = {{"m", &f.sweep_m, 1}, {"nu", &f.sweep_nu, 1}, {"mu", &f.sweep_mu, 1},
                                {"sigma", &f.sweep_sigma, -1}};
        bool ok = true;
        std::string detail;
        for (const Sweep& s : sweeps) {
            const auto points = parameter_sweep(cfg, s.name, *s.values);
            const bool mono = strictly_monotone(points, s.sign);
            ok = ok && mono;
            detail += std::string(s.name) + (s.sign > 0 ? " increasing " : " decreasing ") +
                      (mono ? "yes" : "no") + " [" + num(points.front().phi) + ".." + num(points.back().phi) + "]; ";
        }
        report(12, "sensitivity signs", ok, detail);
    }

    // 13
    {
        std::ostringstream sink;
        std::vector<fs::path> dirs{work / "run_a", work / "run_b"};
        for (const fs::path& dir : dirs) {
            RunConfig c = cfg;
            c.output_dir = dir.string();
            (void)cmd_solve(c, sink);
            (void)cmd_figures(c, sink);
            (void)cmd_simulate(c, sink);
        }
        std::size_t compared = 0;
        std::size_t differing = 0;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const fs::path twin = dirs[1] / entry.path().filename();
            ++compared;
            if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
                ++differing;
            }
        }
        report(13, "determinism", compared > 0 && differing == 0,
               std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ");
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << " in " << num(std::round(seconds)) << " s" << std::endl;
    return failures == 0 ? 0 : 1;
}
