// carbonctl: solve, check, plot data and simulate the emission-reduction
// control problem from one key=value config file.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "carbon/commands.hpp"
#include "carbon/config.hpp"
#include "carbon/error.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw carbon::Error(carbon::ErrorCode::ParseError, "cannot read config " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalty and projected solvers for the emission-reduction control problem"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> eps;
    app.add_option("--config", config_path, "key=value config file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory, overrides output.dir");
    app.add_option("--seed", seed, "Monte Carlo seed, overrides sim.seed");
    app.add_option("--eps", eps, "comma-separated decreasing penalty schedule, overrides solver.eps");

    auto* solve = app.add_subcommand("solve", "solve for v per eps, u and Phi; write surfaces");
    auto* check = app.add_subcommand("check", "run the invariant suite on written surfaces");
    auto* figures = app.add_subcommand("figures", "write figure data and parameter sweeps");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo verification of the policy");
    for (auto* sub : {solve, check, figures, simulate}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : carbon::kExitConfigError;
    }

    carbon::RunConfig cfg;
    try {
        cfg = carbon::parse_config(config_path.empty() ? std::string() : read_file(config_path));
        if (out_dir) {
            carbon::apply_setting(cfg, "output.dir", *out_dir);
        }
        if (seed) {
            carbon::apply_setting(cfg, "sim.seed", std::to_string(*seed));
        }
        if (eps) {
            carbon::apply_setting(cfg, "solver.eps", *eps);
        }
        carbon::validate_run_config(cfg);
    } catch (const carbon::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return carbon::kExitConfigError;
    }

    try {
        if (solve->parsed()) {
            return carbon::cmd_solve(cfg, std::cout);
        }
        if (check->parsed()) {
            return carbon::cmd_check(cfg, std::cout);
        }
        if (figures->parsed()) {
            return carbon::cmd_figures(cfg, std::cout);
        }
        return carbon::cmd_simulate(cfg, std::cout);
    } catch (const carbon::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return carbon::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return carbon::kExitSolverFailed;
    }
}
