#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carbon/commands.hpp"
#include "doctest.h"

using namespace carbon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("carbon_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

RunConfig small_config(const fs::path& dir, const std::string& extra = "") {
    return parse_config("grid.x_min = -3\ngrid.x_max = 4\ngrid.nx = 71\n"
                        "grid.y_min = -1\ngrid.y_max = 1\ngrid.ny = 11\ngrid.nt = 80\n"
                        "solver.eps = 0.1,0.01\nsolver.store_every = 4\noutput.slice_every = 8\n"
                        "check.t_small = 0.05\ncheck.y_band = 0.5\n"
                        "sim.paths = 2000\nsim.zero_paths = 2000\nsim.steps = 40\n"
                        "sim.points = 1:1\nsim.constant_rates = 2\n"
                        "output.dir = " + dir.string() + "\n" + extra);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("exit codes and file names") {
    CHECK(exit_code_for(ErrorCode::MuNotGreaterThanR) == kExitConfigError);
    CHECK(exit_code_for(ErrorCode::ParseError) == kExitConfigError);
    CHECK(exit_code_for(ErrorCode::MissingArtifacts) == kExitConfigError);
    CHECK(exit_code_for(ErrorCode::NewtonDiverged) == kExitSolverFailed);
    CHECK(v_file_name(0.01) == "v_eps0.01.csv");
    CHECK(v_file_name(0.1) == "v_eps0.1.csv");
}

TEST_CASE("a tiny solve is quick and writes every table") {
    const fs::path dir = scratch("tiny");
    const RunConfig cfg = parse_config("grid.nx = 3\ngrid.ny = 3\ngrid.nt = 2\ncheck.t_small = 0.5\n"
                                       "output.dir = " + dir.string() + "\n");
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    CHECK(cmd_solve(cfg, log) == kExitOk);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
    for (const char* name : {"v_eps0.1.csv", "v_eps0.05.csv", "v_eps0.01.csv", "u.csv", "phi.csv",
                             "boundary.csv", "crosscheck.txt"}) {
        CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    fs::remove_all(dir);
}

TEST_CASE("commands on an empty directory report missing artifacts") {
    const fs::path dir = scratch("empty");
    const RunConfig cfg = small_config(dir);
    std::ostringstream out;
    try {
        (void)cmd_check(cfg, out);
        FAIL("expected MissingArtifacts");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingArtifacts);
    }
}

TEST_CASE("artifacts from another solve are rejected") {
    const fs::path dir = scratch("stale");
    std::ostringstream log;
    REQUIRE(cmd_solve(small_config(dir), log) == kExitOk);
    const RunConfig reseeded = small_config(dir, "sim.seed = 5\n");
    CHECK_NOTHROW(load_artifacts(reseeded));
    const RunConfig other = small_config(dir, "m = 0.4\n");
    CHECK_THROWS_AS(load_artifacts(other), Error);
    fs::remove_all(dir);
}

TEST_CASE("check passes on a clean solve and fails on an injected fault") {
    const fs::path dir = scratch("check");
    const RunConfig cfg = small_config(dir);
    std::ostringstream log;
    REQUIRE(cmd_solve(cfg, log) == kExitOk);
    std::ostringstream out;
    const int code = cmd_check(cfg, out);
    INFO(out.str());
    CHECK(code == kExitOk);
    CHECK(out.str().find("all hard checks passed") != std::string::npos);

    SolveArtifacts a = load_artifacts(cfg);
    auto broken = std::make_shared<ValueSurface>(*a.v.back());
    // Raise the right edge so rows stay monotone and only the range check trips.
    broken->slice(1)[a.grid->index(70, 5)] = 2.0;
    a.v.back() = broken;
    write_artifacts(a, cfg);
    std::ostringstream bad;
    CHECK(cmd_check(cfg, bad) == kExitCheckFailed);
    CHECK(bad.str().find("FAIL penalized-range [hard]") != std::string::npos);
    CHECK(bad.str().find("hard check failure") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("simulate with too few paths is inconclusive") {
    const fs::path dir = scratch("few");
    const RunConfig cfg = small_config(dir, "sim.paths = 10\n");
    std::ostringstream log;
    REQUIRE(cmd_solve(cfg, log) == kExitOk);
    std::ostringstream out;
    CHECK(cmd_simulate(cfg, out) == kExitCheckFailed);
    CHECK(out.str().find("INCONCLUSIVE") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across directories") {
    const fs::path one = scratch("det_a");
    const fs::path two = scratch("det_b");
    for (const fs::path& dir : {one, two}) {
        const RunConfig cfg = small_config(dir);
        std::ostringstream log;
        REQUIRE(cmd_solve(cfg, log) == kExitOk);
        std::ostringstream out;
        (void)cmd_simulate(cfg, out);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(one)) {
        const fs::path twin = two / entry.path().filename();
        REQUIRE(fs::exists(twin));
        CHECK_MESSAGE(slurp(entry.path()) == slurp(twin), entry.path().filename().string());
        ++compared;
    }
    CHECK(compared >= 8);
    fs::remove_all(one);
    fs::remove_all(two);
}

TEST_CASE("sweep monotonicity helper") {
    CHECK(strictly_monotone({{1, 0.1}, {2, 0.2}, {3, 0.3}}, 1));
    CHECK_FALSE(strictly_monotone({{1, 0.1}, {2, 0.1}}, 1));
    CHECK(strictly_monotone({{1, 0.3}, {2, 0.2}}, -1));
    RunConfig cfg = small_config(scratch("sweep"));
    CHECK_THROWS_AS(parameter_sweep(cfg, "r", {0.01}), Error);
}

}
