#include <cmath>

#include "carbon/error.hpp"
#include "carbon/obstacle_solver.hpp"
#include "carbon/penalty_solver.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace carbon;

namespace {

std::shared_ptr<const Grid> grid_of(double x_min, double x_max, std::size_t nx, double y_min,
                                    double y_max, std::size_t ny, std::size_t nt) {
    GridSpec s{x_min, x_max, y_min, y_max, nx, ny, nt, 1.0};
    return std::make_shared<const Grid>(build_grid(s));
}

}  // namespace

TEST_SUITE("obstacle_solver") {

TEST_CASE("gradient projection examples") {
    std::vector<double> a{0.0, 1.0, 5.0};
    gradient_project(a, 1.0);
    CHECK(a == std::vector<double>{0.0, 1.0, 2.0});

    std::vector<double> b{0.0, 0.05, 0.3, 0.31, 0.2};
    gradient_project(b, 0.1);
    CHECK(b[1] == 0.05);
    CHECK(b[2] == doctest::Approx(0.15));
    CHECK(b[3] == doctest::Approx(0.25));
    CHECK(b[4] == 0.2);

    std::vector<double> flat{1.0};
    gradient_project(flat, 0.5);
    CHECK(flat[0] == 1.0);
}

TEST_CASE("gradient projection property: slopes capped, values never raised, idempotent") {
    oracle::Gen gen(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + gen.index(30);
        const double dx = gen.uniform(0.01, 1.0);
        std::vector<double> row(n);
        for (double& r : row) {
            r = gen.uniform(-3.0, 3.0);
        }
        std::vector<double> out = row;
        gradient_project(out, dx);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(out[i] <= row[i]);
            if (i > 0) {
                CHECK(out[i] - out[i - 1] <= dx + 1e-12);
            }
        }
        std::vector<double> again = out;
        gradient_project(again, dx);
        CHECK(again == out);
    }
}

TEST_CASE("trapezoid integration is exact for piecewise linear v") {
    auto g = grid_of(-1.0, 1.0, 21, -0.5, 0.5, 3, 2);
    ValueSurface v(g, SurfaceKind::v);
    std::vector<double> values(g->nodes_per_slice());
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < 21; ++i) {
            values[g->index(i, j)] = 0.5 * (g->x_nodes[i] + 1.0);
        }
    }
    v.push_slice(0, values);
    const ValueSurface u = integrate_v_to_u(v);
    for (std::size_t i = 0; i < 21; ++i) {
        const double x = g->x_nodes[i];
        CHECK(u.at(0, i, 1) == doctest::Approx(0.25 * (x + 1.0) * (x + 1.0)).epsilon(1e-13).scale(1.0));
    }
    CHECK(u.kind() == SurfaceKind::u);

    values[g->index(0, 2)] = 0.5;
    ValueSurface bad(g, SurfaceKind::v);
    bad.push_slice(0, values);
    CHECK_THROWS_AS(integrate_v_to_u(bad), Error);
}

TEST_CASE("projected u on a small grid") {
    const ModelParams p = validate_params(RawParams{});
    auto g = grid_of(-2.0, 3.0, 51, -1.0, 1.0, 11, 40);
    const ValueSurface u = solve_u_projected(g, p, 10);
    CHECK(u.steps() == std::vector<std::size_t>{0, 10, 20, 30, 40});
    for (std::size_t i = 0; i < g->nx(); ++i) {
        CHECK(u.at(0, i, 5) == std::max(g->x_nodes[i], 0.0));
    }
    for (std::size_t k = 0; k < u.slice_count(); ++k) {
        for (std::size_t j = 0; j < g->ny(); ++j) {
            CHECK(u.at(k, 0, j) == 0.0);
            for (std::size_t i = 1; i < g->nx(); ++i) {
                const double slope = (u.at(k, i, j) - u.at(k, i - 1, j)) / g->dx;
                CHECK(slope >= -1e-12);
                CHECK(slope <= 1.0 + 1e-12);
                if (j + 1 < g->ny()) {
                    // u nonincreasing in y, s u nondecreasing in s.
                    CHECK(u.at(k, i, j + 1) <= u.at(k, i, j) + 1e-12);
                    CHECK(std::exp(g->dy) * u.at(k, i, j + 1) >= u.at(k, i, j) - 1e-12);
                }
            }
        }
    }
    // Abatement lowers the cost below the never-abate value.
    const double zero = zero_strategy_cost(1.0, 1.0, 1.0, p);
    CHECK(interpolate(u, 1.0, 0.0, 1.0).value < zero);
    CHECK_THROWS_AS(solve_u_projected(g, p, 0), Error);
}

TEST_CASE("phi is s times u") {
    const ModelParams p = validate_params(RawParams{});
    auto g = grid_of(-2.0, 3.0, 26, -1.0, 1.0, 5, 8);
    const ValueSurface u = solve_u_projected(g, p, 4);
    const ValueSurface phi = phi_from_u(u);
    CHECK(phi.kind() == SurfaceKind::phi);
    for (std::size_t k = 0; k < u.slice_count(); ++k) {
        for (std::size_t j = 0; j < g->ny(); ++j) {
            for (std::size_t i = 0; i < g->nx(); ++i) {
                CHECK(phi.at(k, i, j) == doctest::Approx(std::exp(g->y_nodes[j]) * u.at(k, i, j)));
            }
        }
    }
}

TEST_CASE("the two routes agree on a small grid") {
    const ModelParams p = validate_params(RawParams{});
    auto g = grid_of(-3.0, 4.0, 71, -1.0, 1.0, 11, 80);
    SolverConfig cfg;
    cfg.store_every = 8;
    const ValueSurface v = solve_penalized(0.01, g, p, cfg);
    const ValueSurface u = solve_u_projected(g, p, 8);
    const CrossCheckReport r = cross_validate(v, u, p);
    CHECK(r.slices.size() == 10);
    CHECK(r.final_gradient_gap < 0.05);
    CHECK(r.final_phi_gap < 0.05);
    CHECK(r.max_gradient_gap >= r.final_gradient_gap);
    CHECK(r.full_box_gradient_gap >= r.max_gradient_gap);

    const std::string text = format_cross_check(r);
    CHECK(text.find("max_gradient_gap=") != std::string::npos);
    CHECK(text.find("slice step=8 t=0.1 ") != std::string::npos);

    auto other = grid_of(-3.0, 4.0, 36, -1.0, 1.0, 11, 80);
    const ValueSurface u2 = solve_u_projected(other, p, 8);
    CHECK_THROWS_AS(cross_validate(v, u2, p), Error);
}

}
