#include <cmath>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/grid.hpp"
#include "carbon/surface_io.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace carbon;

namespace {

std::shared_ptr<const Grid> small_grid(std::size_t nx = 7, std::size_t ny = 5, std::size_t nt = 4) {
    GridSpec s;
    s.x_min = -1.0;
    s.x_max = 2.0;
    s.y_min = -1.0;
    s.y_max = 1.0;
    s.nx = nx;
    s.ny = ny;
    s.nt = nt;
    return std::make_shared<const Grid>(build_grid(s));
}

ValueSurface filled(std::shared_ptr<const Grid> g, SurfaceKind kind,
                    double (*f)(double, double, double)) {
    ValueSurface surf(g, kind);
    for (std::size_t n = 0; n <= g->nt(); n += 2) {
        std::vector<double> values(g->nodes_per_slice());
        for (std::size_t j = 0; j < g->ny(); ++j) {
            for (std::size_t i = 0; i < g->nx(); ++i) {
                values[g->index(i, j)] = f(g->x_nodes[i], g->y_nodes[j], g->t_nodes[n]);
            }
        }
        surf.push_slice(n, std::move(values));
    }
    return surf;
}

double affine(double x, double y, double t) { return 0.3 + 2.0 * x - 0.7 * y + 1.5 * t; }

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("default mesh spacing") {
    const Grid g = build_grid(GridSpec{});
    CHECK(g.dx == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(g.dy == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(g.dt == doctest::Approx(0.0025).epsilon(1e-14));
    CHECK(g.x_nodes.size() == 181);
    CHECK(g.y_nodes.size() == 81);
    CHECK(g.t_nodes.size() == 401);
    CHECK(g.x_nodes.front() == -3.0);
    CHECK(g.x_nodes.back() == 6.0);
    CHECK(g.t_nodes.back() == 1.0);
    CHECK(g.index(3, 2) == 2 * 181 + 3);
    CHECK(g.warnings.empty());
}

TEST_CASE("containment warning") {
    const ModelParams p = validate_params(RawParams{});
    const Grid g = build_grid(GridSpec{}, make_bound_constants(p));
    REQUIRE(g.warnings.size() == 1);
    CHECK(g.warnings[0].find("x_max=6") != std::string::npos);
    const double limit = boundary_containment_limit(2.0, 1.0, make_bound_constants(p));
    CHECK(limit == doctest::Approx(3.0 * (1.0 + std::exp(2.0)) / p.delta * std::exp(10.18)).epsilon(1e-12));
}

TEST_CASE("invalid specs") {
    GridSpec s;
    s.x_min = 0.5;
    CHECK_THROWS_AS(build_grid(s), Error);
    s = GridSpec{};
    s.nx = 2;
    CHECK_THROWS_AS(build_grid(s), Error);
    s = GridSpec{};
    s.nt = 0;
    CHECK_THROWS_AS(build_grid(s), Error);
    s = GridSpec{};
    s.y_max = s.y_min;
    CHECK_THROWS_AS(build_grid(s), Error);
}

TEST_CASE("coordinate transforms round trip") {
    const PhysicalPoint ph = to_physical(0.4, std::log(2.5), 0.25, 1.0);
    CHECK(ph.s == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(ph.theta == doctest::Approx(0.75).epsilon(1e-15));
    const TransformedPoint tr = to_transformed(ph.x, ph.s, ph.theta, 1.0);
    CHECK(tr.y == doctest::Approx(std::log(2.5)).epsilon(1e-15));
    CHECK(tr.t == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("slices must increase and match the mesh") {
    auto g = small_grid();
    ValueSurface s(g, SurfaceKind::u);
    s.push_slice(0, std::vector<double>(g->nodes_per_slice(), 0.0));
    CHECK_THROWS_AS(s.push_slice(0, std::vector<double>(g->nodes_per_slice(), 0.0)), Error);
    CHECK_THROWS_AS(s.push_slice(1, std::vector<double>(3, 0.0)), Error);
    CHECK_THROWS_AS(s.push_slice(99, std::vector<double>(g->nodes_per_slice(), 0.0)), Error);
    s.push_slice(3, std::vector<double>(g->nodes_per_slice(), 1.0));
    CHECK(s.find_step(3) == std::optional<std::size_t>(1));
    CHECK(!s.find_step(2));
    CHECK(s.find_time(0.75) == std::optional<std::size_t>(1));
}

TEST_CASE("interpolation reproduces affine fields") {
    auto g = small_grid();
    const ValueSurface s = filled(g, SurfaceKind::u, affine);
    oracle::Gen gen(21);
    for (int n = 0; n < 500; ++n) {
        const double x = gen.uniform(-1.0, 2.0);
        const double y = gen.uniform(-1.0, 1.0);
        const double t = gen.uniform(0.0, 1.0);
        const Interpolated q = interpolate(s, x, y, t);
        CHECK(q.value == doctest::Approx(affine(x, y, t)).epsilon(1e-12));
        CHECK_FALSE(q.clamped);
    }
}

TEST_CASE("interpolation clamps outside the box") {
    auto g = small_grid();
    const ValueSurface u = filled(g, SurfaceKind::u, affine);
    const Interpolated q = interpolate(u, 5.0, 0.0, 0.5);
    CHECK(q.clamped);
    CHECK(q.value == doctest::Approx(affine(2.0, 0.0, 0.5)).epsilon(1e-12));

    const ValueSurface v = filled(g, SurfaceKind::v, affine);
    CHECK(interpolate(v, -7.0, 0.0, 0.5).value == 0.0);
    CHECK(interpolate(v, 7.0, 0.0, 0.5).value == 1.0);
    CHECK(interpolate(v, 7.0, 0.0, 0.5).clamped);

    ValueSurface empty(g, SurfaceKind::u);
    CHECK_THROWS_AS(interpolate(empty, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("surface tables round trip") {
    auto g = small_grid();
    const ValueSurface s = filled(g, SurfaceKind::phi, affine);
    std::ostringstream out;
    write_surface_csv(out, s, "config_hash=abc");
    const std::string text = out.str();
    CHECK(text.rfind("# config_hash=abc\nx,y,t,value\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);

    std::istringstream in(text);
    const ValueSurface back = read_surface_csv(in, g, SurfaceKind::phi);
    REQUIRE(back.slice_count() == s.slice_count());
    for (std::size_t k = 0; k < s.slice_count(); ++k) {
        CHECK(back.step(k) == s.step(k));
        for (std::size_t n = 0; n < g->nodes_per_slice(); ++n) {
            CHECK(back.slice(k)[n] == doctest::Approx(s.slice(k)[n]).epsilon(1e-14));
        }
    }

    std::ostringstream some;
    write_surface_csv(some, s, "", [&](std::size_t k) { return s.step(k) == 4; });
    std::istringstream some_in(some.str());
    const ValueSurface last = read_surface_csv(some_in, g, SurfaceKind::phi);
    REQUIRE(last.slice_count() == 1);
    CHECK(last.step(0) == 4);
}

TEST_CASE("surface tables reject foreign meshes and partial slices") {
    auto g = small_grid();
    std::istringstream off("x,y,t,value\n0.123,0,0,1\n");
    CHECK_THROWS_AS(read_surface_csv(off, g, SurfaceKind::u), Error);
    std::istringstream partial("x,y,t,value\n0.5,0,0,1\n");
    CHECK_THROWS_AS(read_surface_csv(partial, g, SurfaceKind::u), Error);
    std::istringstream header("a,b\n");
    CHECK_THROWS_AS(read_surface_csv(header, g, SurfaceKind::u), Error);
}

TEST_CASE("fifteen significant digits") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_double(-2.5e-12) == "-2.5e-12");
}

}
