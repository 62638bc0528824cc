#include "carbon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carbon/error.hpp"

namespace carbon {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> nodes(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        nodes[k] = lo + h * static_cast<double>(k);
    }
    nodes.back() = hi;
    return nodes;
}

// Locates the cell [nodes[k], nodes[k+1]] holding q (already clamped) and
// the weight of the right node.
std::pair<std::size_t, double> bracket(const std::vector<double>& nodes, double lo, double h,
                                       double q) {
    if (nodes.size() == 1) {
        return {0, 0.0};
    }
    const double pos = (q - lo) / h;
    auto k = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0,
                                                 static_cast<double>(nodes.size() - 2)));
    return {k, std::clamp(pos - static_cast<double>(k), 0.0, 1.0)};
}

}  // namespace

bool Grid::same_mesh(const Grid& other) const {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); };
    return spec.nx == other.spec.nx && spec.ny == other.spec.ny && spec.nt == other.spec.nt &&
           close(spec.x_min, other.spec.x_min) && close(spec.x_max, other.spec.x_max) &&
           close(spec.y_min, other.spec.y_min) && close(spec.y_max, other.spec.y_max) &&
           close(spec.T, other.spec.T);
}

double boundary_containment_limit(double y, double t, const BoundConstants& consts) {
    return 3.0 * (consts.a_const + std::exp(y)) / consts.delta * std::exp(consts.kappa * t);
}

Grid build_grid(const GridSpec& spec, const std::optional<BoundConstants>& consts) {
    std::ostringstream why;
    if (!(spec.x_min < 0.0 && 0.0 < spec.x_max)) {
        why << "need x_min < 0 < x_max";
    } else if (!(spec.y_min < spec.y_max)) {
        why << "need y_min < y_max";
    } else if (spec.nx < 3 || spec.ny < 3) {
        why << "need at least 3 nodes per spatial axis";
    } else if (spec.nt < 1) {
        why << "need at least one time step";
    } else if (!(spec.T > 0.0)) {
        why << "need T > 0";
    }
    if (!why.str().empty()) {
        throw Error(ErrorCode::InvalidSpec, why.str());
    }

    Grid grid;
    grid.spec = spec;
    grid.x_nodes = linspace(spec.x_min, spec.x_max, spec.nx);
    grid.y_nodes = linspace(spec.y_min, spec.y_max, spec.ny);
    grid.t_nodes = linspace(0.0, spec.T, spec.nt + 1);
    grid.dx = (spec.x_max - spec.x_min) / static_cast<double>(spec.nx - 1);
    grid.dy = (spec.y_max - spec.y_min) / static_cast<double>(spec.ny - 1);
    grid.dt = spec.T / static_cast<double>(spec.nt);

    if (consts) {
        const double needed = boundary_containment_limit(spec.y_max, spec.T, *consts);
        if (spec.x_max < needed) {
            std::ostringstream msg;
            msg << "x_max=" << spec.x_max << " is below the free-boundary containment bound "
                << needed << " at y_max; the boundary may leave the box";
            grid.warnings.push_back(msg.str());
        }
    }
    return grid;
}

const char* to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::v: return "v";
        case SurfaceKind::u: return "u";
        case SurfaceKind::phi: return "phi";
    }
    return "?";
}

ValueSurface::ValueSurface(std::shared_ptr<const Grid> grid, SurfaceKind kind)
    : grid_(std::move(grid)), kind_(kind) {}

void ValueSurface::push_slice(std::size_t step, std::vector<double> values) {
    if (values.size() != grid_->nodes_per_slice()) {
        throw Error(ErrorCode::GridMismatch, "slice size does not match the grid");
    }
    if (step > grid_->nt() || (!steps_.empty() && step <= steps_.back())) {
        throw Error(ErrorCode::InvalidSpec, "slice steps must increase within the time grid");
    }
    steps_.push_back(step);
    slices_.push_back(std::move(values));
}

std::optional<std::size_t> ValueSurface::find_time(double t) const {
    for (std::size_t k = 0; k < steps_.size(); ++k) {
        if (std::abs(time(k) - t) <= 1e-9) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> ValueSurface::find_step(std::size_t step) const {
    auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
    if (it == steps_.end() || *it != step) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - steps_.begin());
}

Interpolated interpolate(const ValueSurface& surface, double x, double y, double t) {
    if (surface.empty()) {
        throw Error(ErrorCode::EmptySurface, "cannot interpolate a surface with no slices");
    }
    const Grid& g = surface.grid();
    const GridSpec& s = g.spec;
    bool clamped = false;
    auto clamp_axis = [&clamped](double q, double lo, double hi) {
        if (q < lo || q > hi) {
            clamped = true;
        }
        return std::clamp(q, lo, hi);
    };

    if (surface.kind() == SurfaceKind::v && (x < s.x_min || x > s.x_max)) {
        return Interpolated{x < s.x_min ? 0.0 : 1.0, true};
    }
    const double xq = clamp_axis(x, s.x_min, s.x_max);
    const double yq = clamp_axis(y, s.y_min, s.y_max);
    const double t_lo = surface.time(0);
    const double t_hi = surface.time(surface.slice_count() - 1);
    const double tq = clamp_axis(t, t_lo, t_hi);

    const auto [i, wx] = bracket(g.x_nodes, s.x_min, g.dx, xq);
    const auto [j, wy] = bracket(g.y_nodes, s.y_min, g.dy, yq);

    // Stored slices need not be uniformly spaced.
    std::size_t k = 0;
    double wt = 0.0;
    if (surface.slice_count() > 1) {
        const auto& steps = surface.steps();
        auto later = std::upper_bound(steps.begin() + 1, steps.end() - 1, tq,
                                      [&g](double q, std::size_t st) { return q < g.t_nodes[st]; });
        k = static_cast<std::size_t>(later - steps.begin()) - 1;
        const double t0 = surface.time(k);
        const double t1 = surface.time(k + 1);
        wt = std::clamp((tq - t0) / (t1 - t0), 0.0, 1.0);
    }

    auto bilinear = [&](std::size_t slice) {
        const std::size_t i1 = std::min(i + 1, g.nx() - 1);
        const std::size_t j1 = std::min(j + 1, g.ny() - 1);
        const double lower = (1.0 - wx) * surface.at(slice, i, j) + wx * surface.at(slice, i1, j);
        const double upper = (1.0 - wx) * surface.at(slice, i, j1) + wx * surface.at(slice, i1, j1);
        return (1.0 - wy) * lower + wy * upper;
    };

    double value = bilinear(k);
    if (wt > 0.0) {
        value = (1.0 - wt) * value + wt * bilinear(k + 1);
    }
    return Interpolated{value, clamped};
}

}  // namespace carbon
