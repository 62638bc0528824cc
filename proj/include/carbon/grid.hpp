#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carbon/model.hpp"

namespace carbon {

/// Truncated box in transformed coordinates: surplus x, log-price y = log s,
/// and time-to-horizon t = T - theta.
struct GridSpec {
    double x_min = -3.0;
    double x_max = 6.0;
    double y_min = -2.0;
    double y_max = 2.0;
    std::size_t nx = 181;
    std::size_t ny = 81;
    std::size_t nt = 400;
    double T = 1.0;
};

struct Grid {
    GridSpec spec;
    double dx = 0.0;
    double dy = 0.0;
    double dt = 0.0;
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    std::vector<double> t_nodes;
    std::vector<std::string> warnings;

    std::size_t nx() const { return spec.nx; }
    std::size_t ny() const { return spec.ny; }
    std::size_t nt() const { return spec.nt; }
    std::size_t nodes_per_slice() const { return spec.nx * spec.ny; }
    /// Flat index of node (i, j); x varies fastest.
    std::size_t index(std::size_t i, std::size_t j) const { return j * spec.nx + i; }

    bool same_mesh(const Grid& other) const;
};

/// Builds the uniform mesh. When bound constants are given, records a warning
/// if x_max is below 3(a + e^{y_max})/delta * e^{kappa T}, the box that is
/// guaranteed to contain the free boundary.
Grid build_grid(const GridSpec& spec, const std::optional<BoundConstants>& consts = std::nullopt);

/// Largest x the free boundary can reach at log-price y and time t.
double boundary_containment_limit(double y, double t, const BoundConstants& consts);

struct PhysicalPoint {
    double x;
    double s;
    double theta;
};

struct TransformedPoint {
    double x;
    double y;
    double t;
};

/// (x, y, t) -> (x, s = e^y, theta = T - t).
inline PhysicalPoint to_physical(double x, double y, double t, double T) {
    return PhysicalPoint{x, std::exp(y), T - t};
}

inline TransformedPoint to_transformed(double x, double s, double theta, double T) {
    return TransformedPoint{x, std::log(s), T - theta};
}

enum class SurfaceKind { v, u, phi };

const char* to_string(SurfaceKind kind);

/// Node field stored on a subset of time levels. Slices are kept in
/// increasing time order; `steps[k]` is the time index of slice k.
class ValueSurface {
public:
    ValueSurface(std::shared_ptr<const Grid> grid, SurfaceKind kind);

    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    SurfaceKind kind() const { return kind_; }

    /// Penalty parameter for kind v; 0 when not applicable.
    double epsilon() const { return epsilon_; }
    void set_epsilon(double eps) { epsilon_ = eps; }

    std::size_t slice_count() const { return slices_.size(); }
    bool empty() const { return slices_.empty(); }
    std::size_t step(std::size_t k) const { return steps_[k]; }
    double time(std::size_t k) const { return grid_->t_nodes[steps_[k]]; }
    const std::vector<std::size_t>& steps() const { return steps_; }

    std::span<const double> slice(std::size_t k) const { return slices_[k]; }
    std::span<double> slice(std::size_t k) { return slices_[k]; }
    double at(std::size_t k, std::size_t i, std::size_t j) const {
        return slices_[k][grid_->index(i, j)];
    }

    /// Appends a slice at time index `step`; steps must increase.
    void push_slice(std::size_t step, std::vector<double> values);

    /// Slice whose time is within 1e-9 of t.
    std::optional<std::size_t> find_time(double t) const;
    std::optional<std::size_t> find_step(std::size_t step) const;

private:
    std::shared_ptr<const Grid> grid_;
    SurfaceKind kind_;
    double epsilon_ = 0.0;
    std::vector<std::size_t> steps_;
    std::vector<std::vector<double>> slices_;
};

struct Interpolated {
    double value;
    bool clamped;  // query was outside the box
};

/// Trilinear interpolation in (x, y, t). Out-of-box coordinates clamp to the
/// nearest face; for kind v, x beyond the box returns the asymptotic values
/// 0 (left) and 1 (right).
Interpolated interpolate(const ValueSurface& surface, double x, double y, double t);

}  // namespace carbon
