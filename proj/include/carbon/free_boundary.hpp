#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "carbon/grid.hpp"
#include "carbon/model.hpp"

namespace carbon {

enum class BoundaryFlag { inside, right_exit, left_exit };

const char* to_string(BoundaryFlag flag);

/// Location x(y, t) where v crosses `level`, one entry per y node and stored
/// time level. Rows that never reach the level hold +infinity (right exit),
/// rows already above it hold -infinity (left exit).
struct FreeBoundary {
    std::vector<double> y_nodes;
    std::vector<double> t_nodes;
    std::vector<std::size_t> steps;
    double T = 0.0;
    double dx = 0.0;
    double epsilon = 0.0;
    double level = 0.0;
    std::vector<double> x_of;  // index k * y_nodes.size() + j

    std::size_t ny() const { return y_nodes.size(); }
    double at(std::size_t k, std::size_t j) const { return x_of[k * y_nodes.size() + j]; }
    BoundaryFlag flag(std::size_t k, std::size_t j) const;
};

/// Linear inverse interpolation of each x-row. Throws NonmonotoneRow when a
/// row decreases by more than 1e-8, ValidationError unless 0 < level < 1.
FreeBoundary extract_boundary(const ValueSurface& v, double level);

/// Level used for a penalty surface at eps, and for reading the limiting
/// boundary off the finest penalty surface.
inline double penalty_level(double eps) { return 1.0 - eps; }
inline constexpr double kLimitLevel = 1.0 - 1e-6;

struct BoundsReport {
    std::size_t checked = 0;
    std::size_t lower_violations = 0;
    std::size_t upper_violations = 0;

    double violation_fraction() const {
        return checked == 0 ? 0.0
                            : static_cast<double>(lower_violations + upper_violations) /
                                  static_cast<double>(checked);
    }
};

/// -(nu^2/2 + mu - r) t - eps + log(1 - eps) <= x(y, t) <= 3(a + e^y)/delta e^{kappa t}.
double boundary_lower_bound(double t, double eps, const ModelParams& params);
double boundary_upper_bound(double y, double t, const BoundConstants& consts);

/// Counts points outside the two-sided bound, using fb.epsilon. An exit
/// through a box face counts as a violation only if the bound on that side
/// lies inside the box.
BoundsReport check_boundary_bounds(const FreeBoundary& fb, const ModelParams& params,
                                   const BoundConstants& consts, double x_min, double x_max);

struct MonotonicityReport {
    double worst_increment = 0.0;  // most negative x(y_{j+1}) - x(y_j), 0 if none
    std::size_t worst_step = 0;
    double worst_y = 0.0;
    double tolerance = 0.0;

    bool passed() const { return worst_increment >= -tolerance; }
};

/// Increments between neighboring y nodes; pairs where both points exit on
/// the same side are skipped. Tolerance 1e-6 dx.
MonotonicityReport monotonicity_in_y(const FreeBoundary& fb);

struct EpsilonOrderReport {
    double worst_shortfall = 0.0;  // most negative x^{finer} - x^{coarser}, 0 if none
    std::size_t worst_pair = 0;    // index of the coarser boundary
    std::size_t worst_step = 0;
    double worst_y = 0.0;
    double tolerance = 0.0;

    bool passed() const { return worst_shortfall >= -tolerance; }
};

/// Boundaries ordered by decreasing epsilon must move right (tolerance dx).
/// Throws GridMismatch when they do not share (y, t) nodes.
EpsilonOrderReport epsilon_monotonicity(const std::vector<FreeBoundary>& by_decreasing_eps);

/// Columns y,s,t,theta,x_boundary,flag.
void write_boundary_csv(std::ostream& out, const FreeBoundary& fb, const std::string& comment);

}  // namespace carbon
