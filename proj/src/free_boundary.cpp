#include "carbon/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/surface_io.hpp"

namespace carbon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowTol = 1e-8;

}  // namespace

const char* to_string(BoundaryFlag flag) {
    switch (flag) {
        case BoundaryFlag::inside: return "inside";
        case BoundaryFlag::right_exit: return "right_exit";
        case BoundaryFlag::left_exit: return "left_exit";
    }
    return "?";
}

BoundaryFlag FreeBoundary::flag(std::size_t k, std::size_t j) const {
    const double x = at(k, j);
    if (x == kInf) {
        return BoundaryFlag::right_exit;
    }
    if (x == -kInf) {
        return BoundaryFlag::left_exit;
    }
    return BoundaryFlag::inside;
}

FreeBoundary extract_boundary(const ValueSurface& v, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::ValidationError, "boundary level must lie in (0, 1)");
    }
    const Grid& g = v.grid();
    FreeBoundary fb;
    fb.y_nodes = g.y_nodes;
    fb.T = g.spec.T;
    fb.dx = g.dx;
    fb.epsilon = v.epsilon();
    fb.level = level;
    for (std::size_t k = 0; k < v.slice_count(); ++k) {
        fb.steps.push_back(v.step(k));
        fb.t_nodes.push_back(v.time(k));
        for (std::size_t j = 0; j < g.ny(); ++j) {
            for (std::size_t i = 1; i < g.nx(); ++i) {
                if (v.at(k, i, j) < v.at(k, i - 1, j) - kRowTol) {
                    std::ostringstream msg;
                    msg << "v decreases at x=" << g.x_nodes[i] << " y=" << g.y_nodes[j]
                        << " t=" << v.time(k);
                    throw Error(ErrorCode::NonmonotoneRow, msg.str());
                }
            }
            double x = kInf;
            if (v.at(k, 0, j) >= level) {
                x = -kInf;
            } else {
                for (std::size_t i = 1; i < g.nx(); ++i) {
                    const double hi = v.at(k, i, j);
                    if (hi >= level) {
                        const double lo = v.at(k, i - 1, j);
                        x = g.x_nodes[i - 1] + g.dx * (level - lo) / (hi - lo);
                        break;
                    }
                }
            }
            fb.x_of.push_back(x);
        }
    }
    return fb;
}

double boundary_lower_bound(double t, double eps, const ModelParams& p) {
    return -(0.5 * p.nu * p.nu + p.excess_drift()) * t - eps + std::log(1.0 - eps);
}

double boundary_upper_bound(double y, double t, const BoundConstants& consts) {
    return boundary_containment_limit(y, t, consts);
}

BoundsReport check_boundary_bounds(const FreeBoundary& fb, const ModelParams& p,
                                   const BoundConstants& consts, double x_min, double x_max) {
    BoundsReport report;
    for (std::size_t k = 0; k < fb.t_nodes.size(); ++k) {
        const double t = fb.t_nodes[k];
        const double lower = boundary_lower_bound(t, fb.epsilon, p);
        for (std::size_t j = 0; j < fb.ny(); ++j) {
            const double upper = boundary_upper_bound(fb.y_nodes[j], t, consts);
            const double x = fb.at(k, j);
            ++report.checked;
            switch (fb.flag(k, j)) {
                case BoundaryFlag::right_exit:
                    report.upper_violations += upper < x_max ? 1 : 0;
                    break;
                case BoundaryFlag::left_exit:
                    report.lower_violations += lower > x_min ? 1 : 0;
                    break;
                case BoundaryFlag::inside:
                    report.lower_violations += x < lower ? 1 : 0;
                    report.upper_violations += x > upper ? 1 : 0;
                    break;
            }
        }
    }
    return report;
}

MonotonicityReport monotonicity_in_y(const FreeBoundary& fb) {
    MonotonicityReport report;
    report.tolerance = 1e-6 * fb.dx;
    for (std::size_t k = 0; k < fb.t_nodes.size(); ++k) {
        for (std::size_t j = 0; j + 1 < fb.ny(); ++j) {
            const double a = fb.at(k, j);
            const double b = fb.at(k, j + 1);
            if (std::isinf(a) && a == b) {
                continue;
            }
            const double inc = b - a;
            if (inc < report.worst_increment) {
                report.worst_increment = inc;
                report.worst_step = fb.steps[k];
                report.worst_y = fb.y_nodes[j];
            }
        }
    }
    return report;
}

EpsilonOrderReport epsilon_monotonicity(const std::vector<FreeBoundary>& fbs) {
    EpsilonOrderReport report;
    if (fbs.empty()) {
        return report;
    }
    report.tolerance = fbs.front().dx;
    for (std::size_t p = 0; p + 1 < fbs.size(); ++p) {
        const FreeBoundary& coarse = fbs[p];
        const FreeBoundary& fine = fbs[p + 1];
        if (coarse.y_nodes != fine.y_nodes || coarse.steps != fine.steps) {
            throw Error(ErrorCode::GridMismatch, "boundaries do not share (y, t) nodes");
        }
        for (std::size_t k = 0; k < coarse.t_nodes.size(); ++k) {
            for (std::size_t j = 0; j < coarse.ny(); ++j) {
                const double a = coarse.at(k, j);
                const double b = fine.at(k, j);
                if (std::isinf(a) && a == b) {
                    continue;
                }
                const double diff = b - a;
                if (diff < report.worst_shortfall) {
                    report.worst_shortfall = diff;
                    report.worst_pair = p;
                    report.worst_step = coarse.steps[k];
                    report.worst_y = coarse.y_nodes[j];
                }
            }
        }
    }
    return report;
}

void write_boundary_csv(std::ostream& out, const FreeBoundary& fb, const std::string& comment) {
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << "y,s,t,theta,x_boundary,flag\n";
    for (std::size_t k = 0; k < fb.t_nodes.size(); ++k) {
        const double t = fb.t_nodes[k];
        for (std::size_t j = 0; j < fb.ny(); ++j) {
            const double y = fb.y_nodes[j];
            out << format_double(y) << ',' << format_double(std::exp(y)) << ',' << format_double(t)
                << ',' << format_double(fb.T - t) << ',' << format_double(fb.at(k, j)) << ','
                << to_string(fb.flag(k, j)) << '\n';
        }
    }
}

}  // namespace carbon
