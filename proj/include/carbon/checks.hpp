#pragma once

#include <string>
#include <vector>

#include "carbon/free_boundary.hpp"
#include "carbon/grid.hpp"
#include "carbon/model.hpp"

namespace carbon {

/// Outcome of one structural check. `worst` is the largest violation found
/// (0 when none), except for fraction checks where it is the failing share.
struct CheckResult {
    std::string tag;
    std::string description;
    bool hard = true;
    double worst = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string where;
};

/// `PASS|FAIL <tag> [hard|diagnostic] worst=<w> tol=<t> <description> [at ...]`
std::string format_check(const CheckResult& result);

// Penalty surfaces.
CheckResult check_penalized_range(const ValueSurface& v);
CheckResult check_increasing_in_x(const ValueSurface& v);
CheckResult check_exponential_bound(const ValueSurface& v, const ModelParams& params);
CheckResult check_ramp_barrier(const ValueSurface& v, const ModelParams& params,
                               const BoundConstants& consts);
CheckResult check_penalty_activity(const ValueSurface& v, const ModelParams& params);
/// Surfaces ordered by decreasing epsilon: each lies below the previous one.
CheckResult check_epsilon_ordering(const std::vector<const ValueSurface*>& by_decreasing_eps);

// Projected u and Phi = s u.
CheckResult check_u_initial(const ValueSurface& u);
CheckResult check_u_slope(const ValueSurface& u);
CheckResult check_phi_terminal(const ValueSurface& phi);
CheckResult check_phi_x_gradient(const ValueSurface& phi, const ModelParams& params);
CheckResult check_phi_s_gradient(const ValueSurface& phi);
CheckResult check_phi_convexity(const ValueSurface& phi);
CheckResult check_phi_upper_bound(const ValueSurface& phi, const ModelParams& params);
CheckResult check_phi_below_zero_strategy(const ValueSurface& phi, const ModelParams& params);

// Free boundaries.
CheckResult check_boundary_monotone(const FreeBoundary& fb);
CheckResult check_boundary_containment(const FreeBoundary& fb, const ModelParams& params,
                                       const BoundConstants& consts, const GridSpec& grid);
CheckResult check_boundary_epsilon_order(const std::vector<FreeBoundary>& by_decreasing_eps);

struct SuiteInputs {
    std::vector<const ValueSurface*> v_by_decreasing_eps;
    const ValueSurface* u = nullptr;
    const ValueSurface* phi = nullptr;
    ModelParams params{};
    BoundConstants consts{};
};

/// Every check above on the given surfaces. Boundaries are extracted at
/// level 1 - eps from each penalty surface.
std::vector<CheckResult> run_invariant_suite(const SuiteInputs& inputs);

bool hard_checks_pass(const std::vector<CheckResult>& results);

}  // namespace carbon
