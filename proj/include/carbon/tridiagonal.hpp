#pragma once

#include <cstddef>
#include <span>

namespace carbon {

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]`
/// are ignored. The solution overwrites `rhs`; `scratch` needs n entries.
/// Assumes diagonal dominance (no pivoting).
inline void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<double> rhs,
                              std::span<double> scratch) {
    const std::size_t n = diag.size();
    double denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t k = 1; k < n; ++k) {
        denom = diag[k] - lower[k] * scratch[k - 1];
        scratch[k] = upper[k] / denom;
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / denom;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        rhs[k] -= scratch[k] * rhs[k + 1];
    }
}

}  // namespace carbon
