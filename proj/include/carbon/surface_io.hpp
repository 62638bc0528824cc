#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "carbon/grid.hpp"

namespace carbon {

/// 15 significant digits, the precision of every emitted table.
std::string format_double(double value);

/// Writes `# <comment>` (when non-empty), a header row `x,y,t,value`, then
/// one row per node of every stored slice accepted by `keep_slice`.
void write_surface_csv(std::ostream& out, const ValueSurface& surface, const std::string& comment,
                       const std::function<bool(std::size_t)>& keep_slice = {});

/// Reads a table produced by `write_surface_csv` back onto `grid`. Lines
/// starting with '#' are skipped. Every slice present must be complete.
ValueSurface read_surface_csv(std::istream& in, std::shared_ptr<const Grid> grid,
                              SurfaceKind kind);

}  // namespace carbon
