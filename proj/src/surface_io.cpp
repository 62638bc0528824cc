#include "carbon/surface_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "carbon/error.hpp"

namespace carbon {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

void write_surface_csv(std::ostream& out, const ValueSurface& surface, const std::string& comment,
                       const std::function<bool(std::size_t)>& keep_slice) {
    const Grid& g = surface.grid();
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << "x,y,t,value\n";
    for (std::size_t k = 0; k < surface.slice_count(); ++k) {
        if (keep_slice && !keep_slice(k)) {
            continue;
        }
        const std::string t = format_double(surface.time(k));
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const std::string y = format_double(g.y_nodes[j]);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                out << format_double(g.x_nodes[i]) << ',' << y << ',' << t << ','
                    << format_double(surface.at(k, i, j)) << '\n';
            }
        }
    }
}

namespace {

std::size_t snap(double q, double lo, double h, std::size_t count, const char* axis,
                 std::size_t line) {
    const double pos = (q - lo) / h;
    const double k = std::round(pos);
    if (k < 0.0 || k >= static_cast<double>(count) || std::abs(pos - k) > 1e-6) {
        std::ostringstream msg;
        msg << "line " << line << ": " << axis << "=" << q << " is not a grid node";
        throw Error(ErrorCode::GridMismatch, msg.str());
    }
    return static_cast<std::size_t>(k);
}

}  // namespace

ValueSurface read_surface_csv(std::istream& in, std::shared_ptr<const Grid> grid,
                              SurfaceKind kind) {
    const Grid& g = *grid;
    std::map<std::size_t, std::vector<double>> slices;
    std::map<std::size_t, std::size_t> filled;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line != "x,y,t,value") {
                throw Error(ErrorCode::ParseError, "unexpected surface header: " + line);
            }
            continue;
        }
        double x, y, t, value;
        char c1, c2, c3;
        std::istringstream row(line);
        if (!(row >> x >> c1 >> y >> c2 >> t >> c3 >> value) || c1 != ',' || c2 != ',' || c3 != ',') {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad row");
        }
        const std::size_t i = snap(x, g.spec.x_min, g.dx, g.nx(), "x", line_no);
        const std::size_t j = snap(y, g.spec.y_min, g.dy, g.ny(), "y", line_no);
        const std::size_t n = snap(t, 0.0, g.dt, g.nt() + 1, "t", line_no);
        auto [it, inserted] = slices.try_emplace(n, std::vector<double>(g.nodes_per_slice(), NAN));
        it->second[g.index(i, j)] = value;
        ++filled[n];
    }
    ValueSurface surface(std::move(grid), kind);
    for (auto& [step, values] : slices) {
        if (filled[step] != surface.grid().nodes_per_slice()) {
            throw Error(ErrorCode::GridMismatch,
                        "slice at step " + std::to_string(step) + " is incomplete");
        }
        surface.push_slice(step, std::move(values));
    }
    return surface;
}

}  // namespace carbon
