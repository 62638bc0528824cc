#include "carbon/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "carbon/error.hpp"
#include "carbon/surface_io.hpp"

namespace carbon {

namespace {

struct BadValue {
    std::string why;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected a number, got '" + text + "'"};
    }
    return value;
}

std::uint64_t to_unsigned(const std::string& text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected a nonnegative integer, got '" + text + "'"};
    }
    return value;
}

// "default" leaves the constant to be derived from the model.
std::optional<double> to_optional(const std::string& text) {
    if (text == "default") {
        return std::nullopt;
    }
    return to_double(text);
}

bool to_bool(const std::string& text) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw BadValue{"expected true or false, got '" + text + "'"};
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

std::vector<double> to_list(const std::string& text) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) {
        values.push_back(to_double(part));
    }
    if (values.empty()) {
        throw BadValue{"expected a comma-separated list"};
    }
    return values;
}

std::vector<std::pair<double, double>> to_points(const std::string& text) {
    std::vector<std::pair<double, double>> points;
    for (const auto& part : split(text, ',')) {
        const auto xy = split(part, ':');
        if (xy.size() != 2) {
            throw BadValue{"expected points as x0:s0 pairs, got '" + part + "'"};
        }
        points.emplace_back(to_double(xy[0]), to_double(xy[1]));
    }
    if (points.empty()) {
        throw BadValue{"expected at least one point"};
    }
    return points;
}

std::string fmt(double v) { return format_double(v); }

std::string fmt_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        out += (k ? "," : "") + fmt(values[k]);
    }
    return out;
}

std::string fmt_points(const std::vector<std::pair<double, double>>& points) {
    std::string out;
    for (std::size_t k = 0; k < points.size(); ++k) {
        out += (k ? "," : "") + fmt(points[k].first) + ":" + fmt(points[k].second);
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_FIELD(member) \
    Field { [](RunConfig& c, const std::string& v) { c.member = to_double(v); }, \
            [](const RunConfig& c) { return fmt(c.member); } }
#define COUNT_FIELD(member) \
    Field { [](RunConfig& c, const std::string& v) { c.member = to_unsigned(v); }, \
            [](const RunConfig& c) { return std::to_string(c.member); } }
#define LIST_FIELD(member) \
    Field { [](RunConfig& c, const std::string& v) { c.member = to_list(v); }, \
            [](const RunConfig& c) { return fmt_list(c.member); } }

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table{
        {"mu", DOUBLE_FIELD(raw.mu)},
        {"sigma", DOUBLE_FIELD(raw.sigma)},
        {"nu", DOUBLE_FIELD(raw.nu)},
        {"r", DOUBLE_FIELD(raw.r)},
        {"m", DOUBLE_FIELD(raw.m)},
        {"T", DOUBLE_FIELD(raw.T)},
        {"grid.x_min", DOUBLE_FIELD(grid.x_min)},
        {"grid.x_max", DOUBLE_FIELD(grid.x_max)},
        {"grid.y_min", DOUBLE_FIELD(grid.y_min)},
        {"grid.y_max", DOUBLE_FIELD(grid.y_max)},
        {"grid.nx", COUNT_FIELD(grid.nx)},
        {"grid.ny", COUNT_FIELD(grid.ny)},
        {"grid.nt", COUNT_FIELD(grid.nt)},
        {"solver.eps", Field{[](RunConfig& c, const std::string& v) {
                                 c.solver.penalty.epsilon_schedule = to_list(v);
                                 c.solver.penalty.epsilon = c.solver.penalty.epsilon_schedule.back();
                             },
                             [](const RunConfig& c) { return fmt_list(c.solver.penalty.epsilon_schedule); }}},
        {"solver.newton_tol", DOUBLE_FIELD(solver.newton_tol)},
        {"solver.newton_max_iter",
         Field{[](RunConfig& c, const std::string& v) {
                   const auto n = to_unsigned(v);
                   if (n > 100000) {
                       throw BadValue{"newton_max_iter is unreasonably large"};
                   }
                   c.solver.newton_max_iter = static_cast<int>(n);
               },
               [](const RunConfig& c) { return std::to_string(c.solver.newton_max_iter); }}},
        {"solver.store_every", COUNT_FIELD(solver.store_every)},
        {"solver.initial_sampling",
         Field{[](RunConfig& c, const std::string& v) {
                   if (v == "cell_average") {
                       c.solver.initial_sampling = InitialSampling::cell_average;
                   } else if (v == "pointwise") {
                       c.solver.initial_sampling = InitialSampling::pointwise;
                   } else {
                       throw BadValue{"expected cell_average or pointwise, got '" + v + "'"};
                   }
               },
               [](const RunConfig& c) {
                   return std::string(c.solver.initial_sampling == InitialSampling::cell_average
                                          ? "cell_average"
                                          : "pointwise");
               }}},
        {"bounds.kappa", Field{[](RunConfig& c, const std::string& v) { c.check.kappa = to_optional(v); },
                               [](const RunConfig& c) {
                                   return c.check.kappa ? fmt(*c.check.kappa) : std::string("default");
                               }}},
        {"bounds.a", Field{[](RunConfig& c, const std::string& v) { c.check.a_const = to_optional(v); },
                           [](const RunConfig& c) {
                               return c.check.a_const ? fmt(*c.check.a_const) : std::string("default");
                           }}},
        {"check.t_small", DOUBLE_FIELD(check.t_small)},
        {"check.y_band", DOUBLE_FIELD(check.y_band)},
        {"cross.phi_floor", DOUBLE_FIELD(cross.phi_floor)},
        {"cross.x_band", DOUBLE_FIELD(cross.x_band)},
        {"sim.paths", COUNT_FIELD(sim.paths)},
        {"sim.zero_paths", COUNT_FIELD(sim.zero_paths)},
        {"sim.steps", COUNT_FIELD(sim.steps)},
        {"sim.seed", COUNT_FIELD(sim.seed)},
        {"sim.points", Field{[](RunConfig& c, const std::string& v) { c.sim.points = to_points(v); },
                             [](const RunConfig& c) { return fmt_points(c.sim.points); }}},
        {"sim.constant_rates", LIST_FIELD(sim.constant_rates)},
        {"sim.rel_tol", DOUBLE_FIELD(sim.rel_tol)},
        {"sim.min_paths", COUNT_FIELD(sim.min_paths)},
        {"figures.x0_min", DOUBLE_FIELD(figures.x0_min)},
        {"figures.x0_max", DOUBLE_FIELD(figures.x0_max)},
        {"figures.n_x0", COUNT_FIELD(figures.n_x0)},
        {"figures.s0_min", DOUBLE_FIELD(figures.s0_min)},
        {"figures.s0_max", DOUBLE_FIELD(figures.s0_max)},
        {"figures.n_s0", COUNT_FIELD(figures.n_s0)},
        {"figures.probe_x0", DOUBLE_FIELD(figures.probe_x0)},
        {"figures.probe_s0", DOUBLE_FIELD(figures.probe_s0)},
        {"figures.sweep_m", LIST_FIELD(figures.sweep_m)},
        {"figures.sweep_nu", LIST_FIELD(figures.sweep_nu)},
        {"figures.sweep_mu", LIST_FIELD(figures.sweep_mu)},
        {"figures.sweep_sigma", LIST_FIELD(figures.sweep_sigma)},
        {"figures.plot_script",
         Field{[](RunConfig& c, const std::string& v) { c.figures.plot_script = to_bool(v); },
               [](const RunConfig& c) { return std::string(c.figures.plot_script ? "true" : "false"); }}},
        {"output.slice_every", COUNT_FIELD(slice_every)},
        {"output.dir", Field{[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                             [](const RunConfig& c) { return c.output_dir; }}},
    };
    return table;
}

#undef DOUBLE_FIELD
#undef COUNT_FIELD
#undef LIST_FIELD

const Field* find_field(const std::string& key) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            return &field;
        }
    }
    return nullptr;
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(ErrorCode::ValidationError, what);
    }
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& entry : fields()) {
        keys.push_back(entry.first);
    }
    return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const Field* field = find_field(key);
    if (field == nullptr) {
        throw Error(ErrorCode::ParseError, "unknown key '" + key + "'");
    }
    try {
        field->set(cfg, value);
    } catch (const BadValue& bad) {
        throw Error(ErrorCode::ParseError, key + ": " + bad.why);
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const Error& e) {
            std::string what = e.what();
            what = what.substr(what.find(": ") + 2);
            throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": " + what);
        }
    }
    validate_run_config(cfg);
    return cfg;
}

namespace {

void validate_all(RunConfig& cfg) {
    cfg.params = validate_params(cfg.raw);
    cfg.grid.T = cfg.raw.T;
    (void)build_grid(cfg.grid);
    validate_solver_config(cfg.solver);
    require(!cfg.solver.penalty.epsilon_schedule.empty(), "solver.eps needs at least one value");
    (void)make_bound_constants(cfg.params, cfg.check.kappa, cfg.check.a_const);
    require(cfg.check.t_small > 0.0 && cfg.check.t_small < cfg.raw.T, "check.t_small must lie in (0, T)");
    require(cfg.check.y_band >= 0.0, "check.y_band must be nonnegative");
    require(cfg.cross.phi_floor > 0.0, "cross.phi_floor must be positive");
    require(cfg.cross.x_band >= 0.0, "cross.x_band must be nonnegative");
    require(cfg.sim.paths >= 1 && cfg.sim.zero_paths >= 1, "sim.paths must be at least 1");
    require(cfg.sim.steps >= 1, "sim.steps must be at least 1");
    require(cfg.sim.rel_tol >= 0.0, "sim.rel_tol must be nonnegative");
    for (const auto& [x0, s0] : cfg.sim.points) {
        require(s0 > 0.0, "sim.points prices must be positive");
        (void)x0;
    }
    const FigureSettings& f = cfg.figures;
    require(f.x0_min < f.x0_max && f.n_x0 >= 2, "figures.x0 range needs x0_min < x0_max and n_x0 >= 2");
    require(0.0 < f.s0_min && f.s0_min < f.s0_max && f.n_s0 >= 2,
            "figures.s0 range needs 0 < s0_min < s0_max and n_s0 >= 2");
    require(f.probe_s0 > 0.0, "figures.probe_s0 must be positive");
    require(cfg.slice_every >= 1, "output.slice_every must be at least 1");
    require(!cfg.output_dir.empty(), "output.dir must not be empty");
}

}  // namespace

void validate_run_config(RunConfig& cfg) {
    try {
        validate_all(cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ValidationError) {
            throw;
        }
        // Keep the specific cause (e.g. MuNotGreaterThanR) in the message.
        throw Error(ErrorCode::ValidationError, e.what());
    }
}

std::string canonical_settings(const RunConfig& cfg) {
    std::string out;
    for (const auto& [name, field] : fields()) {
        if (name == "output.dir") {
            continue;
        }
        out += name + "=" + field.get(cfg) + "\n";
    }
    return out;
}

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool shapes_solve(const std::string& key) {
    static const char* const prefixes[] = {"grid.", "solver.", "bounds.", "cross.", "check.t_small",
                                           "output.slice_every"};
    if (key.find('.') == std::string::npos) {
        return true;  // model parameters
    }
    for (const char* p : prefixes) {
        if (key.rfind(p, 0) == 0) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(canonical_settings(cfg)); }

std::string solve_hash(const RunConfig& cfg) {
    std::string text;
    for (const auto& [name, field] : fields()) {
        if (shapes_solve(name)) {
            text += name + "=" + field.get(cfg) + "\n";
        }
    }
    return fnv1a_hex(text);
}

}  // namespace carbon
