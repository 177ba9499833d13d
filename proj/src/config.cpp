#include "chfh/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <unistd.h>

#include "chfh/discrete.hpp"
#include "chfh/io.hpp"
#include "chfh/random.hpp"

namespace chfh {

namespace {

std::string join(const std::vector<std::string>& parts)
{
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k)
        out += (k ? "\n" : "") + parts[k];
    return out;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out)
{
    if (s == "true" || s == "1" || s == "yes") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        out = false;
        return true;
    }
    return false;
}

// Raw grid numbers; the Grid itself is built once all keys are read.
struct GridDraft {
    int nx = 64, ny = 64;
    double lx = 1.0, ly = 1.0;
};

struct Draft {
    GridDraft grid;
    RunConfig cfg;
};

// A setter returns an empty string on success and the reason otherwise.
using Setter = std::function<std::string(Draft&, std::string_view)>;

template <class Get>
Setter real(Get get)
{
    return [get](Draft& d, std::string_view v) -> std::string {
        double x;
        if (!parse_number(v, x) || !std::isfinite(x))
            return "expected a finite number";
        get(d) = x;
        return {};
    };
}

template <class Get>
Setter integer(Get get)
{
    return [get](Draft& d, std::string_view v) -> std::string {
        using T = std::remove_reference_t<decltype(get(d))>;
        T x;
        if (!parse_number(v, x))
            return "expected an integer";
        get(d) = x;
        return {};
    };
}

template <class Get>
Setter boolean(Get get)
{
    return [get](Draft& d, std::string_view v) -> std::string {
        bool x;
        if (!parse_bool(v, x))
            return "expected true or false";
        get(d) = x;
        return {};
    };
}

template <class Get>
Setter text(Get get)
{
    return [get](Draft& d, std::string_view v) -> std::string {
        get(d) = std::string(v);
        return {};
    };
}

template <class Get, class Enum>
Setter choice(Get get, std::vector<std::pair<std::string, Enum>> options)
{
    return [get, options](Draft& d, std::string_view v) -> std::string {
        std::string names;
        for (const auto& [name, value] : options) {
            if (v == name) {
                get(d) = value;
                return {};
            }
            names += (names.empty() ? "" : ", ") + name;
        }
        return "expected one of " + names;
    };
}

Setter real_list(std::vector<double> MobilityConfig::*member)
{
    return [member](Draft& d, std::string_view v) -> std::string {
        std::vector<double> out;
        std::size_t start = 0;
        while (start <= v.size()) {
            const auto comma = v.find(',', start);
            const auto piece = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
            double x;
            if (!parse_number(piece, x) || !std::isfinite(x))
                return "expected a comma-separated list of numbers";
            out.push_back(x);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        d.cfg.mobility.*member = std::move(out);
        return {};
    };
}

#define FIELD(expr) [](Draft& d) -> auto& { return d.expr; }

const std::vector<std::pair<std::string, Setter>>& setters()
{
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"grid.nx", integer(FIELD(grid.nx))},
        {"grid.ny", integer(FIELD(grid.ny))},
        {"grid.lx", real(FIELD(grid.lx))},
        {"grid.ly", real(FIELD(grid.ly))},
        {"potential.theta", real(FIELD(cfg.potential.theta))},
        {"potential.theta0", real(FIELD(cfg.potential.theta0))},
        {"mobility.form", text(FIELD(cfg.mobility.form))},
        {"mobility.m0", real(FIELD(cfg.mobility.m0))},
        {"mobility.coeffs", real_list(&MobilityConfig::coeffs)},
        {"mobility.b_min", real(FIELD(cfg.mobility.b_min))},
        {"mobility.b_max", real(FIELD(cfg.mobility.b_max))},
        {"init.kind", choice(FIELD(cfg.initial.kind),
                             std::vector<std::pair<std::string, InitialKind>>{
                                 {"noise", InitialKind::noise},
                                 {"tanh_stripe", InitialKind::tanh_stripe},
                                 {"checkerboard", InitialKind::checkerboard},
                                 {"file", InitialKind::file}})},
        {"init.mean", real(FIELD(cfg.initial.mean))},
        {"init.amplitude", real(FIELD(cfg.initial.amplitude))},
        {"init.seed", integer(FIELD(cfg.initial.seed))},
        {"init.modes", integer(FIELD(cfg.initial.modes))},
        {"init.width", real(FIELD(cfg.initial.width))},
        {"init.period", integer(FIELD(cfg.initial.period))},
        {"init.path", text(FIELD(cfg.initial.path))},
        {"stepper.dt", real(FIELD(cfg.stepper.dt))},
        {"stepper.newton_tol", real(FIELD(cfg.stepper.newton_tol))},
        {"stepper.newton_max", integer(FIELD(cfg.stepper.newton_max))},
        {"stepper.theta_stab", real(FIELD(cfg.stepper.theta_stab))},
        {"stepper.linear_tol", real(FIELD(cfg.stepper.linear_tol))},
        {"stepper.linear_max", integer(FIELD(cfg.stepper.linear_max))},
        {"stepper.gmres_restart", integer(FIELD(cfg.stepper.gmres_restart))},
        {"stepper.adaptive", boolean(FIELD(cfg.stepper.adaptive.enabled))},
        {"stepper.dt_min", real(FIELD(cfg.stepper.adaptive.dt_min))},
        {"stepper.dt_max", real(FIELD(cfg.stepper.adaptive.dt_max))},
        {"stepper.shrink", real(FIELD(cfg.stepper.adaptive.shrink))},
        {"stepper.grow", real(FIELD(cfg.stepper.adaptive.grow))},
        {"run.T", real(FIELD(cfg.T))},
        {"output.ledger", text(FIELD(cfg.output.ledger))},
        {"output.snapshot_every", integer(FIELD(cfg.output.snapshot_every))},
        {"output.snapshot_dir", text(FIELD(cfg.output.snapshot_dir))},
        {"output.images", boolean(FIELD(cfg.output.images))},
        {"steady.tol_residual", real(FIELD(cfg.steady.tol_residual))},
        {"steady.tol_gradmu", real(FIELD(cfg.steady.tol_gradmu))},
        {"steady.max_time", real(FIELD(cfg.steady.max_time))},
        {"steady.method", choice(FIELD(cfg.steady.method),
                                 std::vector<std::pair<std::string, SteadyMethod>>{
                                     {"long_time", SteadyMethod::long_time_integration},
                                     {"newton", SteadyMethod::damped_newton}})},
        {"steady.polish_start", real(FIELD(cfg.steady.polish_start))},
        {"steady.newton_max", integer(FIELD(cfg.steady.newton_max))},
        {"uniqueness.eps", real(FIELD(cfg.uniqueness.eps))},
        {"uniqueness.seed", integer(FIELD(cfg.uniqueness.seed))},
        {"uniqueness.cadence", integer(FIELD(cfg.uniqueness.cadence))},
    };
    return table;
}

#undef FIELD

bool directory_writable(const std::filesystem::path& dir)
{
    std::error_code ec;
    return std::filesystem::is_directory(dir, ec) && ::access(dir.c_str(), W_OK) == 0;
}

// The file may not exist yet; its directory must.
void check_output_file(const std::string& key, const std::string& path, std::vector<std::string>& bad)
{
    if (path.empty())
        return;
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (parent.empty())
        parent = ".";
    if (!directory_writable(parent))
        bad.push_back(key + ": directory " + parent.string() + " is not writable");
}

void append_what(const std::string& key, const std::function<void()>& fn, std::vector<std::string>& bad)
{
    try {
        fn();
    } catch (const std::exception& e) {
        std::istringstream lines(e.what());
        for (std::string line; std::getline(lines, line, ';');)
            bad.push_back(key + ": " + std::string(trim(line)));
    }
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join(errors)), errors_(std::move(errors))
{
}

MobilitySpec MobilityConfig::build() const
{
    if (form == "constant")
        return MobilitySpec::constant(m0);
    if (form == "polynomial")
        return MobilitySpec::polynomial(coeffs, b_min, b_max);
    if (form == "degenerate")
        return MobilitySpec::degenerate(m0);
    throw std::invalid_argument("form must be constant, polynomial or degenerate");
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& entry : setters())
            out.push_back(entry.first);
        return out;
    }();
    return keys;
}

std::vector<std::string> config_violations(const RunConfig& cfg)
{
    std::vector<std::string> bad;
    const PotentialParams& p = cfg.potential;
    if (!(p.theta > 0.0))
        bad.emplace_back("potential.theta must be positive");
    if (!(p.theta0 > p.theta))
        bad.emplace_back("potential.theta0: theta0 must exceed theta");
    append_what("mobility", [&] { cfg.mobility.build(); }, bad);

    const InitialConfig& ic = cfg.initial;
    if (ic.kind == InitialKind::file) {
        if (ic.path.empty()) {
            bad.emplace_back("init.path is required for init.kind = file");
        } else {
            try {
                const ScalarField phi = read_snapshot(ic.path);
                if (!(phi.grid() == cfg.grid))
                    bad.emplace_back("init.path: snapshot grid differs from grid.*");
                if (max_abs(phi) > 1.0)
                    bad.emplace_back("init.path: snapshot leaves [-1, 1]");
                if (!(std::abs(mean(phi)) < 1.0))
                    bad.emplace_back("init.path: snapshot mean must be interior to (-1, 1)");
            } catch (const std::exception& e) {
                bad.push_back(std::string("init.path: ") + e.what());
            }
        }
    } else {
        if (!(std::abs(ic.mean) < 1.0))
            bad.emplace_back("init.mean: mean must be interior to (-1, 1)");
        if (!(ic.amplitude >= 0.0))
            bad.emplace_back("init.amplitude must be non-negative");
        else if (std::abs(ic.mean) < 1.0 && std::abs(ic.mean) + ic.amplitude > 1.0)
            bad.emplace_back("init.amplitude: |init.mean| + init.amplitude must not exceed 1");
        if (ic.kind == InitialKind::noise && ic.modes < 1)
            bad.emplace_back("init.modes must be at least 1");
        if (ic.kind == InitialKind::tanh_stripe && !(ic.width > 0.0))
            bad.emplace_back("init.width must be positive");
        if (ic.kind == InitialKind::checkerboard && (ic.period < 1 || ic.period >= std::min(cfg.grid.nx, cfg.grid.ny)))
            bad.emplace_back("init.period must lie in [1, min(nx, ny))");
    }

    append_what("stepper", [&] { validate(cfg.stepper); }, bad);
    if (!(cfg.T >= 0.0))
        bad.emplace_back("run.T must be non-negative");

    check_output_file("output.ledger", cfg.output.ledger, bad);
    if (cfg.output.snapshot_every < 0)
        bad.emplace_back("output.snapshot_every must be non-negative");
    if (cfg.output.snapshot_every > 0 || cfg.output.images) {
        const std::filesystem::path dir(cfg.output.snapshot_dir);
        std::error_code ec;
        const bool exists = std::filesystem::exists(dir, ec);
        std::filesystem::path parent = dir.parent_path();
        if (parent.empty())
            parent = ".";
        if (exists ? !directory_writable(dir) : !directory_writable(parent))
            bad.emplace_back("output.snapshot_dir: " + dir.string() + " is not writable");
    }

    append_what("steady", [&] { validate(cfg.steady); }, bad);
    if (!(cfg.uniqueness.eps > 0.0))
        bad.emplace_back("uniqueness.eps must be positive");
    if (cfg.uniqueness.cadence < 1)
        bad.emplace_back("uniqueness.cadence must be at least 1");
    return bad;
}

RunConfig parse_config(const std::string& text)
{
    std::map<std::string, const Setter*> lookup;
    for (const auto& [key, setter] : setters())
        lookup[key] = &setter;

    Draft d;
    std::vector<std::string> bad;
    std::set<std::string> seen;
    std::istringstream lines(text);
    int number = 0;
    for (std::string raw; std::getline(lines, raw);) {
        ++number;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = "line " + std::to_string(number) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            bad.push_back(where + "expected key = value");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) {
            bad.push_back(where + "missing key before '='");
            continue;
        }
        const auto it = lookup.find(key);
        if (it == lookup.end()) {
            bad.push_back(where + "unknown key " + key);
            continue;
        }
        if (!seen.insert(key).second) {
            bad.push_back(where + "duplicate key " + key);
            continue;
        }
        if (const std::string why = (*it->second)(d, value); !why.empty())
            bad.push_back(where + key + ": " + why);
    }

    try {
        d.cfg.grid = make_grid(d.grid.nx, d.grid.ny, d.grid.lx, d.grid.ly);
    } catch (const std::invalid_argument& e) {
        bad.push_back(std::string("grid: ") + e.what());
        // Keep a usable grid so the remaining checks still run.
        d.cfg.grid = make_grid(std::max(d.grid.nx, 4), std::max(d.grid.ny, 4),
                               d.grid.lx > 0.0 ? d.grid.lx : 1.0, d.grid.ly > 0.0 ? d.grid.ly : 1.0);
    }

    for (auto& v : config_violations(d.cfg))
        bad.push_back(std::move(v));
    if (!bad.empty())
        throw ConfigError(std::move(bad));
    return d.cfg;
}

RunConfig load_config(const std::string& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError({e.what()});
    }
    return parse_config(text);
}

ScalarField initial_field(const RunConfig& cfg)
{
    const InitialConfig& ic = cfg.initial;
    const Grid& g = cfg.grid;
    ScalarField phi;
    switch (ic.kind) {
    case InitialKind::file:
        phi = read_snapshot(ic.path);
        if (!(phi.grid() == g))
            throw ConfigError({"init.path: snapshot grid differs from grid.*"});
        return phi;
    case InitialKind::noise:
        phi = band_limited_field(g, {ic.seed, ic.modes, ic.amplitude, 1.0, true});
        break;
    case InitialKind::tanh_stripe: {
        const double s = std::sqrt(2.0) * ic.width;
        phi = ScalarField::sample(g, [&](double x, double) { return ic.amplitude * std::tanh((x - 0.5 * g.lx) / s); });
        break;
    }
    case InitialKind::checkerboard: {
        const double kx = std::numbers::pi * ic.period / g.lx, ky = std::numbers::pi * ic.period / g.ly;
        phi = ScalarField::sample(g, [&](double x, double y) { return ic.amplitude * std::cos(kx * x) * std::cos(ky * y); });
        break;
    }
    }
    const double shift = ic.mean - mean(phi);
    for (double& v : phi.values())
        v += shift;
    return phi;
}

} // namespace chfh
