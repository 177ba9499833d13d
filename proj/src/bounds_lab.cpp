#include "chfh/bounds_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "chfh/dct.hpp"
#include "chfh/discrete.hpp"
#include "chfh/elliptic.hpp"

namespace chfh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxStepsPerPiece = 1 << 20;

std::uint64_t case_seed(std::uint64_t seed, int index)
{
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1));
    return splitmix64(s);
}

} // namespace

double OdeSpec::g_integral() const
{
    if (g.empty())
        return 0.0;
    const double dt = T0 / static_cast<double>(g.size());
    double s = 0.0;
    for (double v : g)
        s += v * dt;
    return s;
}

void validate(const OdeSpec& spec)
{
    if (!(spec.f0 > 0.0))
        throw std::invalid_argument("OdeSpec: f0 must be positive");
    if (!(spec.M > 0.0))
        throw std::invalid_argument("OdeSpec: M must be positive");
    if (!(spec.delta > 0.0 && spec.delta <= 1.0))
        throw std::invalid_argument("OdeSpec: delta must lie in (0, 1]");
    if (!(spec.sigma > 0.0 && spec.sigma < spec.delta))
        throw std::invalid_argument("OdeSpec: sigma must lie in (0, delta)");
    if (!(spec.T0 > 0.0))
        throw std::invalid_argument("OdeSpec: T0 must be positive");
    if (spec.g.empty())
        throw std::invalid_argument("OdeSpec: g needs at least one sample");
    for (double v : spec.g)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("OdeSpec: g must be finite and non-negative");
}

BoundValue singular_gronwall_bound(double f0, double M, double delta, double g_integral)
{
    BoundValue out;
    const double power = std::pow(2.0, 2.0 + 16.0 * M * g_integral);
    out.log_value = std::log(f0) + power * std::log(std::pow(2.0, 1.0 / delta) + f0);
    out.value = std::exp(out.log_value);
    out.overflow = !std::isfinite(out.value);
    if (out.overflow)
        out.value = kInf;
    return out;
}

BoundValue singular_gronwall_bound(const OdeSpec& spec)
{
    validate(spec);
    return singular_gronwall_bound(spec.f0, spec.M, spec.delta, spec.g_integral());
}

double uniform_gronwall_bound(double a1, double a2, double a3, double r)
{
    if (!(a1 >= 0.0 && a2 >= 0.0 && a3 >= 0.0))
        throw std::invalid_argument("uniform_gronwall_bound: a1, a2, a3 must be non-negative");
    if (!(r > 0.0))
        throw std::invalid_argument("uniform_gronwall_bound: r must be positive");
    return (a1 / r + a3) * std::exp(a2);
}

namespace {

/// RK4 for u' = c * rate(u) on each piece of a step function c, with the
/// number of steps per piece doubled until the piece endpoints agree to
/// tol * max(1, |u|).
template <class Rate>
OdeSolution integrate_log_ode(double u0, const std::vector<double>& coeff, double T0, Rate&& rate, double tol)
{
    const std::size_t pieces = coeff.size();
    const double len = T0 / static_cast<double>(pieces);
    auto sweep = [&](int n, std::vector<double>& ends) {
        ends.assign(pieces + 1, 0.0);
        ends[0] = u0;
        double u = u0;
        const double h = len / n;
        for (std::size_t p = 0; p < pieces; ++p) {
            const double c = coeff[p];
            for (int k = 0; k < n; ++k) {
                const double k1 = c * rate(u);
                const double k2 = c * rate(u + 0.5 * h * k1);
                const double k3 = c * rate(u + 0.5 * h * k2);
                const double k4 = c * rate(u + h * k3);
                u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!std::isfinite(u))
                    return false;
            }
            ends[p + 1] = u;
        }
        return true;
    };

    OdeSolution sol;
    std::vector<double> coarse, fine;
    int n = 4;
    bool ok_coarse = sweep(n, coarse);
    while (true) {
        const bool ok_fine = sweep(2 * n, fine);
        double diff = 0.0;
        if (ok_coarse && ok_fine)
            for (std::size_t k = 0; k <= pieces; ++k)
                diff = std::max(diff, std::abs(fine[k] - coarse[k]) / std::max(1.0, std::abs(fine[k])));
        else
            diff = kInf;
        n *= 2;
        sol.self_consistency = diff;
        if (!ok_coarse && !ok_fine) {
            sol.blew_up = true;
            break;
        }
        if (diff <= tol || n >= kMaxStepsPerPiece) {
            sol.blew_up = !ok_fine;
            break;
        }
        coarse.swap(fine);
        ok_coarse = ok_fine;
    }
    sol.steps_per_piece = n;
    sol.t.resize(pieces + 1);
    for (std::size_t k = 0; k <= pieces; ++k)
        sol.t[k] = len * static_cast<double>(k);
    sol.log_f = sol.blew_up ? std::vector<double>() : fine;
    return sol;
}

} // namespace

OdeSolution solve_envelope_ode(const OdeSpec& spec, double tol)
{
    validate(spec);
    const double d = spec.delta;
    std::vector<double> c(spec.g);
    for (double& v : c)
        v *= spec.M;
    // In u = ln f the envelope right side divided by f is e^{delta u}/delta
    // below u = 1/delta and e u above; the two agree at the switch.
    auto rate = [d](double u) { return u <= 1.0 / d ? std::exp(d * u) / d : std::numbers::e * u; };
    return integrate_log_ode(std::log(spec.f0), c, spec.T0, rate, tol);
}

OdeSolution solve_single_sigma_ode(const OdeSpec& spec, double tol)
{
    validate(spec);
    const double s = spec.sigma;
    std::vector<double> c(spec.g);
    for (double& v : c)
        v *= spec.M / s;
    auto rate = [s](double u) { return std::exp(s * u); };
    return integrate_log_ode(std::log(spec.f0), c, spec.T0, rate, tol);
}

OdeSpec random_ode_spec(std::uint64_t seed, int index)
{
    Rng rng(case_seed(seed, index), stream::gronwall);
    OdeSpec s;
    s.f0 = std::exp(rng.uniform(std::log(0.1), std::log(20.0)));
    s.M = rng.uniform(0.05, 2.0);
    s.delta = rng.uniform(0.1, 1.0);
    s.sigma = s.delta * rng.uniform(0.05, 0.95);
    s.T0 = rng.uniform(0.2, 2.0);
    const int pieces = 8 + static_cast<int>(rng.next() % 25);
    s.g.resize(static_cast<std::size_t>(pieces));
    for (double& v : s.g) {
        const double u = rng.uniform();
        v = 3.0 * u * u;
    }
    return s;
}

GronwallReport gronwall_suite(std::uint64_t seed, int count)
{
    GronwallReport rep;
    rep.cases.resize(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) {
        GronwallCase& c = rep.cases[static_cast<std::size_t>(k)];
        c.spec = random_ode_spec(seed, k);
        c.log_bound = singular_gronwall_bound(c.spec).log_value;
        const OdeSolution env = solve_envelope_ode(c.spec);
        c.self_consistency = env.self_consistency;
        c.log_max = env.blew_up ? kInf : *std::max_element(env.log_f.begin(), env.log_f.end());
        c.violated = !(c.log_max <= c.log_bound);
        const OdeSolution single = solve_single_sigma_ode(c.spec);
        c.single_sigma_blew_up = single.blew_up;
        c.single_sigma_exceeds =
            single.blew_up || *std::max_element(single.log_f.begin(), single.log_f.end()) > c.log_bound;
    }
    for (const auto& c : rep.cases) {
        rep.violations += c.violated ? 1 : 0;
        rep.single_sigma_exceed += c.single_sigma_exceeds ? 1 : 0;
        rep.worst_self_consistency = std::max(rep.worst_self_consistency, c.self_consistency);
    }
    return rep;
}

UniformGronwallCase random_uniform_gronwall_case(std::uint64_t seed, int index)
{
    Rng rng(case_seed(seed, index), stream::uniform_gronwall);
    UniformGronwallCase c;
    const int pieces = 20 + static_cast<int>(rng.next() % 21);
    c.horizon = rng.uniform(2.0, 6.0);
    const int window_pieces = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(pieces / 2));
    c.r = c.horizon * window_pieces / pieces;
    c.f0 = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
    c.g.resize(static_cast<std::size_t>(pieces));
    c.h.resize(static_cast<std::size_t>(pieces));
    // Alternate calm and active stretches so the window sups differ from the means.
    for (int p = 0; p < pieces; ++p) {
        const double scale = (p / 5) % 2 ? 1.0 : 0.1;
        c.g[static_cast<std::size_t>(p)] = scale * rng.uniform(0.01, 1.5);
        c.h[static_cast<std::size_t>(p)] = scale * rng.uniform(0.01, 2.0);
    }
    return c;
}

void evaluate_uniform_gronwall(UniformGronwallCase& c, double tol)
{
    const std::size_t pieces = c.g.size();
    if (pieces == 0 || c.h.size() != pieces)
        throw std::invalid_argument("evaluate_uniform_gronwall: g and h need the same positive length");
    if (!(c.f0 > 0.0 && c.horizon > 0.0 && c.r > 0.0 && c.r <= c.horizon))
        throw std::invalid_argument("evaluate_uniform_gronwall: bad case data");
    const double len = c.horizon / static_cast<double>(pieces);
    const double window_pieces = c.r / len;
    const auto wp = static_cast<std::size_t>(std::llround(window_pieces));
    if (std::abs(window_pieces - static_cast<double>(wp)) > 1e-9 || wp == 0)
        throw std::invalid_argument("evaluate_uniform_gronwall: r must be a whole number of pieces");

    // State (f, F = int f). Returns node values, n steps per piece.
    auto sweep = [&](int n, std::vector<double>& f, std::vector<double>& F) {
        const std::size_t nodes = pieces * static_cast<std::size_t>(n) + 1;
        f.assign(nodes, 0.0);
        F.assign(nodes, 0.0);
        double x = c.f0, X = 0.0;
        f[0] = x;
        const double h = len / n;
        std::size_t idx = 0;
        for (std::size_t p = 0; p < pieces; ++p) {
            const double gp = c.g[p], hp = c.h[p];
            for (int k = 0; k < n; ++k) {
                const double k1 = gp * x + hp;
                const double k2 = gp * (x + 0.5 * h * k1) + hp;
                const double k3 = gp * (x + 0.5 * h * k2) + hp;
                const double k4 = gp * (x + h * k3) + hp;
                const double K1 = x, K2 = x + 0.5 * h * k1, K3 = x + 0.5 * h * k2, K4 = x + h * k3;
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                X += h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
                ++idx;
                f[idx] = x;
                F[idx] = X;
            }
        }
    };

    std::vector<double> f1, F1, f2, F2;
    int n = 2;
    sweep(n, f1, F1);
    while (true) {
        sweep(2 * n, f2, F2);
        double diff = 0.0;
        for (std::size_t k = 0; k < f1.size(); ++k) {
            diff = std::max(diff, std::abs(f2[2 * k] - f1[k]) / f2[2 * k]);
            if (F2[2 * k] > 0.0)
                diff = std::max(diff, std::abs(F2[2 * k] - F1[k]) / F2[2 * k]);
        }
        n *= 2;
        c.self_consistency = diff;
        if (diff <= tol || n >= (1 << 14))
            break;
        f1.swap(f2);
        F1.swap(F2);
    }

    const std::size_t per = static_cast<std::size_t>(n);
    const std::size_t nodes = f2.size();
    const std::size_t wn = wp * per;
    const double h = len / n;
    // Exact window integrals of the step functions over node-aligned windows.
    std::vector<double> G(nodes, 0.0), H(nodes, 0.0);
    for (std::size_t k = 1; k < nodes; ++k) {
        const std::size_t p = (k - 1) / per;
        G[k] = G[k - 1] + c.g[p] * h;
        H[k] = H[k - 1] + c.h[p] * h;
    }
    c.a1 = c.a2 = c.a3 = 0.0;
    for (std::size_t k = 0; k + wn < nodes; ++k) {
        c.a1 = std::max(c.a1, F2[k + wn] - F2[k]);
        c.a2 = std::max(c.a2, G[k + wn] - G[k]);
        c.a3 = std::max(c.a3, H[k + wn] - H[k]);
    }
    c.bound = uniform_gronwall_bound(c.a1, c.a2, c.a3, c.r);
    c.max_f = 0.0;
    for (std::size_t k = wn; k < nodes; ++k)
        c.max_f = std::max(c.max_f, f2[k]);
    // Relative slack for quadrature rounding; the bound is sharp when g = h = 0.
    c.violated = c.max_f > c.bound * (1.0 + 1e-9);
}

UniformGronwallReport uniform_gronwall_suite(std::uint64_t seed, int count)
{
    UniformGronwallReport rep;
    rep.cases.resize(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) {
        auto& c = rep.cases[static_cast<std::size_t>(k)];
        c = random_uniform_gronwall_case(seed, k);
        evaluate_uniform_gronwall(c);
    }
    for (const auto& c : rep.cases) {
        rep.violations += c.violated ? 1 : 0;
        rep.worst_self_consistency = std::max(rep.worst_self_consistency, c.self_consistency);
        rep.tightest = std::max(rep.tightest, c.max_f / c.bound);
    }
    return rep;
}

namespace {

struct BlowupTrajectory {
    std::vector<double> y, t, I;
};

/// RK4 for dt/dy = (rho/K) e^{-(1+2rho) y}, dI/dy = (rho/K) e^{-2 rho y},
/// y = ln B, with n steps from y0 to y0 + span. The right sides do not depend
/// on (t, I), so each RK4 step reduces to Simpson's rule.
BlowupTrajectory blowup_sweep(double K, double rho, double y0, double span, int n)
{
    BlowupTrajectory tr;
    const double a = 1.0 + 2.0 * rho;
    const double h = span / n;
    double t = 0.0, I = 0.0;
    tr.y.push_back(y0);
    tr.t.push_back(0.0);
    tr.I.push_back(0.0);
    auto dt = [&](double y) { return rho / K * std::exp(-a * y); };
    auto dI = [&](double y) { return rho / K * std::exp(-2.0 * rho * y); };
    for (int k = 0; k < n; ++k) {
        const double y = y0 + k * h;
        t += h / 6.0 * (dt(y) + 4.0 * dt(y + 0.5 * h) + dt(y + h));
        I += h / 6.0 * (dI(y) + 4.0 * dI(y + 0.5 * h) + dI(y + h));
        tr.y.push_back(y + h);
        tr.t.push_back(t);
        tr.I.push_back(I);
    }
    return tr;
}

} // namespace

BlowupReport bb_ode_comparison(double K, const std::vector<double>& rho_list, double B0, double T)
{
    if (!(K > 0.0))
        throw std::invalid_argument("bb_ode_comparison: K must be positive");
    if (!(B0 >= 1.0))
        throw std::invalid_argument("bb_ode_comparison: B0 must be at least 1");
    if (!(T > 0.0))
        throw std::invalid_argument("bb_ode_comparison: T must be positive");
    for (double rho : rho_list)
        if (!(rho > 0.0 && rho < 0.25))
            throw std::invalid_argument("bb_ode_comparison: rho must lie in (0, 1/4)");

    constexpr double kSpan = 60.0;
    BlowupReport rep;
    rep.K = K;
    rep.B0 = B0;
    rep.T = T;
    const double y0 = std::log(B0);
    for (double rho : rho_list) {
        BlowupCase c;
        c.rho = rho;
        const double a = 1.0 + 2.0 * rho;
        c.blowup_time_exact = rho / (K * a * std::pow(B0, a));

        int n = 64;
        BlowupTrajectory coarse = blowup_sweep(K, rho, y0, kSpan, n), fine;
        while (true) {
            fine = blowup_sweep(K, rho, y0, kSpan, 2 * n);
            n *= 2;
            const double dt = std::abs(fine.t.back() - coarse.t.back()) / fine.t.back();
            const double dI = std::abs(fine.I.back() - coarse.I.back()) / fine.I.back();
            if (std::max(dt, dI) <= 1e-10 || n >= (1 << 22))
                break;
            coarse = std::move(fine);
        }
        c.blowup_time = fine.t.back();
        c.int_B_at_blowup = fine.I.back();
        c.before_first_output = c.blowup_time < T / 100.0;

        c.global_bound_holds = true;
        c.global_log_margin = kInf;
        const double scale = 2.0 * K * std::pow(B0, 2.0 * rho);
        for (std::size_t k = 0; k < fine.y.size(); ++k) {
            if (fine.t[k] > T)
                break;
            ++c.windows;
            const double logB = fine.y[k];
            const double bracket = 1.0 - scale * fine.I[k];
            // Well inside the validity window the local bound is evaluated
            // without cancellation trouble.
            if (bracket >= 1e-6) {
                const double log_local = y0 - std::log(bracket) / (2.0 * rho);
                c.local_bound_ratio = std::max(c.local_bound_ratio, std::exp(logB - log_local));
            }
            const double log_global = singular_gronwall_bound(B0, 2.0 * K, 0.5, fine.I[k]).log_value;
            c.global_log_margin = std::min(c.global_log_margin, log_global - logB);
            if (!(logB <= log_global))
                c.global_bound_holds = false;
        }
        rep.cases.push_back(c);
    }
    rep.blowup_decreasing_in_rho = true;
    rep.all_global_bounds_hold = true;
    for (std::size_t i = 0; i < rep.cases.size(); ++i) {
        rep.all_global_bounds_hold = rep.all_global_bounds_hold && rep.cases[i].global_bound_holds;
        for (std::size_t j = 0; j < rep.cases.size(); ++j)
            if (rep.cases[i].rho < rep.cases[j].rho && !(rep.cases[i].blowup_time < rep.cases[j].blowup_time))
                rep.blowup_decreasing_in_rho = false;
    }
    return rep;
}

double h1_norm(const ScalarField& f)
{
    const double l2 = norm_l2(f);
    return std::sqrt(l2 * l2 + grad_norm_sq(f));
}

double dual_h1_norm(const ScalarField& f)
{
    const ScalarField u = dct_helmholtz_solve(1.0, 1.0, f);
    return std::sqrt(std::max(0.0, inner(f, u)));
}

double gn_ratio(const ScalarField& f, double r)
{
    const double lr = norm_lp(f, r), l2 = norm_l2(f), h1 = h1_norm(f);
    if (lr == 0.0)
        return 0.0;
    return lr / (std::sqrt(r) * std::pow(l2, 2.0 / r) * std::pow(h1, (r - 2.0) / r));
}

GnReport gn_inequality_sweep(const Grid& grid, const RandomFieldSpec& spec, const std::vector<double>& r_list,
                             int samples)
{
    for (double r : r_list)
        if (!(r >= 2.0 && r <= 64.0))
            throw std::invalid_argument("gn_inequality_sweep: r must lie in [2, 64]");
    if (samples < 1)
        throw std::invalid_argument("gn_inequality_sweep: need at least one sample");
    GnReport rep;
    rep.samples = samples;
    const std::size_t nr = r_list.size();
    std::vector<double> ratio(static_cast<std::size_t>(samples) * nr), dual(ratio.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < samples; ++k) {
        RandomFieldSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(k);
        const ScalarField f = band_limited_field(grid, s, stream::gn_sweep);
        const double dn = dual_h1_norm(f);
        for (std::size_t j = 0; j < nr; ++j) {
            const double r = r_list[j];
            ratio[static_cast<std::size_t>(k) * nr + j] = gn_ratio(f, r);
            const double lr = norm_lp(f, r);
            dual[static_cast<std::size_t>(k) * nr + j] = lr > 0.0 ? dn / (std::sqrt(r / (r - 1.0)) * lr) : 0.0;
        }
    }
    for (std::size_t j = 0; j < nr; ++j) {
        GnRow row;
        row.r = r_list[j];
        for (int k = 0; k < samples; ++k) {
            row.max_ratio = std::max(row.max_ratio, ratio[static_cast<std::size_t>(k) * nr + j]);
            row.max_dual_ratio = std::max(row.max_dual_ratio, dual[static_cast<std::size_t>(k) * nr + j]);
        }
        row.max_ratio_unscaled = row.max_ratio * std::sqrt(row.r);
        rep.rows.push_back(row);
    }
    if (nr >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& row : rep.rows) {
            const double x = std::log(row.r), y = std::log(row.max_ratio);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(nr);
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

namespace {

/// Interior face differences (f(i) - f(i-1))/h, x faces first, with the area
/// weight each carries.
void face_differences(const ScalarField& f, std::vector<double>& d)
{
    const Grid& g = f.grid();
    d.clear();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            d.push_back((f.at(i, j) - f.at(i - 1, j)) / g.hx);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d.push_back((f.at(i, j) - f.at(i, j - 1)) / g.hy);
}

void mixed_differences(const ScalarField& f, std::vector<double>& d)
{
    const Grid& g = f.grid();
    d.clear();
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            d.push_back((f.at(i + 1, j + 1) - f.at(i + 1, j) - f.at(i, j + 1) + f.at(i, j)) / (g.hx * g.hy));
}

double sum_pow(std::span<const double> v, int p)
{
    double s = 0.0;
    for (double x : v)
        s += std::pow(std::abs(x), p);
    return s;
}

/// Cell-centered central differences with reflected ghosts.
void cell_gradient(const ScalarField& f, ScalarField& fx, ScalarField& fy)
{
    const Grid& g = f.grid();
    fx = ScalarField(g);
    fy = ScalarField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int il = std::max(i - 1, 0), ir = std::min(i + 1, g.nx - 1);
            const int jl = std::max(j - 1, 0), jr = std::min(j + 1, g.ny - 1);
            fx[g.index(i, j)] = (f.at(ir, j) - f.at(il, j)) / (2.0 * g.hx);
            fy[g.index(i, j)] = (f.at(i, jr) - f.at(i, jl)) / (2.0 * g.hy);
        }
}

} // namespace

double h2_norm(const ScalarField& f)
{
    const double a = f.grid().cell_area();
    std::vector<double> mixed;
    mixed_differences(f, mixed);
    const double l2 = norm_l2(f), lap = norm_l2(laplacian_neumann(f));
    return std::sqrt(l2 * l2 + grad_norm_sq(f) + lap * lap + sum_pow(mixed, 2) * a);
}

double h3_norm(const ScalarField& f)
{
    const double h2 = h2_norm(f);
    return std::sqrt(h2 * h2 + grad_norm_sq(laplacian_neumann(f)));
}

double w24_norm(const ScalarField& f)
{
    const double a = f.grid().cell_area();
    std::vector<double> grad, mixed;
    face_differences(f, grad);
    mixed_differences(f, mixed);
    const ScalarField lap = laplacian_neumann(f);
    const double s = (sum_pow(f.values(), 4) + sum_pow(grad, 4) + sum_pow(lap.values(), 4) + sum_pow(mixed, 4)) * a;
    return std::pow(s, 0.25);
}

double h2bb_min_constant(const H2Sample& x, double s, double extra)
{
    if (!(s > 2.0))
        throw std::invalid_argument("h2bb_min_constant: s must exceed 2");
    if (x.lhs == 0.0)
        return 0.0;
    const double first = extra * std::pow(x.grad_q, 0.5 * (s - 2.0)) * x.q_h2 * x.grad_u;
    auto rhs = [&](double C) { return std::pow(C * C * s * s / (s - 2.0), 0.25 * s) * first + 0.5 * s * C * x.f_l2; };
    double lo = 1.0, hi = 1.0;
    while (rhs(hi) < x.lhs)
        hi *= 2.0;
    while (rhs(lo) >= x.lhs && lo > 1e-300)
        lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rhs(mid) >= x.lhs ? hi : lo) = mid;
    }
    return hi;
}

namespace {

struct ExtendedSample {
    H2Sample base;
    double w24_lhs = 0.0, w24_rhs = 0.0;
    double h3_lhs = 0.0, h3_rhs = 0.0;
};

ExtendedSample evaluate_sample(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec, bool extended)
{
    ExtendedSample e;
    EllipticWorkspace ws(q.grid());
    const ScalarField u = solve_Gq(q, f, spec, ws);
    H2Sample& x = e.base;
    x.lhs = h2_norm(u);
    x.grad_q = std::sqrt(grad_norm_sq(q));
    x.q_h2 = h2_norm(q);
    x.grad_u = std::sqrt(grad_norm_sq(u));
    x.f_l2 = norm_l2(f);
    if (!extended)
        return e;

    e.w24_lhs = w24_norm(u);
    e.w24_rhs = std::pow(x.grad_q, 0.25) * std::pow(x.q_h2, 0.75) * std::pow(x.grad_u, 0.25) * std::pow(x.lhs, 0.75) +
                norm_lp(f, 4.0);

    const Grid& g = q.grid();
    ScalarField qx, qy, ux, uy;
    cell_gradient(q, qx, qy);
    cell_gradient(u, ux, uy);
    ScalarField drift(g), scaled(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const MobilityValue b = spec.eval(std::clamp(q[k], -1.0, 1.0));
        drift[k] = b.db / b.b * (qx[k] * ux[k] + qy[k] * uy[k]);
        scaled[k] = f[k] / b.b;
    }
    e.h3_lhs = h3_norm(u);
    e.h3_rhs = h1_norm(drift) + h1_norm(scaled);
    return e;
}

} // namespace

H2Sample h2_sample(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec)
{
    return evaluate_sample(q, f, spec, false).base;
}

namespace {

H2Report assemble(const std::vector<ExtendedSample>& xs, const std::vector<double>& s_list, bool extended)
{
    H2Report rep;
    rep.samples = static_cast<int>(xs.size());
    for (double s : s_list) {
        H2Row row;
        row.s = s;
        for (const auto& e : xs) {
            row.c_star = std::max(row.c_star, h2bb_min_constant(e.base, s));
            row.c_star_alt = std::max(row.c_star_alt, h2bb_min_constant(e.base, s, std::pow(2.0, s / 4.0)));
        }
        rep.rows.push_back(row);
    }
    for (const auto& e : xs) {
        const H2Sample& x = e.base;
        const double denom = x.grad_q * x.q_h2 * x.grad_u + x.f_l2;
        if (denom > 0.0)
            rep.c_h2 = std::max(rep.c_h2, x.lhs / denom);
        if (extended) {
            if (e.w24_rhs > 0.0)
                rep.c_w24 = std::max(rep.c_w24, e.w24_lhs / e.w24_rhs);
            if (e.h3_rhs > 0.0)
                rep.c_h3 = std::max(rep.c_h3, e.h3_lhs / e.h3_rhs);
        }
    }
    return rep;
}

} // namespace

H2Report h2bb_estimate_report(const std::vector<ScalarField>& q_samples, const std::vector<ScalarField>& f_samples,
                              const MobilitySpec& spec, const std::vector<double>& s_list, bool extended)
{
    if (q_samples.size() != f_samples.size())
        throw std::invalid_argument("h2bb_estimate_report: q and f sample counts differ");
    for (double s : s_list)
        if (!(s > 2.0 && s <= 8.0))
            throw std::invalid_argument("h2bb_estimate_report: s must lie in (2, 8]");
    std::vector<ExtendedSample> xs(q_samples.size());
    const int n = static_cast<int>(xs.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k)
        xs[static_cast<std::size_t>(k)] =
            evaluate_sample(q_samples[static_cast<std::size_t>(k)], f_samples[static_cast<std::size_t>(k)], spec, extended);
    return assemble(xs, s_list, extended);
}

H2Report h2bb_estimate_report(const Grid& grid, const MobilitySpec& spec, std::uint64_t seed, int samples,
                              const std::vector<double>& s_list, bool extended)
{
    std::vector<ScalarField> qs, fs;
    for (int k = 0; k < samples; ++k) {
        const std::uint64_t s = case_seed(seed, k);
        qs.push_back(band_limited_field(grid, {s, 6, 0.9, 1.0, false}, stream::h2_estimate));
        fs.push_back(band_limited_field(grid, {s, 6, 1.0, 1.0, true}, stream::h2_forcing));
    }
    return h2bb_estimate_report(qs, fs, spec, s_list, extended);
}

} // namespace chfh
