#include "chfh/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chfh/discrete.hpp"
#include "chfh/elliptic.hpp"
#include "chfh/kernels.hpp"
#include "chfh/krylov.hpp"

namespace chfh {

SimState make_state(const ScalarField& phi0, const PotentialParams& p)
{
    require_finite(phi0, "initial datum");
    for (double v : phi0.values())
        if (std::abs(v) > 1.0)
            throw std::invalid_argument("initial datum must satisfy |phi0| <= 1");
    ScalarField phi = phi0;
    for (double& v : phi.values())
        v = clamp_open(v);
    const double m = mean(phi);
    if (!(std::abs(m) < 1.0 - kClamp))
        throw std::invalid_argument("initial mean must lie in (-1, 1)");
    ScalarField mu = psi_prime_field(phi, p) - laplacian_neumann(phi);
    SimState s;
    s.phi = std::move(phi);
    s.mu = std::move(mu);
    s.mass0 = m;
    return s;
}

void validate(const StepperConfig& cfg)
{
    std::vector<std::string> bad;
    if (!(cfg.dt > 0.0))
        bad.emplace_back("dt must be positive");
    if (!(cfg.newton_tol > 0.0))
        bad.emplace_back("newton_tol must be positive");
    if (cfg.newton_max < 1)
        bad.emplace_back("newton_max must be at least 1");
    if (!(cfg.theta_stab >= 0.0))
        bad.emplace_back("theta_stab must be non-negative");
    if (!(cfg.linear_tol > 0.0 && cfg.linear_tol < 1.0))
        bad.emplace_back("linear_tol must lie in (0, 1)");
    if (cfg.adaptive.enabled) {
        const auto& a = cfg.adaptive;
        if (!(a.dt_min > 0.0 && a.dt_min <= a.dt_max))
            bad.emplace_back("adaptive bounds need 0 < dt_min <= dt_max");
        else if (cfg.dt < a.dt_min || cfg.dt > a.dt_max)
            bad.emplace_back("dt must lie in [dt_min, dt_max]");
        if (!(a.shrink > 0.0 && a.shrink < 1.0))
            bad.emplace_back("shrink must lie in (0, 1)");
        if (!(a.grow > 1.0 && a.grow <= 2.0))
            bad.emplace_back("grow must lie in (1, 2]");
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        for (std::size_t k = 0; k < bad.size(); ++k)
            msg << (k ? "; " : "") << bad[k];
        throw std::invalid_argument(msg.str());
    }
}

Stepper::Stepper(const Grid& grid, PotentialParams p, MobilitySpec spec)
    : grid_(grid), p_(p), spec_(std::move(spec)), transform_(CosineTransform::for_grid(grid))
{
    neg_lap_.resize(grid.size());
    for (int l = 0; l < grid.ny; ++l)
        for (int k = 0; k < grid.nx; ++k)
            neg_lap_[grid.index(k, l)] = -(transform_->eigen_x()[k] + transform_->eigen_y()[l]);
}

void Stepper::chemical_potential(std::span<const double> phi, std::span<const double> phi_old,
                                 double theta_stab, std::span<double> mu) const
{
    kernels::laplacian(grid_, phi, mu);
    const auto n = static_cast<std::ptrdiff_t>(phi.size());
    const double theta = p_.theta, theta0 = p_.theta0;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const double s = clamp_open(phi[k]);
        mu[k] = -mu[k] + theta * std::atanh(s) - theta0 * phi_old[k] + theta_stab * (phi[k] - phi_old[k]);
    }
}

bool Stepper::try_step(SimState& state, double dt, const StepperConfig& cfg, StepStats& stats)
{
    stats = StepStats{};
    stats.dt = dt;
    const std::size_t n = grid_.size();
    const auto phi_old = state.phi.values();
    const FaceCoeffs b = spec_.faces(state.phi);

    double bbar = 0.0;
    {
        double s = 0.0;
        std::size_t cnt = 0;
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 1; i < grid_.nx; ++i, ++cnt)
                s += b.x[static_cast<std::size_t>(j) * (grid_.nx + 1) + i];
        for (int j = 1; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i, ++cnt)
                s += b.y[static_cast<std::size_t>(j) * grid_.nx + i];
        bbar = s / static_cast<double>(cnt);
    }

    std::vector<double> phi(phi_old.begin(), phi_old.end());
    std::vector<double> mu(n), res(n), trial(n), trial_mu(n), trial_res(n);
    std::vector<double> diag(n), symbol(n), tmp(n), delta(n), rhs(n);

    auto residual = [&](std::span<const double> x, std::span<double> m, std::span<double> r) {
        chemical_potential(x, phi_old, cfg.theta_stab, m);
        kernels::div_b_grad(grid_, b.x, b.y, m, r);
        const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < nn; ++k)
            r[k] = (x[k] - phi_old[k]) - dt * r[k];
        return std::sqrt(kernels::dot(r, r) / static_cast<double>(n));
    };

    double rnorm = residual(phi, mu, res);
    const double lim = 1.0 - kClamp;
    bool converged = rnorm <= cfg.newton_tol;
    int it = 0;
    while (!converged && it < cfg.newton_max) {
        ++it;
        for (std::size_t k = 0; k < n; ++k)
            diag[k] = p_.theta / ((1.0 - phi[k]) * (1.0 + phi[k])) + cfg.theta_stab;
        const double cbar = kernels::sum(diag) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k)
            symbol[k] = 1.0 + dt * bbar * neg_lap_[k] * (neg_lap_[k] + cbar);

        auto apply_j = [&](std::span<const double> v, std::span<double> out) {
            kernels::laplacian(grid_, v, tmp);
            for (std::size_t k = 0; k < n; ++k)
                tmp[k] = diag[k] * v[k] - tmp[k];
            kernels::div_b_grad(grid_, b.x, b.y, tmp, out);
            for (std::size_t k = 0; k < n; ++k)
                out[k] = v[k] - dt * out[k];
        };
        auto apply_p = [&](std::span<const double> v, std::span<double> out) {
            transform_->solve_modal(v, out, symbol);
        };
        for (std::size_t k = 0; k < n; ++k)
            rhs[k] = -res[k];
        std::fill(delta.begin(), delta.end(), 0.0);
        const KrylovResult lin =
            gmres(apply_j, apply_p, rhs, delta, cfg.linear_tol, cfg.linear_max, cfg.gmres_restart);
        stats.linear_iters += lin.iterations;
        project_out_mean(delta);

        // Damped update: stay strictly inside the clamp interval and reduce the residual.
        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving, alpha *= 0.5) {
            bool inside = true;
            for (std::size_t k = 0; k < n; ++k) {
                trial[k] = phi[k] + alpha * delta[k];
                if (!(std::abs(trial[k]) < lim))
                    inside = false;
            }
            if (!inside) {
                stats.clamped = true;
                continue;
            }
            const double rt = residual(trial, trial_mu, trial_res);
            if (rt < rnorm || rt <= cfg.newton_tol) {
                phi.swap(trial);
                mu.swap(trial_mu);
                res.swap(trial_res);
                rnorm = rt;
                accepted = true;
            }
        }
        if (!accepted)
            break;
        converged = rnorm <= cfg.newton_tol;
    }
    stats.newton_iters = it;
    stats.residual = rnorm;
    if (!converged)
        return false;

    ScalarField new_phi(grid_, std::move(phi));
    const double e_old = energy(state.phi, p_);
    const double e_new = energy(new_phi, p_);
    stats.energy_change = e_new - e_old;
    stats.dissipation = dt * kernels::weighted_grad_sq(grid_, b.x, b.y, mu);

    state.phi = std::move(new_phi);
    state.mu = ScalarField(grid_, std::move(mu));
    state.t += dt;
    state.step += 1;
    return true;
}

SimState step(const SimState& state, const StepperConfig& cfg, const PotentialParams& p,
              const MobilitySpec& spec)
{
    validate(cfg);
    Stepper stepper(state.phi.grid(), p, spec);
    SimState next = state;
    StepStats stats;
    if (!stepper.try_step(next, cfg.dt, cfg, stats)) {
        std::ostringstream msg;
        msg << "Newton did not converge: residual " << stats.residual << " after "
            << stats.newton_iters << " iterations at dt " << cfg.dt;
        throw StepFailure(msg.str(), stats);
    }
    return next;
}

DtDecision adaptive_dt(std::span<const StepStats> tail, const StepperConfig& cfg, double dt)
{
    const auto& a = cfg.adaptive;
    DtDecision d{dt, false};
    if (tail.empty())
        return d;
    const StepStats& last = tail.back();
    const bool hard = 3 * last.newton_iters > 2 * cfg.newton_max ||
                      last.energy_change > 10.0 * cfg.newton_tol;
    if (hard) {
        if (dt <= a.dt_min) {
            d.warning = true;
            d.dt = a.dt_min;
        } else {
            d.dt = std::max(dt * a.shrink, a.dt_min);
        }
        return d;
    }
    constexpr std::size_t kEasyRun = 10;
    if (tail.size() >= kEasyRun) {
        bool easy = true;
        for (std::size_t k = tail.size() - kEasyRun; k < tail.size(); ++k)
            easy = easy && tail[k].newton_iters <= 5;
        if (easy)
            d.dt = std::min(dt * a.grow, a.dt_max);
    }
    d.dt = std::clamp(d.dt, a.dt_min, a.dt_max);
    return d;
}

LedgerRow measure(const SimState& state, const PotentialParams& p, const MobilitySpec& spec)
{
    LedgerRow row;
    row.t = state.t;
    row.mass = mean(state.phi);
    row.E = energy(state.phi, p);
    row.E0 = energy_convex(state.phi, p);
    row.grad_mu_sq = grad_norm_sq(state.mu);
    row.Lambda = weighted_grad_norm_sq(spec.faces(state.phi), state.mu);
    row.B = 1.0 + row.Lambda;
    double sep = 1.0;
    for (double v : state.phi.values())
        sep = std::min(sep, 1.0 - std::abs(v));
    row.sep = std::clamp(sep, 0.0, 1.0);
    row.mu_bar = mean(state.mu);
    return row;
}

namespace {

std::vector<StepStats> tail_from(const RunLedger& ledger, std::size_t count)
{
    std::vector<StepStats> tail;
    const std::size_t n = ledger.rows.size();
    const std::size_t first = n > count ? n - count : 1;
    for (std::size_t k = std::max<std::size_t>(first, 1); k < n; ++k) {
        StepStats s;
        s.dt = ledger.rows[k].dt;
        s.newton_iters = ledger.rows[k].newton_iters;
        s.energy_change = ledger.rows[k].E - ledger.rows[k - 1].E;
        tail.push_back(s);
    }
    return tail;
}

} // namespace

void advance(SimState& state, RunLedger& ledger, double T, StepperConfig& cfg,
             const PotentialParams& p, const MobilitySpec& spec, const RunHooks& hooks)
{
    validate(cfg);
    Stepper stepper(state.phi.grid(), p, spec);
    const bool adaptive = cfg.adaptive.enabled;
    const double t_start = state.t;
    const long step_start = state.step;
    double dt = cfg.dt;
    while (true) {
        double h = dt;
        if (adaptive) {
            if (state.t >= T * (1.0 - 1e-14) || T - state.t <= 1e-14 * std::max(1.0, T))
                break;
            h = std::min(dt, T - state.t);
        } else {
            const double next_t = t_start + static_cast<double>(state.step - step_start) * dt;
            if (next_t >= T - 1e-9 * dt)
                break;
        }
        const ScalarField phi_prev = state.phi;
        StepStats stats;
        const double t_before = state.t;
        bool ok = stepper.try_step(state, h, cfg, stats);
        while (!ok) {
            if (!adaptive || h <= cfg.adaptive.dt_min) {
                std::ostringstream msg;
                msg << "Newton did not converge at t = " << state.t << ", dt = " << h
                    << ": residual " << stats.residual << " after " << stats.newton_iters
                    << " iterations";
                throw StepFailure(msg.str(), stats);
            }
            h = std::max(h * cfg.adaptive.shrink, cfg.adaptive.dt_min);
            dt = h;
            ok = stepper.try_step(state, h, cfg, stats);
        }
        if (!adaptive)
            state.t = t_start + static_cast<double>(state.step - step_start) * dt;
        else
            state.t = t_before + h;

        LedgerRow row = measure(state, p, spec);
        row.dt = h;
        row.newton_iters = stats.newton_iters;
        row.linear_iters = stats.linear_iters;
        row.clamped = stats.clamped;
        row.cum_dissipation = (ledger.empty() ? 0.0 : ledger.back().cum_dissipation) + stats.dissipation;
        row.hm1_increment = hm1_norm(subtract_mean(state.phi - phi_prev));
        ledger.rows.push_back(row);
        if (hooks.on_row)
            hooks.on_row(state, row);

        if (adaptive) {
            const auto tail = tail_from(ledger, 12);
            dt = adaptive_dt(tail, cfg, dt).dt;
        }
    }
    cfg.dt = dt;
}

RunResult run(const ScalarField& phi0, double T, const StepperConfig& cfg, const PotentialParams& p,
              const MobilitySpec& spec, const RunHooks& hooks)
{
    validate(cfg);
    RunResult out;
    out.state = make_state(phi0, p);
    LedgerRow row0 = measure(out.state, p, spec);
    out.ledger.rows.push_back(row0);
    if (hooks.on_row)
        hooks.on_row(out.state, row0);
    StepperConfig local = cfg;
    advance(out.state, out.ledger, T, local, p, spec, hooks);
    return out;
}

} // namespace chfh
