#include "chfh/steady.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chfh/dct.hpp"
#include "chfh/discrete.hpp"
#include "chfh/kernels.hpp"
#include "chfh/krylov.hpp"

namespace chfh {

namespace {

void stationary_residual(const Grid& g, std::span<const double> phi, const PotentialParams& p,
                         std::span<double> r)
{
    kernels::laplacian(g, phi, r);
    for (std::size_t k = 0; k < phi.size(); ++k)
        r[k] = psi_prime(phi[k], p) - r[k];
    project_out_mean(r);
}

double rms(std::span<const double> r)
{
    return std::sqrt(kernels::dot(r, r) / static_cast<double>(r.size()));
}

} // namespace

double stationarity_residual(const ScalarField& phi, const PotentialParams& p)
{
    for (double v : phi.values())
        if (!(std::abs(v) < 1.0))
            throw std::domain_error("stationarity_residual needs |phi| < 1");
    std::vector<double> r(phi.size());
    stationary_residual(phi.grid(), phi.values(), p, r);
    // Cells all have the same area, so the normalized L2 norm is the RMS.
    return rms(r);
}

StepperConfig SteadyConfig::default_stepper()
{
    StepperConfig s;
    s.dt = 1e-3;
    s.adaptive.enabled = true;
    s.adaptive.dt_min = 1e-8;
    s.adaptive.dt_max = 0.5;
    return s;
}

void validate(const SteadyConfig& cfg)
{
    std::vector<std::string> bad;
    if (!(cfg.tol_residual > 0.0))
        bad.emplace_back("tol_residual must be positive");
    if (!(cfg.tol_gradmu > 0.0))
        bad.emplace_back("tol_gradmu must be positive");
    if (!(cfg.max_time > 0.0))
        bad.emplace_back("max_time must be positive");
    if (!(cfg.polish_start > 0.0))
        bad.emplace_back("polish_start must be positive");
    if (cfg.newton_max < 1)
        bad.emplace_back("newton_max must be at least 1");
    try {
        validate(cfg.stepper);
    } catch (const std::invalid_argument& e) {
        bad.emplace_back(e.what());
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        for (std::size_t k = 0; k < bad.size(); ++k)
            msg << (k ? "; " : "") << bad[k];
        throw std::invalid_argument(msg.str());
    }
}

namespace {

/// Damped Newton on P(-Lap phi + Psi'(phi)) = 0 over zero-mean increments, so
/// the mean multiplier is eliminated by the projection P. Returns true when
/// the RMS residual reaches tol.
bool newton_polish(ScalarField& field, const PotentialParams& p, double tol, int max_iter, int& iters)
{
    const Grid& g = field.grid();
    const std::size_t n = g.size();
    const auto transform = CosineTransform::for_grid(g);
    std::vector<double> neg_lap(n);
    for (int l = 0; l < g.ny; ++l)
        for (int k = 0; k < g.nx; ++k)
            neg_lap[g.index(k, l)] = -(transform->eigen_x()[k] + transform->eigen_y()[l]);

    std::vector<double> phi(field.data()), r(n), diag(n), symbol(n), tmp(n), delta(n), rhs(n),
        trial(n), trial_r(n);
    stationary_residual(g, phi, p, r);
    double rnorm = rms(r);
    const double lim = 1.0 - kClamp;
    iters = 0;
    while (rnorm > tol && iters < max_iter) {
        ++iters;
        double convex_mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double fs = p.theta / ((1.0 - phi[k]) * (1.0 + phi[k]));
            diag[k] = fs - p.theta0;
            convex_mean += fs;
        }
        convex_mean /= static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k)
            symbol[k] = neg_lap[k] + convex_mean;
        symbol[0] = 0.0;  // the constant mode is projected out

        auto apply_j = [&](std::span<const double> v, std::span<double> out) {
            kernels::laplacian(g, v, tmp);
            for (std::size_t k = 0; k < n; ++k)
                out[k] = diag[k] * v[k] - tmp[k];
            project_out_mean(out);
        };
        auto apply_m = [&](std::span<const double> v, std::span<double> out) {
            transform->solve_modal(v, out, symbol);
        };
        for (std::size_t k = 0; k < n; ++k)
            rhs[k] = -r[k];
        std::fill(delta.begin(), delta.end(), 0.0);
        gmres(apply_j, apply_m, rhs, delta, 1e-10, 2000, 60);
        project_out_mean(delta);

        bool accepted = false;
        double alpha = 1.0;
        for (int halving = 0; halving < 40 && !accepted; ++halving, alpha *= 0.5) {
            bool inside = true;
            for (std::size_t k = 0; k < n; ++k) {
                trial[k] = phi[k] + alpha * delta[k];
                inside = inside && std::abs(trial[k]) < lim;
            }
            if (!inside)
                continue;
            stationary_residual(g, trial, p, trial_r);
            const double rt = rms(trial_r);
            if (rt < rnorm) {
                phi.swap(trial);
                r.swap(trial_r);
                rnorm = rt;
                accepted = true;
            }
        }
        if (!accepted)
            break;
    }
    field = ScalarField(g, std::move(phi));
    return rnorm <= tol;
}

double constitutive_grad_mu(const ScalarField& phi, const PotentialParams& p)
{
    return std::sqrt(grad_norm_sq(psi_prime_field(phi, p) - laplacian_neumann(phi)));
}

} // namespace

SteadyResult solve_stationary(double m, const ScalarField& init, const SteadyConfig& cfg,
                              const PotentialParams& p, const MobilitySpec& spec)
{
    validate(cfg);
    if (!(std::abs(m) < 1.0))
        throw std::invalid_argument("solve_stationary: mean must lie in (-1, 1)");
    if (std::abs(mean(init) - m) > 1e-12)
        throw std::invalid_argument("solve_stationary: mean of the initial field differs from m");

    SimState state = make_state(init, p);
    SteadyResult out;
    out.ledger.rows.push_back(measure(state, p, spec));

    auto done = [&](double res, double gm) { return res <= cfg.tol_residual && gm <= cfg.tol_gradmu; };

    double best_res = stationarity_residual(state.phi, p);
    out.phi = state.phi;
    out.residual = best_res;
    out.grad_mu = std::sqrt(grad_norm_sq(state.mu));
    if (done(out.residual, out.grad_mu)) {
        out.phi = init;
        out.converged = true;
        return out;
    }

    StepperConfig stepper = cfg.stepper;
    const double e_init = energy(state.phi, p);
    double interval = 1.0;
    while (state.t < cfg.max_time) {
        const double target = std::min(state.t + interval, cfg.max_time);
        interval *= 2.0;
        advance(state, out.ledger, target, stepper, p, spec);
        out.time = state.t;
        out.steps = state.step;

        const double res = stationarity_residual(state.phi, p);
        const double gm = std::sqrt(grad_norm_sq(state.mu));
        if (res < best_res) {
            best_res = res;
            out.phi = state.phi;
            out.residual = res;
            out.grad_mu = gm;
        }
        if (done(res, gm)) {
            out.phi = state.phi;
            out.residual = res;
            out.grad_mu = gm;
            out.converged = true;
            return out;
        }

        if (cfg.method == SteadyMethod::damped_newton && gm <= cfg.polish_start) {
            ScalarField polished = state.phi;
            int iters = 0;
            const bool ok = newton_polish(polished, p, cfg.tol_residual, cfg.newton_max, iters);
            out.newton_iters += iters;
            const double e_pol = energy(polished, p);
            const double e_now = energy(state.phi, p);
            // Newton may land on a saddle above the trajectory; keep descent.
            if (ok && e_pol <= e_now + 1e-10 * std::max(1.0, std::abs(e_now)) &&
                e_pol <= e_init + 1e-10 * std::max(1.0, std::abs(e_init))) {
                const double gp = constitutive_grad_mu(polished, p);
                const double rp = stationarity_residual(polished, p);
                if (done(rp, gp)) {
                    out.phi = std::move(polished);
                    out.residual = rp;
                    out.grad_mu = gp;
                    out.converged = true;
                    return out;
                }
            }
        }
    }
    out.converged = false;
    return out;
}

double linear_growth_rate(double s, double m, const PotentialParams& p, const MobilitySpec& spec)
{
    const double psi2 = f_second(m, p) - p.theta0;
    return -spec(m) * s * (s + psi2);
}

bool constant_state_stable(const Grid& g, double m, const PotentialParams& p, const MobilitySpec& spec)
{
    const auto lx = neumann_eigenvalues(g.nx, g.hx);
    const auto ly = neumann_eigenvalues(g.ny, g.hy);
    for (double a : lx)
        for (double b : ly) {
            const double s = -(a + b);
            if (s > 0.0 && !(linear_growth_rate(s, m, p, spec) < 0.0))
                return false;
        }
    return true;
}

std::string to_string(OmegaVerdict v)
{
    switch (v) {
    case OmegaVerdict::converging:
        return "converging";
    case OmegaVerdict::stalled:
        return "stalled";
    case OmegaVerdict::oscillating:
        return "oscillating";
    }
    return "unknown";
}

OmegaReport omega_limit_monitor(const RunLedger& ledger, std::size_t window, double floor)
{
    if (window < 2 || ledger.size() < 2 * window)
        throw std::invalid_argument("omega_limit_monitor: ledger must span at least two windows of >= 2 rows");
    const std::size_t n = ledger.size();
    const std::size_t last = n - window, prev = n - 2 * window;
    OmegaReport rep;
    for (std::size_t k = prev; k < last; ++k) {
        rep.grad_mu_previous += std::sqrt(ledger.rows[k].grad_mu_sq);
        rep.increment_previous += ledger.rows[k].hm1_increment;
    }
    for (std::size_t k = last; k < n; ++k) {
        rep.grad_mu_last += std::sqrt(ledger.rows[k].grad_mu_sq);
        rep.increment_last += ledger.rows[k].hm1_increment;
    }
    rep.grad_mu_previous /= static_cast<double>(window);
    rep.grad_mu_last /= static_cast<double>(window);

    int prev_sign = 0;
    for (std::size_t k = last + 1; k < n; ++k) {
        const double d = std::sqrt(ledger.rows[k].grad_mu_sq) - std::sqrt(ledger.rows[k - 1].grad_mu_sq);
        const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign)
            ++rep.sign_changes;
        if (sign != 0)
            prev_sign = sign;
    }

    const bool settled = rep.grad_mu_last <= floor && rep.increment_last <= floor;
    const bool decaying = rep.grad_mu_last < rep.grad_mu_previous &&
                          rep.increment_last <= rep.increment_previous;
    if (settled || decaying)
        rep.verdict = OmegaVerdict::converging;
    else if (2 * rep.sign_changes > static_cast<int>(window))
        rep.verdict = OmegaVerdict::oscillating;
    else
        rep.verdict = OmegaVerdict::stalled;
    return rep;
}

} // namespace chfh
