#pragma once

#include <string>

#include "chfh/grid.hpp"
#include "chfh/ledger.hpp"
#include "chfh/stepper.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// ||-Lap_h phi + Psi'(phi) - mean(Psi'(phi))||_2 / sqrt(|Omega|). Throws
/// std::domain_error unless |phi| < 1 everywhere.
double stationarity_residual(const ScalarField& phi, const PotentialParams& p);

enum class SteadyMethod { long_time_integration, damped_newton };

struct SteadyConfig {
    double tol_residual = 1e-9;
    double tol_gradmu = 1e-8;
    double max_time = 1e4;
    SteadyMethod method = SteadyMethod::long_time_integration;
    /// damped_newton switches from integration to Newton once ||grad mu||
    /// drops below this.
    double polish_start = 1e-2;
    int newton_max = 50;
    StepperConfig stepper = default_stepper();

    static StepperConfig default_stepper();
};

/// Throws std::invalid_argument listing every bad field.
void validate(const SteadyConfig& cfg);

struct SteadyResult {
    ScalarField phi;
    bool converged = false;
    double residual = 0.0;
    double grad_mu = 0.0;   ///< ||grad_h mu|| of the last integrated state
    double time = 0.0;      ///< simulated time spent integrating
    long steps = 0;
    int newton_iters = 0;   ///< polish iterations, 0 without polish
    RunLedger ledger;
};

/// Stationary state with mean m reached from init. Integrates the flow with
/// adaptive steps over output intervals that double in length, and with
/// damped_newton finishes with a Newton solve of the mass-constrained
/// stationary system. If max_time passes first the state with the smallest
/// residual is returned with converged = false.
/// Throws std::invalid_argument if m is not interior or mean(init) != m.
SteadyResult solve_stationary(double m, const ScalarField& init, const SteadyConfig& cfg,
                              const PotentialParams& p, const MobilitySpec& spec);

/// Growth rate of the cosine mode with -Lap eigenvalue s at the constant
/// state m: -b(m) s (s + Psi''(m)).
double linear_growth_rate(double s, double m, const PotentialParams& p, const MobilitySpec& spec);

/// True when every nonzero discrete Neumann mode of the grid decays at m.
bool constant_state_stable(const Grid& g, double m, const PotentialParams& p, const MobilitySpec& spec);

enum class OmegaVerdict { converging, stalled, oscillating };
std::string to_string(OmegaVerdict v);

struct OmegaReport {
    OmegaVerdict verdict = OmegaVerdict::converging;
    double grad_mu_previous = 0.0;   ///< mean ||grad mu|| over the window before the last
    double grad_mu_last = 0.0;       ///< mean ||grad mu|| over the last window
    double increment_previous = 0.0; ///< sum of H^{-1} step increments over the previous window
    double increment_last = 0.0;
    int sign_changes = 0;            ///< sign changes of d||grad mu|| in the last window
};

/// Trend verdict over the trailing window rows compared with the window before
/// it. Indicators below floor count as converged. Throws
/// std::invalid_argument if the ledger has fewer than 2 window rows.
OmegaReport omega_limit_monitor(const RunLedger& ledger, std::size_t window, double floor = 1e-10);

} // namespace chfh
