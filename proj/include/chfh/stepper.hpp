#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chfh/dct.hpp"
#include "chfh/grid.hpp"
#include "chfh/ledger.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// Trajectory state. mu is the discrete chemical potential that drove the
/// most recent step (at step 0 it is -Lap_h phi + Psi'(phi)).
struct SimState {
    ScalarField phi;
    ScalarField mu;
    double t = 0.0;
    long step = 0;
    double mass0 = 0.0;
};

/// Builds the initial state: clamps phi into the open interval, computes mu
/// from the constitutive relation and caches the mass. Throws
/// std::invalid_argument if |phi| > 1 somewhere or the mean is not interior.
SimState make_state(const ScalarField& phi0, const PotentialParams& p);

struct AdaptiveConfig {
    bool enabled = false;
    double dt_min = 1e-8;
    double dt_max = 1.0;
    double shrink = 0.5;
    double grow = 1.5;
};

struct StepperConfig {
    double dt = 1e-4;
    double newton_tol = 1e-10;  ///< RMS of the dt-scaled residual
    int newton_max = 30;
    double theta_stab = 0.0;
    AdaptiveConfig adaptive;
    double linear_tol = 1e-4;   ///< relative GMRES tolerance per Newton iteration
    int linear_max = 400;
    int gmres_restart = 40;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const StepperConfig& cfg);

struct StepStats {
    double dt = 0.0;
    int newton_iters = 0;
    int linear_iters = 0;
    double residual = 0.0;
    bool clamped = false;          ///< line search had to pull an iterate inside
    double energy_change = 0.0;    ///< E(phi_new) - E(phi_old)
    double dissipation = 0.0;      ///< dt * sum b(phi_old) |grad mu_new|^2
};

/// Raised when Newton fails and the step size cannot be reduced further.
class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, StepStats stats)
        : std::runtime_error(what), stats_(stats) {}
    const StepStats& stats() const { return stats_; }

private:
    StepStats stats_;
};

/// Convex-splitting step with lagged mobility:
///   (phi - phi_n)/dt = div_h(b(phi_n) grad_h mu),
///   mu = -Lap_h phi + F'(phi) - theta0 phi_n + theta_stab (phi - phi_n),
/// solved by damped Newton. Each Newton system is solved by GMRES
/// preconditioned with its constant-coefficient cosine-transform analogue.
class Stepper {
public:
    Stepper(const Grid& grid, PotentialParams p, MobilitySpec spec);

    /// Attempts one step of size dt. Returns false (state untouched) if Newton
    /// does not converge; stats are filled in either case.
    bool try_step(SimState& state, double dt, const StepperConfig& cfg, StepStats& stats);

    const PotentialParams& potential() const { return p_; }
    const MobilitySpec& mobility() const { return spec_; }

private:
    void chemical_potential(std::span<const double> phi, std::span<const double> phi_old,
                            double theta_stab, std::span<double> mu) const;

    Grid grid_;
    PotentialParams p_;
    MobilitySpec spec_;
    std::shared_ptr<const CosineTransform> transform_;
    std::vector<double> neg_lap_;
};

/// One step with cfg.dt. Throws StepFailure on Newton failure.
SimState step(const SimState& state, const StepperConfig& cfg, const PotentialParams& p,
              const MobilitySpec& spec);

struct DtDecision {
    double dt = 0.0;
    bool warning = false;  ///< shrink requested at dt_min
};

/// Step-size rule: shrink when the last step needed more than 2/3 of
/// newton_max iterations or raised the energy beyond 10 newton_tol; grow when
/// the last 10 steps each needed at most 5 iterations. Clamped to
/// [dt_min, dt_max].
DtDecision adaptive_dt(std::span<const StepStats> tail, const StepperConfig& cfg, double dt);

struct RunHooks {
    /// Called after every accepted step (and once for the initial state).
    std::function<void(const SimState&, const LedgerRow&)> on_row;
};

struct RunResult {
    SimState state;
    RunLedger ledger;
};

/// Ledger row for a state; dissipation and step fields are left to the caller.
LedgerRow measure(const SimState& state, const PotentialParams& p, const MobilitySpec& spec);

/// Advances phi0 to t >= T.
RunResult run(const ScalarField& phi0, double T, const StepperConfig& cfg,
              const PotentialParams& p, const MobilitySpec& spec, const RunHooks& hooks = {});

/// Continues an existing state to t >= T, appending to ledger. With adaptive
/// stepping cfg.dt is left at the step size the rule picked last.
void advance(SimState& state, RunLedger& ledger, double T, StepperConfig& cfg,
             const PotentialParams& p, const MobilitySpec& spec, const RunHooks& hooks = {});

} // namespace chfh
