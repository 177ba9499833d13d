#pragma once

#include <array>
#include <vector>

#include "chfh/grid.hpp"
#include "chfh/ledger.hpp"
#include "chfh/stepper.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// |E(end) + cum_dissipation(end) - E(start)|. Throws std::invalid_argument
/// for ledgers with fewer than two rows.
double energy_balance_defect(const RunLedger& ledger);

/// min over cells of 1 - |phi|, clamped to [0, 1].
double separation_margin(const ScalarField& phi);

struct MuMeanCheck {
    double mu_bar = 0.0;   ///< mean of Psi'(phi)
    double grad_mu = 0.0;  ///< ||grad_h mu||
    double ratio = 0.0;    ///< |mu_bar| / (1 + ||grad_h mu||)
};

MuMeanCheck mu_mean_check(const SimState& state, const PotentialParams& p);

/// Largest |mu_bar| / (1 + ||grad_h mu||) over the rows with t <= t_max.
double mu_mean_ratio_max(const RunLedger& ledger, double t_max);

struct DependencePoint {
    double t = 0.0;
    double d = 0.0;      ///< ||sqrt(b(phi1)) grad G_{phi1}(phi1 - phi2)||
    double d_sym = 0.0;  ///< same with phi2 carrying the weight
    double hm1 = 0.0;    ///< ||grad G(phi1 - phi2)||
};

struct DependenceReport {
    std::vector<DependencePoint> points;
    double d0 = 0.0;
    double dT = 0.0;
    double c_emp = 0.0;      ///< max_t d(t) / d(0); zero when d(0) = 0
    double c_emp_sym = 0.0;
    /// Largest relative violation of sqrt(b_m) d <= hm1 <= sqrt(b_M) d.
    double sandwich_violation = 0.0;
};

/// Evolves both data with the same fixed-step configuration, one trajectory
/// per thread, and evaluates the weighted distance every cadence steps and at
/// the final time. Throws std::invalid_argument if the means differ by more
/// than 1e-12, if the grids differ, if cfg is adaptive or if the mobility is
/// degenerate.
DependenceReport continuous_dependence_experiment(const ScalarField& phi1_0, const ScalarField& phi2_0,
                                                  double T, const StepperConfig& cfg,
                                                  const PotentialParams& p, const MobilitySpec& spec,
                                                  int cadence = 10);

inline constexpr std::array<double, 3> kLambdaTaus{0.1, 0.5, 1.0};

struct LambdaBSeries {
    std::vector<double> t;
    std::vector<double> Lambda;
    std::vector<double> B;
    /// sup of Lambda over t >= tau for each tau in kLambdaTaus; NaN if no row qualifies.
    std::array<double, 3> sup{};
};

LambdaBSeries lambda_b_series(const RunLedger& ledger);

} // namespace chfh
