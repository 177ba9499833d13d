#pragma once

// Numerical checks of the analytic inequalities behind the well-posedness
// theory: two Gronwall-type inequalities with ODE oracles, a blow-up comparison for
// the second-energy differential inequality, a Gagliardo-Nirenberg sweep and
// an elliptic H^2 estimate. Every report is certification by sampling.

#include <cstdint>
#include <vector>

#include "chfh/grid.hpp"
#include "chfh/random.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// Data of f' <= (M/sigma) g f^{1+sigma}, sigma in (0, delta), on [0, T0].
/// g is a step function: g[k] holds on [k T0/n, (k+1) T0/n).
struct OdeSpec {
    double f0 = 1.0;
    double M = 1.0;
    double delta = 0.5;
    double sigma = 0.25;
    std::vector<double> g;
    double T0 = 1.0;

    double g_integral() const;
};

/// Throws std::invalid_argument if an invariant fails.
void validate(const OdeSpec& spec);

struct BoundValue {
    double value = 0.0;      ///< +inf on overflow
    double log_value = 0.0;  ///< natural log, finite whenever the inputs are
    bool overflow = false;
};

/// f0 (2^{1/delta} + f0)^{2^{2 + 16 M int g}}.
BoundValue singular_gronwall_bound(const OdeSpec& spec);
BoundValue singular_gronwall_bound(double f0, double M, double delta, double g_integral);

/// (a1 / r + a3) e^{a2}. Throws std::invalid_argument for negative data or r <= 0.
double uniform_gronwall_bound(double a1, double a2, double a3, double r);

struct OdeSolution {
    std::vector<double> t;
    std::vector<double> log_f;  ///< natural log of the solution at t
    int steps_per_piece = 0;    ///< RK4 steps per piece of g after refinement
    double self_consistency = 0.0; ///< max |log f_h - log f_{h/2}| at the last refinement
    bool blew_up = false;       ///< solution left the double range before T0
};

/// Largest right-hand side compatible with the hypothesis for every sigma in
/// (0, delta): M g inf_sigma f^{1+sigma}/sigma, which equals M g f^{1+delta}/delta
/// when ln f <= 1/delta and M g e f ln f otherwise. Its solution dominates every
/// function satisfying the hypothesis.
OdeSolution solve_envelope_ode(const OdeSpec& spec, double tol = 1e-6);

/// f' = (M/sigma) g f^{1+sigma} for the single sigma of the spec. This meets
/// the hypothesis only for that sigma and may blow up.
OdeSolution solve_single_sigma_ode(const OdeSpec& spec, double tol = 1e-6);

/// Random spec; deterministic in (seed, index).
OdeSpec random_ode_spec(std::uint64_t seed, int index);

struct GronwallCase {
    OdeSpec spec;
    double log_bound = 0.0;
    double log_max = 0.0;   ///< max of log f over the envelope solution
    bool violated = false;
    double self_consistency = 0.0;
    bool single_sigma_blew_up = false;
    bool single_sigma_exceeds = false;
};

struct GronwallReport {
    std::vector<GronwallCase> cases;
    int violations = 0;
    int single_sigma_exceed = 0;   ///< informational: the single-sigma ODE is not a valid instance
    double worst_self_consistency = 0.0;
};

GronwallReport gronwall_suite(std::uint64_t seed, int count = 50);

/// f' = g f + h on [t0, t0 + horizon] with step functions g, h >= 0 on
/// uniform pieces and window length r.
struct UniformGronwallCase {
    double f0 = 1.0;
    double horizon = 5.0;
    double r = 1.0;
    std::vector<double> g, h;
    // Filled by the oracle.
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double bound = 0.0;
    double max_f = 0.0;  ///< max f(t) over t >= t0 + r
    double self_consistency = 0.0;
    bool violated = false;
};

UniformGronwallCase random_uniform_gronwall_case(std::uint64_t seed, int index);
/// Integrates the case with RK4 (step doubling to tol, relative), evaluates the
/// window integrals on the same nodes and checks f against the bound.
void evaluate_uniform_gronwall(UniformGronwallCase& c, double tol = 1e-6);

struct UniformGronwallReport {
    std::vector<UniformGronwallCase> cases;
    int violations = 0;
    double worst_self_consistency = 0.0;
    double tightest = 0.0;  ///< max f / bound
};

UniformGronwallReport uniform_gronwall_suite(std::uint64_t seed, int count = 50);

struct BlowupCase {
    double rho = 0.0;
    double blowup_time = 0.0;        ///< numerical
    double blowup_time_exact = 0.0;  ///< rho / (K (1 + 2 rho) B0^{1 + 2 rho})
    bool before_first_output = false;
    /// Max over pre-blow-up nodes of B / local bound, the bound being
    /// B0 [1 - 2K B0^{2 rho} int B]^{-1/(2 rho)}.
    double local_bound_ratio = 0.0;
    /// Min over pre-blow-up nodes of log(global bound) - log B with M = 2K,
    /// sigma = 2 rho, delta = 1/2, g = B.
    double global_log_margin = 0.0;
    bool global_bound_holds = false;
    int windows = 0;
    double int_B_at_blowup = 0.0;    ///< tends to B0^{-2 rho} / (2K)
};

struct BlowupReport {
    double K = 0.0, B0 = 0.0, T = 0.0;
    std::vector<BlowupCase> cases;
    bool blowup_decreasing_in_rho = false;  ///< strictly smaller blow-up time for smaller rho
    bool all_global_bounds_hold = false;
};

/// Saturated ODE B' = (K/rho) B^{2(1+rho)} for each rho. Integrated with log B
/// as the independent variable, which keeps the integrands smooth up to the
/// singularity; the blow-up event is log B = log B0 + 60. Outputs are
/// reported at the nodes with t <= T. Throws std::invalid_argument unless
/// K > 0, B0 >= 1 and every rho lies in (0, 1/4).
BlowupReport bb_ode_comparison(double K, const std::vector<double>& rho_list, double B0, double T);

struct GnRow {
    double r = 0.0;
    double max_ratio = 0.0;           ///< ||f||_r / (sqrt(r) ||f||_2^{2/r} ||f||_{H1}^{1-2/r})
    double max_ratio_unscaled = 0.0;  ///< same without sqrt(r)
    double max_dual_ratio = 0.0;      ///< ||f||_{(H1)'} / (sqrt(r/(r-1)) ||f||_r)
};

struct GnReport {
    std::vector<GnRow> rows;
    double slope = 0.0;  ///< least-squares slope of log max_ratio against log r
    int samples = 0;
};

/// Fields are band_limited_field(grid, spec with seed spec.seed + k), k < samples,
/// on stream::gn_sweep. Throws std::invalid_argument for r outside [2, 64].
GnReport gn_inequality_sweep(const Grid& grid, const RandomFieldSpec& spec, const std::vector<double>& r_list,
                             int samples = 100);

/// GN ratio of one field.
double gn_ratio(const ScalarField& f, double r);

/// H^{-1}-type dual norm of H^1: sqrt((f, (I - Lap_h)^{-1} f)).
double dual_h1_norm(const ScalarField& f);

// Discrete Sobolev norms. ||f||^2_{H2} = ||f||^2 + ||grad f||^2 + ||Lap f||^2
// + ||mixed second differences||^2, with the mixed differences taken at
// interior vertices.
double h1_norm(const ScalarField& f);
double h2_norm(const ScalarField& f);
/// H^2 plus ||grad_h Lap_h f||^2.
double h3_norm(const ScalarField& f);
/// Fourth-power version of h2_norm built from L^4 norms.
double w24_norm(const ScalarField& f);

struct H2Sample {
    double lhs = 0.0;        ///< ||G_q f||_{H2}
    double grad_q = 0.0;     ///< ||grad q||
    double q_h2 = 0.0;       ///< ||q||_{H2}
    double grad_u = 0.0;     ///< ||grad G_q f||
    double f_l2 = 0.0;
};

struct H2Row {
    double s = 0.0;
    double c_star = 0.0;           ///< smallest C for the main-text form
    double c_star_alt = 0.0;  ///< same with an extra factor 2^{s/4} on the first term
};

struct H2Report {
    std::vector<H2Row> rows;
    double c_h2 = 0.0;    ///< smallest C in ||G_q f||_{H2} <= C(||grad q|| ||q||_{H2} ||grad G_q f|| + ||f||)
    double c_w24 = 0.0;   ///< extended mode only
    double c_h3 = 0.0;    ///< extended mode only
    int samples = 0;
};

/// Smallest C > 0 with lhs <= (C^2 s^2/(s-2))^{s/4} P^{(s-2)/2} Q W + (s C/2) F,
/// found by bisection (the right side increases with C). extra multiplies the
/// first term. Returns 0 when lhs = 0.
double h2bb_min_constant(const H2Sample& x, double s, double extra = 1.0);

H2Sample h2_sample(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec);

/// Random (q, f) pairs with |q| <= 0.9 and zero-mean f, one RNG stream per sample.
H2Report h2bb_estimate_report(const Grid& grid, const MobilitySpec& spec, std::uint64_t seed, int samples,
                              const std::vector<double>& s_list, bool extended = false);

/// Same on explicit samples.
H2Report h2bb_estimate_report(const std::vector<ScalarField>& q_samples, const std::vector<ScalarField>& f_samples,
                              const MobilitySpec& spec, const std::vector<double>& s_list, bool extended = false);

} // namespace chfh
