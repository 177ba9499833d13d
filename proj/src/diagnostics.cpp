#include "chfh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "chfh/discrete.hpp"
#include "chfh/elliptic.hpp"

namespace chfh {

double energy_balance_defect(const RunLedger& ledger)
{
    if (ledger.size() < 2)
        throw std::invalid_argument("energy_balance_defect needs at least two ledger rows");
    return std::abs(ledger.back().E + ledger.back().cum_dissipation - ledger.front().E);
}

double separation_margin(const ScalarField& phi)
{
    double sep = 1.0;
    for (double v : phi.values())
        sep = std::min(sep, 1.0 - std::abs(v));
    return std::clamp(sep, 0.0, 1.0);
}

MuMeanCheck mu_mean_check(const SimState& state, const PotentialParams& p)
{
    MuMeanCheck out;
    out.mu_bar = mean(psi_prime_field(state.phi, p));
    out.grad_mu = std::sqrt(grad_norm_sq(state.mu));
    out.ratio = std::abs(out.mu_bar) / (1.0 + out.grad_mu);
    return out;
}

double mu_mean_ratio_max(const RunLedger& ledger, double t_max)
{
    double worst = 0.0;
    for (const LedgerRow& r : ledger.rows)
        if (r.t <= t_max)
            worst = std::max(worst, std::abs(r.mu_bar) / (1.0 + std::sqrt(r.grad_mu_sq)));
    return worst;
}

namespace {

struct Trajectory {
    std::vector<ScalarField> snapshots;
    std::vector<double> times;
};

Trajectory record(const ScalarField& phi0, double T, const StepperConfig& cfg, const PotentialParams& p,
                  const MobilitySpec& spec, int cadence)
{
    Trajectory tr;
    RunHooks hooks;
    hooks.on_row = [&](const SimState& s, const LedgerRow&) {
        if (s.step % cadence == 0) {
            tr.snapshots.push_back(s.phi);
            tr.times.push_back(s.t);
        }
    };
    RunResult r = run(phi0, T, cfg, p, spec, hooks);
    if (r.state.step % cadence != 0) {
        tr.snapshots.push_back(r.state.phi);
        tr.times.push_back(r.state.t);
    }
    return tr;
}

} // namespace

DependenceReport continuous_dependence_experiment(const ScalarField& phi1_0, const ScalarField& phi2_0,
                                                  double T, const StepperConfig& cfg,
                                                  const PotentialParams& p, const MobilitySpec& spec,
                                                  int cadence)
{
    require_same_grid(phi1_0.grid(), phi2_0.grid(), "continuous_dependence_experiment");
    if (std::abs(mean(phi1_0) - mean(phi2_0)) > 1e-12)
        throw std::invalid_argument("continuous_dependence_experiment: initial means differ");
    if (cfg.adaptive.enabled)
        throw std::invalid_argument("continuous_dependence_experiment needs a fixed step size");
    if (spec.form() == MobilitySpec::Form::degenerate)
        throw std::invalid_argument("continuous_dependence_experiment needs a non-degenerate mobility");
    if (cadence < 1)
        throw std::invalid_argument("cadence must be at least 1");
    validate(cfg);

    auto second = std::async(std::launch::async, [&] { return record(phi2_0, T, cfg, p, spec, cadence); });
    const Trajectory a = record(phi1_0, T, cfg, p, spec, cadence);
    const Trajectory b = second.get();

    const Grid& g = phi1_0.grid();
    EllipticWorkspace ws(g);
    const double sbm = std::sqrt(spec.b_min()), sbM = std::sqrt(spec.b_max());
    DependenceReport rep;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const ScalarField diff = subtract_mean(a.snapshots[k] - b.snapshots[k]);
        DependencePoint pt;
        pt.t = a.times[k];
        pt.hm1 = hm1_norm(diff);
        pt.d = weighted_dual_norm(a.snapshots[k], diff, spec, ws);
        pt.d_sym = weighted_dual_norm(b.snapshots[k], diff, spec, ws);
        if (pt.hm1 > 0.0) {
            rep.sandwich_violation = std::max(rep.sandwich_violation, (sbm * pt.d - pt.hm1) / pt.hm1);
            rep.sandwich_violation = std::max(rep.sandwich_violation, (pt.hm1 - sbM * pt.d) / pt.hm1);
        }
        rep.points.push_back(pt);
    }
    rep.d0 = rep.points.front().d;
    rep.dT = rep.points.back().d;
    if (rep.d0 > 0.0) {
        const double d0_sym = rep.points.front().d_sym;
        for (const auto& pt : rep.points) {
            rep.c_emp = std::max(rep.c_emp, pt.d / rep.d0);
            rep.c_emp_sym = std::max(rep.c_emp_sym, pt.d_sym / d0_sym);
        }
    }
    return rep;
}

LambdaBSeries lambda_b_series(const RunLedger& ledger)
{
    LambdaBSeries s;
    s.sup.fill(std::numeric_limits<double>::quiet_NaN());
    for (const LedgerRow& r : ledger.rows) {
        s.t.push_back(r.t);
        s.Lambda.push_back(r.Lambda);
        s.B.push_back(r.B);
        for (std::size_t k = 0; k < kLambdaTaus.size(); ++k)
            if (r.t >= kLambdaTaus[k])
                s.sup[k] = std::isnan(s.sup[k]) ? r.Lambda : std::max(s.sup[k], r.Lambda);
    }
    return s;
}

} // namespace chfh
