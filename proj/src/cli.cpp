#include "chfh/cli.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "chfh/acceptance.hpp"
#include "chfh/bounds_lab.hpp"
#include "chfh/config.hpp"
#include "chfh/diagnostics.hpp"
#include "chfh/discrete.hpp"
#include "chfh/elliptic.hpp"
#include "chfh/io.hpp"
#include "chfh/random.hpp"
#include "chfh/steady.hpp"
#include "chfh/stepper.hpp"

namespace chfh {

namespace {

std::string strf(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

/// A numerical outcome the caller should see as exit code 2.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    long long seed = -1;  // overrides init.seed when >= 0
};

RunConfig load(const Common& c)
{
    RunConfig cfg = load_config(c.config);
    if (c.seed >= 0)
        cfg.initial.seed = static_cast<std::uint64_t>(c.seed);
    return cfg;
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir + ": " + ec.message());
}

int simulate(const Common& c, double T_override, std::ostream& out)
{
    RunConfig cfg = load(c);
    if (T_override >= 0.0)
        cfg.T = T_override;
    const MobilitySpec spec = cfg.mobility.build();
    const ScalarField phi0 = initial_field(cfg);
    const OutputConfig& o = cfg.output;
    if (o.snapshot_every > 0)
        ensure_dir(o.snapshot_dir);

    auto snapshot = [&](const SimState& s) {
        const std::string stem = (std::filesystem::path(o.snapshot_dir) / strf("snap_%08ld", s.step)).string();
        write_snapshot(s.phi, stem + ".chfld", s.t);
        if (o.images)
            write_pgm(s.phi, stem + ".pgm");
    };
    RunHooks hooks;
    if (o.snapshot_every > 0)
        hooks.on_row = [&](const SimState& s, const LedgerRow&) {
            if (s.step % o.snapshot_every == 0)
                snapshot(s);
        };

    RunResult r = run(phi0, cfg.T, cfg.stepper, cfg.potential, spec, hooks);
    r.ledger.seed = cfg.initial.seed;
    if (o.snapshot_every > 0 && r.state.step % o.snapshot_every != 0)
        snapshot(r.state);
    if (!o.ledger.empty())
        write_ledger_csv(r.ledger, o.ledger);

    double drift = 0.0, rise = -INFINITY, sep = 1.0;
    for (std::size_t k = 0; k < r.ledger.size(); ++k) {
        drift = std::max(drift, std::abs(r.ledger.rows[k].mass - r.ledger.front().mass));
        sep = std::min(sep, r.ledger.rows[k].sep);
        if (k)
            rise = std::max(rise, r.ledger.rows[k].E - r.ledger.rows[k - 1].E);
    }
    out << strf("seed %llu\n", static_cast<unsigned long long>(r.ledger.seed));
    out << strf("steps %ld\nt %.17g\n", r.state.step, r.state.t);
    out << strf("E(0) %.17g\nE(T) %.17g\n", r.ledger.front().E, r.ledger.back().E);
    out << strf("max mass drift %.3e\nmax energy rise %.3e\nmin separation %.6f\n", drift,
                r.ledger.size() > 1 ? rise : 0.0, sep);
    if (!o.ledger.empty())
        out << "ledger " << o.ledger << '\n';
    return kExitOk;
}

int steady(const Common& c, const std::string& out_path, std::ostream& out)
{
    const RunConfig cfg = load(c);
    const MobilitySpec spec = cfg.mobility.build();
    const ScalarField init = initial_field(cfg);
    const double m = mean(init);
    const SteadyResult r = solve_stationary(m, init, cfg.steady, cfg.potential, spec);
    if (!cfg.output.ledger.empty())
        write_ledger_csv(r.ledger, cfg.output.ledger);
    if (!out_path.empty())
        write_snapshot(r.phi, out_path, r.time);

    out << strf("converged %s\n", r.converged ? "yes" : "no");
    out << strf("mean %.17g\n", m);
    out << strf("stationarity residual %.6e\n||grad mu|| %.6e\n", r.residual, r.grad_mu);
    out << strf("time %.17g\nsteps %ld\nnewton iterations %d\n", r.time, r.steps, r.newton_iters);
    out << strf("energy %.17g\nmax |phi| %.6f\n", energy(r.phi, cfg.potential), max_abs(r.phi));
    out << strf("constant state linearly stable %s\n",
                constant_state_stable(cfg.grid, m, cfg.potential, spec) ? "yes" : "no");
    if (r.ledger.size() >= 20)
        out << "omega-limit trend " << to_string(omega_limit_monitor(r.ledger, 10).verdict) << '\n';
    if (!r.converged)
        throw NumericalFailure("stationary solve did not converge before steady.max_time");
    return kExitOk;
}

int uniqueness(const Common& c, double eps_override, const std::string& series, std::ostream& out)
{
    RunConfig cfg = load(c);
    if (eps_override > 0.0)
        cfg.uniqueness.eps = eps_override;
    else if (eps_override != -1.0)
        throw ConfigError({"--eps must be positive"});
    if (cfg.stepper.adaptive.enabled)
        throw ConfigError({"stepper.adaptive: uniqueness needs a fixed step so both runs share time levels"});
    const MobilitySpec spec = cfg.mobility.build();
    const ScalarField phi1 = initial_field(cfg);
    const ScalarField psi =
        band_limited_field(cfg.grid, {cfg.uniqueness.seed, 4, 1.0, 1.0, true}, stream::perturbation);
    const ScalarField phi2 = phi1 + cfg.uniqueness.eps * psi;
    if (max_abs(phi2) > 1.0)
        throw ConfigError({"uniqueness.eps: perturbed datum leaves [-1, 1]"});

    const DependenceReport r =
        continuous_dependence_experiment(phi1, phi2, cfg.T, cfg.stepper, cfg.potential, spec, cfg.uniqueness.cadence);
    if (!series.empty()) {
        std::string text = "t,d,d_sym,hm1\n";
        for (const auto& p : r.points)
            text += strf("%.17g,%.17g,%.17g,%.17g\n", p.t, p.d, p.d_sym, p.hm1);
        write_text_file(series, text);
    }
    out << strf("eps %.17g\nperturbation seed %llu\n", cfg.uniqueness.eps,
                static_cast<unsigned long long>(cfg.uniqueness.seed));
    out << strf("d(0) %.17g\nd(T) %.17g\nd(T)/d(0) %.17g\n", r.d0, r.dT, r.d0 > 0.0 ? r.dT / r.d0 : 0.0);
    out << strf("C_emp %.17g\nC_emp (second weight) %.17g\n", r.c_emp, r.c_emp_sym);
    out << strf("norm sandwich violation %.3e\n", r.sandwich_violation);
    if (!std::isfinite(r.c_emp))
        throw NumericalFailure("non-finite contraction constant");
    return kExitOk;
}

int lab(const std::string& suite, std::uint64_t seed, int count, const std::string& out_path, std::ostream& out)
{
    std::ostringstream rep;
    bool ok = true;
    const bool all = suite == "all";
    if (all || suite == "gronwall") {
        const GronwallReport g = gronwall_suite(seed, count);
        rep << "# gronwall: f' <= (M/sigma) g f^(1+sigma); envelope solution against the closed-form bound\n";
        rep << "case,f0,M,delta,g_integral,log_bound,log_max,self_consistency,single_sigma_exceeds\n";
        for (std::size_t k = 0; k < g.cases.size(); ++k) {
            const auto& c = g.cases[k];
            rep << strf("%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3e,%d\n", k, c.spec.f0, c.spec.M, c.spec.delta,
                        c.spec.g_integral(), c.log_bound, c.log_max, c.self_consistency,
                        c.single_sigma_exceeds ? 1 : 0);
        }
        rep << strf("violations %d of %zu, worst self-consistency %.3e\n", g.violations, g.cases.size(),
                    g.worst_self_consistency);
        ok = ok && g.violations == 0;
    }
    if (all || suite == "uniform") {
        const UniformGronwallReport u = uniform_gronwall_suite(seed, count);
        rep << "# uniform: f' <= g f + h; windowed integrals against (a1/r + a3) e^a2\n";
        rep << "case,f0,r,a1,a2,a3,bound,max_f,self_consistency\n";
        for (std::size_t k = 0; k < u.cases.size(); ++k) {
            const auto& c = u.cases[k];
            rep << strf("%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3e\n", k, c.f0, c.r, c.a1, c.a2, c.a3,
                        c.bound, c.max_f, c.self_consistency);
        }
        rep << strf("violations %d of %zu, tightest f/bound %.6f\n", u.violations, u.cases.size(), u.tightest);
        ok = ok && u.violations == 0;
    }
    if (all || suite == "bb") {
        const BlowupReport b = bb_ode_comparison(1.0, {0.2, 0.1, 0.05}, 1.0, 1.0);
        rep << "# bb: B' = (K/rho) B^(2(1+rho)), K = 1, B(0) = 1\n";
        rep << "rho,t_blowup,t_exact,local_ratio,global_log_margin,windows,int_B\n";
        for (const auto& c : b.cases)
            rep << strf("%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", c.rho, c.blowup_time, c.blowup_time_exact,
                        c.local_bound_ratio, c.global_log_margin, c.windows, c.int_B_at_blowup);
        rep << strf("blow-up time decreasing in rho: %s; global bound holds: %s\n",
                    b.blowup_decreasing_in_rho ? "yes" : "no", b.all_global_bounds_hold ? "yes" : "no");
        ok = ok && b.blowup_decreasing_in_rho && b.all_global_bounds_hold;
    }
    if (all || suite == "gn") {
        const GnReport g = gn_inequality_sweep(make_grid(64, 64, 1.0, 1.0), {seed, 8, 1.0, 1.0, true},
                                               {2, 4, 8, 16, 32, 64}, 100);
        rep << "# gn: max over 100 band-limited fields on 64^2\n";
        rep << "r,max_ratio,max_ratio_unscaled,max_dual_ratio\n";
        for (const auto& r : g.rows)
            rep << strf("%.17g,%.17g,%.17g,%.17g\n", r.r, r.max_ratio, r.max_ratio_unscaled, r.max_dual_ratio);
        rep << strf("slope %.6f\n", g.slope);
        ok = ok && g.slope <= 0.05;
    }
    if (all || suite == "h2bb") {
        const H2Report h = h2bb_estimate_report(make_grid(32, 32, 1.0, 1.0),
                                                MobilitySpec::polynomial({1.0, 0.5}, 0.5, 1.5), seed, count,
                                                {2.5, 3.0, 4.0, 6.0}, true);
        rep << "# h2bb: smallest admissible constant over " << h.samples << " samples on 32^2\n";
        rep << "s,c_star,c_star_alt\n";
        for (const auto& r : h.rows)
            rep << strf("%.17g,%.17g,%.17g\n", r.s, r.c_star, r.c_star_alt);
        rep << strf("C(H2) %.17g\nC(W24) %.17g\nC(H3) %.17g\n", h.c_h2, h.c_w24, h.c_h3);
        for (const auto& r : h.rows)
            ok = ok && std::isfinite(r.c_star);
    }
    out << rep.str();
    if (!out_path.empty())
        write_text_file(out_path, rep.str());
    if (!ok)
        throw NumericalFailure("lab suite " + suite + " reported a violation");
    return kExitOk;
}

int check(const std::string& dir, const std::vector<int>& criteria, std::ostream& out)
{
    for (int id : criteria)
        if (id < 1 || id > kCriterionCount)
            throw ConfigError({strf("--criteria: %d is not a criterion number", id)});
    AcceptanceOptions opts;
    opts.ledger_dir = dir;
    opts.only = criteria;
    opts.on_result = [&](const CriterionResult& r) { out << format_result(r) << std::endl; };
    int failed = 0;
    const auto results = run_acceptance(opts);
    for (const auto& r : results)
        failed += r.pass ? 0 : 1;
    out << strf("%d of %zu criteria passed; ledgers in %s\n", static_cast<int>(results.size()) - failed,
                results.size(), dir.c_str());
    if (failed)
        throw NumericalFailure(strf("%d acceptance criteria failed", failed));
    return kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cahn-Hilliard solver with Flory-Huggins potential and concentration-dependent mobility"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "flat key=value run configuration")->required();
        sub->add_option("--seed", common.seed, "override init.seed");
    };

    double T_override = -1.0;
    auto* sim = app.add_subcommand("simulate", "run the time stepper and write ledger and snapshots");
    add_common(sim);
    sim->add_option("--T", T_override, "override run.T");

    std::string steady_out;
    auto* st = app.add_subcommand("steady", "solve for a stationary state with the configured mean");
    add_common(st);
    st->add_option("--out", steady_out, "write the stationary state as a CHFLD snapshot");

    double eps = -1.0;
    std::string series;
    auto* uq = app.add_subcommand("uniqueness", "evolve a datum and a perturbed copy, report the weighted distance");
    add_common(uq);
    uq->add_option("--eps", eps, "perturbation size (default uniqueness.eps)");
    uq->add_option("--series", series, "write t,d,d_sym,hm1 to this CSV");

    std::string suite = "all", lab_out;
    std::uint64_t lab_seed = 7;
    int count = 50;
    auto* lb = app.add_subcommand("lab", "inequality checks by sampling");
    lb->add_option("--suite", suite, "gronwall, uniform, bb, gn, h2bb or all")
        ->check(CLI::IsMember({"gronwall", "uniform", "bb", "gn", "h2bb", "all"}));
    lb->add_option("--seed", lab_seed, "master seed");
    lb->add_option("--count", count, "cases per randomized suite")->check(CLI::Range(1, 100000));
    lb->add_option("--out", lab_out, "also write the report to this file");

    std::string ledger_dir = "chfh_check";
    std::vector<int> criteria;
    auto* ck = app.add_subcommand("check", "run the acceptance suite and print a pass/fail table");
    ck->add_option("--ledger-dir", ledger_dir, "directory for the ledgers of every criterion");
    ck->add_option("--criteria", criteria, "subset of criterion numbers")->delimiter(',');

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sim->parsed())
            return simulate(common, T_override, out);
        if (st->parsed())
            return steady(common, steady_out, out);
        if (uq->parsed())
            return uniqueness(common, eps, series, out);
        if (lb->parsed())
            return lab(suite, lab_seed, count, lab_out, out);
        return check(ledger_dir, criteria, out);
    } catch (const ConfigError& e) {
        err << "configuration error:\n";
        for (const auto& msg : e.errors())
            err << "  " << msg << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const StepFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace chfh
