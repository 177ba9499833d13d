#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include "chfh/discrete.hpp"
#include "chfh/random.hpp"
#include "chfh/stepper.hpp"

using namespace chfh;

namespace {

const PotentialParams kP{1.0, 2.0};
const MobilitySpec kLinear = MobilitySpec::polynomial({1.0, 0.5}, 0.5, 1.5);

ScalarField smooth_datum(const Grid& g)
{
    return ScalarField::sample(g, [](double x, double y) {
        return 0.1 * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y) +
               0.05 * std::cos(std::numbers::pi * x);
    });
}

double max_diff(const ScalarField& a, const ScalarField& b)
{
    return max_abs(a - b);
}

StepperConfig fixed(double dt)
{
    StepperConfig cfg;
    cfg.dt = dt;
    return cfg;
}

} // namespace

TEST_CASE("constant states are fixed points")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    for (double m : {0.0, 0.3, -0.7}) {
        const SimState s0 = make_state(ScalarField(g, m), kP);
        const SimState s1 = step(s0, fixed(1e-2), kP, kLinear);
        CHECK(max_abs(s1.phi - ScalarField(g, m)) <= 1e-14);
        for (double v : s1.mu.values())
            CHECK(std::abs(v - psi_prime(m, kP)) <= 1e-12);
        CHECK(s1.t == doctest::Approx(1e-2));
        CHECK(s1.step == 1);
    }
}

TEST_CASE("one step conserves mass")
{
    const Grid g = make_grid(32, 32, 1.0, 1.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ScalarField phi0 = band_limited_field(g, {seed, 8, 0.6, 1.0, false});
        const SimState s0 = make_state(phi0, kP);
        const SimState s1 = step(s0, fixed(1e-3), kP, kLinear);
        CHECK(std::abs(mean(s1.phi) - mean(s0.phi)) <= 1e-13);
    }
}

TEST_CASE("Richardson self-convergence is first order")
{
    const Grid g = make_grid(32, 32, 1.0, 1.0);
    const double T = 2e-3;
    std::vector<ScalarField> sol;
    for (double dt : {5e-4, 2.5e-4, 1.25e-4, 6.25e-5}) {
        StepperConfig cfg = fixed(dt);
        cfg.newton_tol = 1e-13;
        cfg.linear_tol = 1e-8;
        sol.push_back(run(smooth_datum(g), T, cfg, kP, kLinear).state.phi);
    }
    const double d1 = max_diff(sol[0], sol[1]);
    const double d2 = max_diff(sol[1], sol[2]);
    const double d3 = max_diff(sol[2], sol[3]);
    MESSAGE("Richardson ratios " << d1 / d2 << " " << d2 / d3);
    CHECK(d1 / d2 >= 1.7);
    CHECK(d1 / d2 <= 2.3);
    CHECK(d2 / d3 >= 1.7);
    CHECK(d2 / d3 <= 2.3);
}

TEST_CASE("spinodal run dissipates energy and conserves mass")
{
    const Grid g = make_grid(32, 32, 1.0, 1.0);
    const StepperConfig cfg = fixed(1e-3);
    const RunResult r = run(spinodal_datum(g, 11), 1.0, cfg, kP, kLinear);
    REQUIRE(r.ledger.size() == 1001);
    for (std::size_t k = 1; k < r.ledger.size(); ++k) {
        CHECK(r.ledger.rows[k].E <= r.ledger.rows[k - 1].E + 10.0 * cfg.newton_tol);
        CHECK(r.ledger.rows[k].t > r.ledger.rows[k - 1].t);
        CHECK(std::abs(r.ledger.rows[k].mass) <= 1e-12);
        CHECK(r.ledger.rows[k].B == 1.0 + r.ledger.rows[k].Lambda);
    }
    CHECK(r.state.t == doctest::Approx(1.0));
}

TEST_CASE("energy balance defect shrinks at first order")
{
    const Grid g = make_grid(32, 32, 1.0, 1.0);
    std::vector<double> defect;
    for (double dt : {4e-4, 2e-4, 1e-4}) {
        const RunResult r = run(spinodal_datum(g, 5), 0.1, fixed(dt), kP, kLinear);
        defect.push_back(std::abs(r.ledger.back().E + r.ledger.back().cum_dissipation - r.ledger.front().E));
    }
    const double order = std::log2(defect[0] / defect[2]) / 2.0;
    MESSAGE("defects " << defect[0] << " " << defect[1] << " " << defect[2] << " order " << order);
    CHECK(defect[1] < defect[0]);
    CHECK(defect[2] < defect[1]);
    CHECK(order >= 0.9);
}

TEST_CASE("adaptive step-size rule")
{
    StepperConfig cfg;
    cfg.adaptive.enabled = true;
    cfg.adaptive.dt_min = 1e-6;
    cfg.adaptive.dt_max = 1e-2;

    std::vector<StepStats> tail(1);
    tail[0].newton_iters = 30;
    CHECK(adaptive_dt(tail, cfg, 1e-3).dt == doctest::Approx(5e-4));
    CHECK(adaptive_dt(tail, cfg, 1.5e-6).dt == doctest::Approx(1e-6));
    const DtDecision at_min = adaptive_dt(tail, cfg, 1e-6);
    CHECK(at_min.dt == 1e-6);
    CHECK(at_min.warning);

    tail[0].newton_iters = 2;
    tail[0].energy_change = 1.0;
    CHECK(adaptive_dt(tail, cfg, 1e-3).dt == doctest::Approx(5e-4));

    std::vector<StepStats> easy(10);
    for (auto& s : easy)
        s.newton_iters = 5;
    CHECK(adaptive_dt(easy, cfg, 1e-3).dt == doctest::Approx(1.5e-3));
    CHECK(adaptive_dt(easy, cfg, 9e-3).dt == doctest::Approx(1e-2));
    easy[3].newton_iters = 6;
    CHECK(adaptive_dt(easy, cfg, 1e-3).dt == doctest::Approx(1e-3));
    CHECK(adaptive_dt(std::span<const StepStats>(easy).subspan(4), cfg, 1e-3).dt == doctest::Approx(1e-3));
}

TEST_CASE("adaptive run lands on T")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    StepperConfig cfg = fixed(1e-3);
    cfg.adaptive.enabled = true;
    cfg.adaptive.dt_max = 0.3;
    const RunResult r = run(spinodal_datum(g, 3), 2.0, cfg, kP, kLinear);
    CHECK(r.state.t == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.ledger.back().dt <= 0.3);
    CHECK(r.ledger.size() < 200);
}

TEST_CASE("runs are bitwise deterministic")
{
    const Grid g = make_grid(32, 32, 1.0, 1.0);
    StepperConfig cfg = fixed(1e-3);
    cfg.adaptive.enabled = true;
    const RunResult a = run(spinodal_datum(g, 9), 0.2, cfg, kP, kLinear);
    const RunResult b = run(spinodal_datum(g, 9), 0.2, cfg, kP, kLinear);
    REQUIRE(a.ledger.size() == b.ledger.size());
    CHECK(std::memcmp(a.state.phi.data().data(), b.state.phi.data().data(), g.size() * sizeof(double)) == 0);
    for (std::size_t k = 0; k < a.ledger.size(); ++k) {
        CHECK(a.ledger.rows[k].E == b.ledger.rows[k].E);
        CHECK(a.ledger.rows[k].Lambda == b.ledger.rows[k].Lambda);
        CHECK(a.ledger.rows[k].t == b.ledger.rows[k].t);
    }
}

TEST_CASE("T = 0 gives the initial state")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    const ScalarField phi0 = spinodal_datum(g, 1, 0.2);
    const RunResult r = run(phi0, 0.0, fixed(1e-3), kP, kLinear);
    CHECK(r.ledger.size() == 1);
    CHECK(max_diff(r.state.phi, phi0) == 0.0);
    CHECK(r.ledger.front().mass == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(r.ledger.front().cum_dissipation == 0.0);
}

TEST_CASE("initial state checks")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    CHECK_THROWS_AS(make_state(ScalarField(g, 1.2), kP), std::invalid_argument);
    CHECK_THROWS_AS(make_state(ScalarField(g, 1.0), kP), std::invalid_argument);
    ScalarField touching(g, 0.0);
    touching[0] = 1.0;
    const SimState s = make_state(touching, kP);
    CHECK(s.phi[0] < 1.0);
    CHECK(std::abs(mean(s.mu) - mean(psi_prime_field(s.phi, kP))) <= 1e-12);
}

TEST_CASE("configuration validation")
{
    StepperConfig cfg;
    cfg.dt = -1.0;
    cfg.newton_max = 0;
    try {
        validate(cfg);
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        CHECK(what.find("dt") != std::string::npos);
        CHECK(what.find("newton_max") != std::string::npos);
    }
    StepperConfig ad;
    ad.adaptive.enabled = true;
    ad.adaptive.grow = 3.0;
    CHECK_THROWS_AS(validate(ad), std::invalid_argument);
}

TEST_CASE("Newton failure is reported")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    StepperConfig cfg = fixed(1e-2);
    cfg.newton_max = 1;
    cfg.newton_tol = 1e-15;
    cfg.linear_tol = 0.5;
    const SimState s0 = make_state(spinodal_datum(g, 2, 0.0, 0.5), kP);
    CHECK_THROWS_AS(step(s0, cfg, kP, kLinear), StepFailure);

    cfg.adaptive.enabled = true;
    cfg.adaptive.dt_min = 2.5e-3;
    cfg.adaptive.dt_max = 1e-2;
    SimState s = s0;
    RunLedger ledger;
    ledger.rows.push_back(measure(s, kP, kLinear));
    CHECK_THROWS_AS(advance(s, ledger, 1.0, cfg, kP, kLinear), StepFailure);
}

TEST_CASE("degenerate mobility still conserves and dissipates")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    const RunResult r = run(spinodal_datum(g, 4, 0.1, 0.3), 0.05, fixed(1e-3), kP, MobilitySpec::degenerate(1.0));
    for (std::size_t k = 1; k < r.ledger.size(); ++k) {
        CHECK(r.ledger.rows[k].E <= r.ledger.rows[k - 1].E + 1e-9);
        CHECK(std::abs(r.ledger.rows[k].mass - r.ledger.front().mass) <= 1e-12);
    }
}
