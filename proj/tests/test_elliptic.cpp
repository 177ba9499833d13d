#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "chfh/discrete.hpp"
#include "chfh/elliptic.hpp"
#include "test_support.hpp"

using namespace chfh;

namespace {

const MobilitySpec kLinear = MobilitySpec::polynomial({1.0, 0.5}, 0.5, 1.5);

ScalarField mode_x(const Grid& g)
{
    return ScalarField::sample(g, [&](double x, double) { return std::cos(std::numbers::pi * x / g.lx); });
}

double lambda1(const Grid& g)
{
    return -(2.0 / (g.hx * g.hx)) * (1.0 - std::cos(std::numbers::pi * g.hx / g.lx));
}

} // namespace

TEST_CASE("solve_G")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    CHECK(max_abs(solve_G(ScalarField(g))) == 0.0);

    const ScalarField f = mode_x(g);
    const auto dense = oracle::solve_zero_mean(oracle::assemble_laplacian(g), f.data());
    const ScalarField u = solve_G(f);
    for (std::size_t k = 0; k < f.size(); ++k) {
        CHECK(std::abs(u[k] - f[k] / -lambda1(g)) <= 1e-11);
        CHECK(std::abs(u[k] - dense[k]) <= 1e-11);
    }
    CHECK_THROWS_AS(solve_G(ScalarField(g, 1.0)), MassDefectError);
    try {
        solve_G(ScalarField(g, 1.0));
    } catch (const MassDefectError& e) {
        CHECK(e.defect() == doctest::Approx(1.0));
    }
}

TEST_CASE("solve_Gq reductions and errors")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    EllipticWorkspace ws(g);
    const ScalarField f = oracle::random_zero_mean(g, 4);
    const ScalarField q = oracle::random_field(g, 5);

    const ScalarField u = solve_Gq(q, f, MobilitySpec::constant(2.5), ws);
    const ScalarField ref = (1.0 / 2.5) * solve_G(f);
    CHECK(oracle::max_diff(u.data(), ref.data()) <= 1e-10 * oracle::max_abs(ref.data()));

    CHECK(max_abs(solve_Gq(q, ScalarField(g), kLinear, ws)) == 0.0);
    CHECK_THROWS_AS(solve_Gq(q, ScalarField(g, 0.1), kLinear, ws), MassDefectError);
    CHECK_THROWS_AS(solve_Gq(q, f, MobilitySpec::degenerate(1.0), ws), std::invalid_argument);
    CHECK_THROWS_AS(EllipticWorkspace(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(EllipticWorkspace(g, 1e-8, 0), std::invalid_argument);

    EllipticWorkspace tight(g, 1e-10, 1);
    CHECK_THROWS_AS(solve_Gq(q, f, kLinear, tight), SolverError);
}

TEST_CASE("solve_Gq matches dense LU on 8x8")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    EllipticWorkspace ws(g);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField q = oracle::random_field(g, 1000 + trial);
        const ScalarField f = oracle::random_zero_mean(g, 2000 + trial);
        const auto dense = oracle::solve_zero_mean(oracle::assemble_div_b_grad(kLinear.faces(q)), f.data());
        const ScalarField u = solve_Gq(q, f, kLinear, ws);
        CHECK(oracle::max_diff(u.data(), dense) <= 1e-9 * std::max(1.0, oracle::max_abs(dense)));
    }
}

TEST_CASE("hm1_norm")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    CHECK(hm1_norm(ScalarField(g)) == 0.0);
    const ScalarField f = mode_x(g);
    CHECK(hm1_norm(f) == doctest::Approx(norm_l2(f) / std::sqrt(-lambda1(g))).epsilon(1e-12));
    const ScalarField r = oracle::random_zero_mean(g, 8);
    CHECK(hm1_norm(2.0 * r) == doctest::Approx(2.0 * hm1_norm(r)).epsilon(1e-14));
    CHECK_THROWS_AS(hm1_norm(ScalarField(g, 1.0)), MassDefectError);
}

TEST_CASE("weighted dual norm")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    EllipticWorkspace ws(g);
    const ScalarField q = oracle::random_field(g, 31);
    CHECK(weighted_dual_norm(q, ScalarField(g), kLinear, ws) == 0.0);
    const ScalarField f = oracle::random_zero_mean(g, 32);
    CHECK(weighted_dual_norm(q, f, MobilitySpec::constant(1.0), ws) == doctest::Approx(hm1_norm(f)).epsilon(1e-10));
}

TEST_CASE("norm equivalence, linearity, adjointness, iteration bound")
{
    const double bound = 4.0 * std::sqrt(kLinear.b_max() / kLinear.b_min()) * std::log(1.0 / 1e-10) + 10.0;
    for (int n : {16, 32, 64}) {
        const Grid g = make_grid(n, n, 1.0, 1.0);
        EllipticWorkspace ws(g);
        for (int trial = 0; trial < 20; ++trial) {
            const ScalarField q = oracle::random_field(g, 10 * n + trial);
            const ScalarField f = oracle::random_zero_mean(g, 20 * n + trial);
            const double w = weighted_dual_norm(q, f, kLinear, ws);
            CHECK(ws.last().iterations <= bound);
            const double h = hm1_norm(f);
            CHECK(std::sqrt(kLinear.b_min()) * w <= h * (1.0 + 1e-9));
            CHECK(h <= std::sqrt(kLinear.b_max()) * w * (1.0 + 1e-9));
        }
        const ScalarField q = oracle::random_field(g, 7);
        const ScalarField f1 = oracle::random_zero_mean(g, 8), f2 = oracle::random_zero_mean(g, 9);
        const ScalarField sum = solve_Gq(q, f1 + f2, kLinear, ws);
        const ScalarField u1 = solve_Gq(q, f1, kLinear, ws), u2 = solve_Gq(q, f2, kLinear, ws);
        CHECK(oracle::max_diff(sum.data(), (u1 + u2).data()) <= 1e-9 * max_abs(sum));

        const FaceCoeffs b = kLinear.faces(q);
        // (b grad u1, grad u2) = -(div(b grad u1), u2) = (f1, u2)
        const double a12 = inner(f1, u2), a21 = inner(f2, u1);
        CHECK(std::abs(a12 - a21) <= 1e-9 * std::max(std::abs(a12), 1e-300));
        CHECK(-inner(mobility_div_grad(b, u1), u2) == doctest::Approx(a12).epsilon(1e-9));
    }
}

TEST_CASE("check_identities")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    EllipticWorkspace ws(g);
    const ScalarField q = oracle::random_field(g, 61);
    const ScalarField f = oracle::random_zero_mean(g, 62);
    const ScalarField h = oracle::random_zero_mean(g, 63);

    const IdentityReport same = check_identities(q, f, f, kLinear, ws);
    CHECK(same.symmetry_defect == 0.0);

    const IdentityReport rep = check_identities(q, f, h, kLinear, ws);
    CHECK(rep.symmetry_defect <= 1e-9 * rep.symmetry_scale);
    CHECK(rep.interpolation_defect <= 1e-9 * rep.l2_sq);
    CHECK(rep.l2_sq <= rep.weighted_cauchy_schwarz * (1 + 1e-12));

    const IdentityReport unit = check_identities(q, f, h, MobilitySpec::constant(1.0), ws);
    CHECK(unit.unweighted_pairing == doctest::Approx(unit.l2_sq).epsilon(1e-10));
    // With a variable weight the pairing without b generally differs from ||f||^2.
    CHECK(std::abs(rep.unweighted_pairing - rep.l2_sq) > 1e-6 * rep.l2_sq);
}

TEST_CASE("solve_Gq converges at second order on a manufactured solution")
{
    const double pi = std::numbers::pi;
    // u = cos(pi x) cos(2 pi y), q = 0.8 cos(pi x) sin(pi y) / 1 on the unit square.
    auto u_exact = [&](double x, double y) { return std::cos(pi * x) * std::cos(2 * pi * y); };
    auto q_exact = [&](double x, double y) { return 0.8 * std::cos(pi * x) * std::sin(pi * y); };
    auto f_exact = [&](double x, double y) {
        const double q = q_exact(x, y);
        const double b = 1.0 + 0.5 * q;
        const double bx = 0.5 * (-0.8 * pi * std::sin(pi * x) * std::sin(pi * y));
        const double by = 0.5 * (0.8 * pi * std::cos(pi * x) * std::cos(pi * y));
        const double ux = -pi * std::sin(pi * x) * std::cos(2 * pi * y);
        const double uy = -2 * pi * std::cos(pi * x) * std::sin(2 * pi * y);
        const double lap = -5 * pi * pi * u_exact(x, y);
        return -(b * lap + bx * ux + by * uy);
    };
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const Grid g = make_grid(n, n, 1.0, 1.0);
        EllipticWorkspace ws(g);
        const ScalarField f = subtract_mean(ScalarField::sample(g, f_exact));
        const ScalarField u = solve_Gq(ScalarField::sample(g, q_exact), f, kLinear, ws);
        err.push_back(norm_l2(u - subtract_mean(ScalarField::sample(g, u_exact))));
    }
    CHECK(std::log2(err[0] / err[1]) >= 1.9);
    CHECK(std::log2(err[1] / err[2]) >= 1.9);
}
