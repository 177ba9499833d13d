#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "chfh/dct.hpp"
#include "chfh/discrete.hpp"
#include "chfh/kernels.hpp"
#include "test_support.hpp"

using namespace chfh;

TEST_CASE("make_grid")
{
    const Grid g = make_grid(64, 64, 1.0, 1.0);
    CHECK(g.hx == doctest::Approx(1.0 / 64));
    CHECK(g.hy == doctest::Approx(1.0 / 64));
    const Grid h = make_grid(4, 8, 2.0, 1.0);
    CHECK(h.hx == 0.5);
    CHECK(h.hy == 0.125);
    CHECK_THROWS_AS(make_grid(2, 64, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, 1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(10)), std::invalid_argument);
}

TEST_CASE("laplacian of a constant vanishes")
{
    const Grid g = make_grid(9, 7, 1.3, 0.7);
    const ScalarField lap = laplacian_neumann(ScalarField(g, 0.37));
    CHECK(max_abs(lap) == 0.0);
}

TEST_CASE("cosine mode is an eigenvector")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    const auto f = ScalarField::sample(g, [&](double x, double) { return std::cos(std::numbers::pi * x / g.lx); });
    const double lam1 = -(2.0 / (g.hx * g.hx)) * (1.0 - std::cos(std::numbers::pi * g.hx / g.lx));
    // Dense oracle first.
    const auto dense = oracle::matvec(oracle::assemble_laplacian(g), f.data());
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(dense[k] == doctest::Approx(lam1 * f[k]).epsilon(1e-12));
    const ScalarField lap = laplacian_neumann(f);
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(std::abs(lap[k] - lam1 * f[k]) <= 1e-12 * std::abs(lam1));
    CHECK(neumann_eigenvalues(8, g.hx)[1] == doctest::Approx(lam1));
}

TEST_CASE("laplacian matches dense assembly and sums to zero")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    const ScalarField f = oracle::random_field(g, 11);
    const auto dense = oracle::matvec(oracle::assemble_laplacian(g), f.data());
    const ScalarField lap = laplacian_neumann(f);
    CHECK(oracle::max_diff(dense, lap.data()) <= 1e-13 * oracle::max_abs(dense));
    double s = 0.0;
    for (double v : lap.values())
        s += v;
    CHECK(std::abs(s) <= 1e-12 * oracle::max_abs(dense));
}

TEST_CASE("mobility_div_grad")
{
    const Grid g = make_grid(8, 8, 1.0, 1.0);
    const ScalarField p = oracle::random_field(g, 3);

    SUBCASE("constant coefficient reduces to the Laplacian")
    {
        const ScalarField a = mobility_div_grad(FaceCoeffs::constant(g, 1.0), p);
        const ScalarField b = laplacian_neumann(p);
        CHECK(oracle::max_diff(a.data(), b.data()) <= 1e-14 * max_abs(b));
    }
    SUBCASE("dense oracle, conservation, symmetry and sign")
    {
        const FaceCoeffs b = face_average(oracle::random_field(g, 5, 0.5, 1.5));
        const auto dense = oracle::matvec(oracle::assemble_div_b_grad(b), p.data());
        const ScalarField out = mobility_div_grad(b, p);
        CHECK(oracle::max_diff(dense, out.data()) <= 1e-13 * oracle::max_abs(dense));
        CHECK(std::abs(mean(out)) * out.size() <= 1e-12 * norm_l2(out) / std::sqrt(g.cell_area()));

        const ScalarField q = oracle::random_field(g, 6);
        const double pq = inner(mobility_div_grad(b, p), q);
        const double qp = inner(p, mobility_div_grad(b, q));
        CHECK(pq == doctest::Approx(qp).epsilon(1e-12));
        CHECK(inner(out, p) < 0.0);
        CHECK(inner(mobility_div_grad(b, ScalarField(g, 2.0)), ScalarField(g, 2.0)) == 0.0);
        CHECK(-inner(out, p) == doctest::Approx(weighted_grad_norm_sq(b, p)).epsilon(1e-12));
    }
}

TEST_CASE("conservation on larger random inputs")
{
    for (int seed = 0; seed < 5; ++seed) {
        const Grid g = make_grid(33, 20, 1.7, 0.9);
        const FaceCoeffs b = face_average(oracle::random_field(g, 100 + seed, 0.1, 3.0));
        const ScalarField out = mobility_div_grad(b, oracle::random_field(g, 200 + seed));
        double s = 0.0, a = 0.0;
        for (double v : out.values()) {
            s += v;
            a += v * v;
        }
        CHECK(std::abs(s) <= 1e-12 * std::sqrt(a) * std::sqrt(static_cast<double>(out.size())));
    }
}

TEST_CASE("summation by parts: (-Lap f, f) = ||grad f||^2")
{
    const Grid g = make_grid(16, 12, 1.0, 2.0);
    const ScalarField f = oracle::random_field(g, 42);
    CHECK(-inner(laplacian_neumann(f), f) == doctest::Approx(grad_norm_sq(f)).epsilon(1e-12));
    const ScalarField h = oracle::random_field(g, 43);
    CHECK(inner(laplacian_neumann(f), h) == doctest::Approx(inner(f, laplacian_neumann(h))).epsilon(1e-11));
}

TEST_CASE("face_average")
{
    const Grid g = make_grid(4, 4, 1.0, 1.0);
    const FaceCoeffs c = face_average(ScalarField(g, 2.5), FaceMean::arithmetic);
    CHECK(c.x[1] == 2.5);
    CHECK(c.x[0] == 0.0);
    CHECK(c.x[4] == 0.0);
    CHECK(c.y[0] == 0.0);
    CHECK(c.y[g.nx] == 2.5);

    ScalarField two(g, 3.0);
    two[g.index(0, 0)] = 1.0;
    const std::size_t face = 1; // between (0,0) and (1,0)
    CHECK(face_average(two, FaceMean::harmonic).x[face] == doctest::Approx(1.5));
    CHECK(face_average(two, FaceMean::arithmetic).x[face] == doctest::Approx(2.0));

    two[g.index(2, 2)] = 0.0;
    CHECK_THROWS_AS(face_average(two, FaceMean::harmonic), std::invalid_argument);
    CHECK_NOTHROW(face_average(two, FaceMean::arithmetic));

    const ScalarField r = oracle::random_field(oracle::random_field(g, 1).grid(), 9, 0.2, 4.0);
    const FaceCoeffs h = face_average(r, FaceMean::harmonic);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double v = h.x[static_cast<std::size_t>(j) * (g.nx + 1) + i];
            CHECK(v >= std::min(r.at(i - 1, j), r.at(i, j)) - 1e-15);
            CHECK(v <= std::max(r.at(i - 1, j), r.at(i, j)) + 1e-15);
        }
}

TEST_CASE("non-finite input is rejected")
{
    const Grid g = make_grid(4, 4, 1.0, 1.0);
    ScalarField f(g, 0.0);
    f[3] = std::nan("");
    CHECK_THROWS_AS(laplacian_neumann(f), std::domain_error);
    CHECK_THROWS_AS(mobility_div_grad(FaceCoeffs::constant(g, 1.0), f), std::domain_error);
}

TEST_CASE("parallel kernels agree with the serial reference")
{
    const Grid g = make_grid(37, 29, 1.0, 0.8);
    const ScalarField f = oracle::random_field(g, 71);
    const FaceCoeffs b = face_average(oracle::random_field(g, 72, 0.5, 1.5));
    std::vector<double> a(g.size()), r(g.size());

    kernels::laplacian(g, f.values(), a);
    kernels::serial::laplacian(g, f.values(), r);
    CHECK(oracle::max_diff(a, r) <= 1e-12 * oracle::max_abs(r));

    kernels::div_b_grad(g, b.x, b.y, f.values(), a);
    kernels::serial::div_b_grad(g, b.x, b.y, f.values(), r);
    CHECK(oracle::max_diff(a, r) <= 1e-12 * oracle::max_abs(r));

    CHECK(kernels::weighted_grad_sq(g, b.x, b.y, f.values()) ==
          doctest::Approx(kernels::serial::weighted_grad_sq(g, b.x, b.y, f.values())).epsilon(1e-13));
    CHECK(kernels::grad_sq(g, f.values()) == doctest::Approx(kernels::serial::grad_sq(g, f.values())).epsilon(1e-13));
    CHECK(kernels::dot(f.values(), f.values()) ==
          doctest::Approx(kernels::serial::dot(f.values(), f.values())).epsilon(1e-13));
    CHECK(kernels::sum(f.values()) ==
          doctest::Approx(kernels::serial::sum(f.values())).epsilon(1e-10));
}
