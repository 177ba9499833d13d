#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include "chfh/config.hpp"
#include "chfh/discrete.hpp"
#include "chfh/io.hpp"
#include "chfh/random.hpp"
#include "test_support.hpp"

using namespace chfh;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("chfh_test_io_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string tmp(const std::string& name)
{
    return (scratch_dir() / name).string();
}

int count_lines(const std::string& text)
{
    int n = 0;
    for (char c : text)
        n += c == '\n';
    return n;
}

bool mentions(const ConfigError& e, const std::string& needle)
{
    for (const auto& msg : e.errors())
        if (msg.find(needle) != std::string::npos)
            return true;
    return false;
}

} // namespace

TEST_CASE("snapshot round trip is bit exact")
{
    const Grid g = make_grid(8, 6, 1.0, 0.75);
    ScalarField f = oracle::random_field(g, 3);
    f[0] = -0.0;
    f[1] = std::numeric_limits<double>::denorm_min();
    f[2] = 0.1;
    write_snapshot(f, tmp("a.chfld"), 0.3);
    const Snapshot s = read_snapshot_with_time(tmp("a.chfld"));
    CHECK(s.phi.grid() == g);
    CHECK(s.t == 0.3);
    CHECK(std::memcmp(s.phi.data().data(), f.data().data(), f.size() * sizeof(double)) == 0);

    const std::string bytes = read_text_file(tmp("a.chfld"));
    CHECK(bytes.substr(0, bytes.find('\n')) == "CHFLD v1 8 6 1 0.75 0.29999999999999999");
    CHECK(bytes.size() == bytes.find('\n') + 1 + 48 * 8);
    // 0.1 = 0x3FB999999999999A, stored little-endian.
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + bytes.find('\n') + 1 + 16;
    CHECK(p[0] == 0x9A);
    CHECK(p[7] == 0x3F);
}

TEST_CASE("snapshot errors")
{
    const Grid g = make_grid(4, 4, 1.0, 1.0);
    write_snapshot(ScalarField(g, 0.5), tmp("b.chfld"));
    const std::string good = read_text_file(tmp("b.chfld"));

    write_text_file(tmp("trunc.chfld"), good.substr(0, good.size() - 3));
    CHECK_THROWS_WITH_AS(read_snapshot(tmp("trunc.chfld")), doctest::Contains("payload"), IoError);

    std::string wrong = good;
    wrong.replace(0, wrong.find('\n'), "CHFLD v1 4 5 1 1 0");
    write_text_file(tmp("wrong.chfld"), wrong);
    CHECK_THROWS_WITH_AS(read_snapshot(tmp("wrong.chfld")), doctest::Contains("payload"), IoError);

    for (const char* header : {"CHFLD v2 4 4 1 1 0", "CHFLD v1 4 4 1 1", "CHFLD v1 4 x 1 1 0", "chfld v1 4 4 1 1 0"}) {
        std::string bad = good;
        bad.replace(0, bad.find('\n'), header);
        write_text_file(tmp("hdr.chfld"), bad);
        CHECK_THROWS_WITH_AS(read_snapshot(tmp("hdr.chfld")), doctest::Contains("header"), IoError);
    }

    ScalarField nan(g, 0.0);
    nan[5] = std::nan("");
    write_snapshot(nan, tmp("nan.chfld"));
    CHECK_THROWS_WITH_AS(read_snapshot(tmp("nan.chfld")), doctest::Contains("non-finite"), IoError);
    CHECK_THROWS_AS(read_snapshot(tmp("does_not_exist.chfld")), IoError);
}

TEST_CASE("ledger CSV")
{
    RunLedger empty;
    write_ledger_csv(empty, tmp("empty.csv"));
    const std::string e = read_text_file(tmp("empty.csv"));
    CHECK(e == std::string(kLedgerHeader) + "\n");

    RunLedger one;
    one.rows.push_back(LedgerRow{});
    CHECK(count_lines(ledger_csv(one)) == 2);

    RunLedger many;
    const auto v = oracle::random_vector(10 * 30, 9, -1e3, 1e3);
    for (int k = 0; k < 30; ++k) {
        const double* x = &v[10 * k];
        LedgerRow r;
        r.t = x[0];
        r.mass = x[1] * 1e-300;
        r.E = x[2];
        r.E0 = x[3] * 1e300;
        r.grad_mu_sq = x[4];
        r.Lambda = x[5];
        r.B = x[6];
        r.sep = 1.0 / 3.0;
        r.mu_bar = x[8];
        r.cum_dissipation = x[9] * std::numbers::pi;
        many.rows.push_back(r);
    }
    write_ledger_csv(many, tmp("many.csv"));
    const RunLedger back = parse_ledger_csv(read_text_file(tmp("many.csv")));
    REQUIRE(back.size() == many.size());
    for (std::size_t k = 0; k < many.size(); ++k) {
        const LedgerRow &a = many.rows[k], &b = back.rows[k];
        CHECK(a.t == b.t);
        CHECK(a.mass == b.mass);
        CHECK(a.E == b.E);
        CHECK(a.E0 == b.E0);
        CHECK(a.grad_mu_sq == b.grad_mu_sq);
        CHECK(a.Lambda == b.Lambda);
        CHECK(a.B == b.B);
        CHECK(a.sep == b.sep);
        CHECK(a.mu_bar == b.mu_bar);
        CHECK(a.cum_dissipation == b.cum_dissipation);
    }
    CHECK_THROWS_AS(parse_ledger_csv("t,mass\n1,2\n"), IoError);
    CHECK_THROWS_AS(parse_ledger_csv(std::string(kLedgerHeader) + "\n1,2,3\n"), IoError);
    CHECK_THROWS_AS(write_ledger_csv(one, "/nonexistent_dir_chfh/x.csv"), IoError);
}

TEST_CASE("PGM output")
{
    const Grid g = make_grid(8, 6, 1.0, 1.0);
    auto all_equal = [](const std::vector<unsigned char>& px, int level) {
        for (unsigned char c : px)
            if (c != level)
                return false;
        return true;
    };
    CHECK(all_equal(gray_levels(ScalarField(g, 0.0)), 127));
    CHECK(all_equal(gray_levels(ScalarField(g, 1.0)), 255));
    CHECK(all_equal(gray_levels(ScalarField(g, -1.0)), 0));
    CHECK(all_equal(gray_levels(ScalarField(g, 3.0)), 255));
    CHECK(all_equal(gray_levels(ScalarField(g, -2.0)), 0));

    // The first image row is the top of the domain.
    const ScalarField ramp = ScalarField::sample(g, [](double, double y) { return y > 0.5 ? 1.0 : -1.0; });
    const auto px = gray_levels(ramp);
    CHECK(px.front() == 255);
    CHECK(px.back() == 0);

    write_pgm(ramp, tmp("ramp.pgm"));
    const std::string bytes = read_text_file(tmp("ramp.pgm"));
    CHECK(bytes.substr(0, 11) == "P5\n8 6\n255\n");
    CHECK(bytes.size() == 11 + 48);
    ScalarField nan(g, 0.0);
    nan[0] = std::nan("");
    CHECK_THROWS_AS(write_pgm(nan, tmp("nan.pgm")), IoError);
}

TEST_CASE("config defaults")
{
    const RunConfig c = parse_config("");
    CHECK(c.grid == make_grid(64, 64, 1.0, 1.0));
    CHECK(c.potential.theta == 1.0);
    CHECK(c.potential.theta0 == 2.0);
    CHECK(c.stepper.dt == 1e-4);
    CHECK(c.stepper.newton_tol == 1e-10);
    CHECK(c.stepper.newton_max == 30);
    CHECK(c.stepper.linear_tol == 1e-4);
    CHECK_FALSE(c.stepper.adaptive.enabled);
    CHECK(c.steady.tol_residual == 1e-9);
    CHECK(c.steady.tol_gradmu == 1e-8);
    CHECK(c.T == 1.0);
    CHECK(c.initial.kind == InitialKind::noise);
    CHECK(c.uniqueness.cadence == 10);
    const MobilitySpec b = c.mobility.build();
    CHECK(b(0.0) == 1.0);
    CHECK(b(1.0) == 1.5);

    // The default datum is the spinodal benchmark datum.
    const ScalarField phi = initial_field(c);
    CHECK(max_abs(phi - spinodal_datum(c.grid, 1)) <= 1e-15);
}

TEST_CASE("config parsing")
{
    const RunConfig c = parse_config(R"(# benchmark on a wider box
grid.nx = 32
grid.ny=16
grid.lx = 2.5   # trailing comment
potential.theta0 = 3
mobility.coeffs = 2, 0.5, 0.25
mobility.b_min = 1.25
mobility.b_max = 2.75
init.kind = tanh_stripe
init.mean = -0.2
init.amplitude = 0.7
stepper.adaptive = true
stepper.dt_max = 0.1
steady.method = newton
run.T = 2
)");
    CHECK(c.grid.nx == 32);
    CHECK(c.grid.ny == 16);
    CHECK(c.grid.lx == 2.5);
    CHECK(c.potential.theta0 == 3.0);
    CHECK(c.mobility.coeffs == std::vector<double>{2.0, 0.5, 0.25});
    CHECK(c.initial.kind == InitialKind::tanh_stripe);
    CHECK(c.stepper.adaptive.enabled);
    CHECK(c.stepper.adaptive.dt_max == 0.1);
    CHECK(c.steady.method == SteadyMethod::damped_newton);
    CHECK(c.T == 2.0);

    const ScalarField phi = initial_field(c);
    CHECK(mean(phi) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(max_abs(phi) <= 0.9 + 1e-12);
    CHECK(phi.at(0, 3) < phi.at(31, 3));
    CHECK(phi.at(3, 0) == phi.at(3, 15));

    const RunConfig cb = parse_config("init.kind = checkerboard\ninit.mean = 0.3\ninit.amplitude = 0.5\ninit.period = 3\n");
    const ScalarField chk = initial_field(cb);
    CHECK(mean(chk) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(max_abs(chk) <= 0.8 + 1e-12);
}

TEST_CASE("config violations")
{
    try {
        parse_config("potential.theta = 2\npotential.theta0 = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "theta0 must exceed theta"));
    }
    try {
        parse_config("init.mean = 1.0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "init.mean"));
        CHECK(mentions(e, "interior"));
    }

    // Every problem is reported, syntax errors with line numbers.
    try {
        parse_config("grid.nx = 2\nnot a pair\nbogus.key = 1\nstepper.dt = abc\ngrid.nx = 8\n"
                     "stepper.dt_min = -1\nmobility.b_min = 0.9\noutput.ledger = /nonexistent_dir_chfh/l.csv\n"
                     "init.kind = spiral\nstepper.adaptive = maybe\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "line 2: expected key = value"));
        CHECK(mentions(e, "line 3: unknown key bogus.key"));
        CHECK(mentions(e, "line 4: stepper.dt: expected a finite number"));
        CHECK(mentions(e, "line 5: duplicate key grid.nx"));
        CHECK(mentions(e, "line 9: init.kind: expected one of"));
        CHECK(mentions(e, "line 10: stepper.adaptive"));
        CHECK(mentions(e, "grid:"));
        CHECK(mentions(e, "mobility:"));
        CHECK(mentions(e, "output.ledger"));
        CHECK(e.errors().size() >= 9);
    }

    CHECK_THROWS_AS(parse_config("mobility.form = sticky\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("init.amplitude = 0.5\ninit.mean = 0.6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("init.kind = file\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("uniqueness.eps = 0\n"), ConfigError);
    CHECK_THROWS_AS(load_config(tmp("missing.cfg")), ConfigError);
    CHECK(config_keys().front() == "grid.nx");
}

TEST_CASE("file initial condition")
{
    const Grid g = make_grid(16, 16, 1.0, 1.0);
    const ScalarField f = spinodal_datum(g, 5, 0.1);
    write_snapshot(f, tmp("init.chfld"));
    const RunConfig c = parse_config("grid.nx = 16\ngrid.ny = 16\ninit.kind = file\ninit.path = " + tmp("init.chfld") + "\n");
    CHECK(max_abs(initial_field(c) - f) == 0.0);

    try {
        parse_config("init.kind = file\ninit.path = " + tmp("init.chfld") + "\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "grid differs"));
    }
    write_snapshot(ScalarField(g, 1.0), tmp("pure.chfld"));
    CHECK_THROWS_AS(parse_config("grid.nx = 16\ngrid.ny = 16\ninit.kind = file\ninit.path = " + tmp("pure.chfld")),
                    ConfigError);
}
