#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "chfh/cli.hpp"
#include "chfh/io.hpp"

using namespace chfh;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("chfh_test_cli_" + std::to_string(::getpid()));
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

struct Outcome {
    int code = 0;
    std::string out, err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "chfh");
    std::ostringstream out, err;
    Outcome r;
    r.code = cli_main(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string demo_config(const std::string& name, const std::string& extra = "")
{
    const std::string path = tmp(name);
    write_text_file(path, "grid.nx = 32\ngrid.ny = 32\nrun.T = 0.05\nstepper.dt = 1e-3\n" + extra);
    return path;
}

} // namespace

TEST_CASE("missing config is a validation failure")
{
    const Outcome r = cli({"simulate", "--config", tmp("missing.cfg")});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("missing.cfg") != std::string::npos);

    const Outcome bad = cli({"steady", "--config", demo_config("bad.cfg", "potential.theta0 = 0.5\n")});
    CHECK(bad.code == kExitValidation);
    CHECK(bad.err.find("theta0 must exceed theta") != std::string::npos);

    CHECK(cli({}).code == kExitValidation);
    CHECK(cli({"frobnicate"}).code == kExitValidation);
    CHECK(cli({"lab", "--suite", "nope"}).code == kExitValidation);
    CHECK(cli({"check", "--criteria", "12"}).code == kExitValidation);
}

TEST_CASE("simulate writes a deterministic ledger and snapshots")
{
    const std::string snaps = tmp("snaps");
    const std::string cfg = demo_config("sim.cfg", "output.ledger = " + tmp("a.csv") +
                                                       "\noutput.snapshot_every = 20\noutput.images = true\n"
                                                       "output.snapshot_dir = " + snaps + "\n");
    const Outcome r = cli({"simulate", "--config", cfg});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("steps 50") != std::string::npos);
    const RunLedger ledger = parse_ledger_csv(read_text_file(tmp("a.csv")));
    CHECK(ledger.size() == 51);
    CHECK(ledger.back().t == doctest::Approx(0.05));
    for (const char* name : {"snap_00000000.chfld", "snap_00000020.chfld", "snap_00000040.chfld",
                             "snap_00000050.chfld", "snap_00000050.pgm"})
        CHECK(fs::exists(fs::path(snaps) / name));
    CHECK(read_snapshot_with_time((fs::path(snaps) / "snap_00000050.chfld").string()).t == doctest::Approx(0.05));

    const std::string first = read_text_file(tmp("a.csv"));
    REQUIRE(cli({"simulate", "--config", cfg}).code == kExitOk);
    CHECK(read_text_file(tmp("a.csv")) == first);

    // A different seed gives a different trajectory.
    REQUIRE(cli({"simulate", "--config", cfg, "--seed", "9"}).code == kExitOk);
    CHECK(read_text_file(tmp("a.csv")) != first);
}

TEST_CASE("numerical failures exit with 2")
{
    // Newton with a single iteration cannot meet the tolerance on a large step.
    const Outcome step = cli({"simulate", "--config",
                              demo_config("newton.cfg", "stepper.newton_max = 1\ninit.amplitude = 0.6\n"
                                                        "grid.lx = 6.283185307179586\ngrid.ly = 6.283185307179586\n")});
    CHECK(step.code == kExitNumerical);
    CHECK(step.err.find("numerical failure") != std::string::npos);

    // An unstable domain does not settle within a short time cap.
    const Outcome capped = cli({"steady", "--config",
                                demo_config("capped.cfg", "grid.lx = 6.283185307179586\ngrid.ly = 6.283185307179586\n"
                                                          "steady.max_time = 1\n")});
    CHECK(capped.code == kExitNumerical);
    CHECK(capped.out.find("converged no") != std::string::npos);
}

TEST_CASE("steady on a stable domain")
{
    const Outcome r = cli({"steady", "--config", demo_config("steady.cfg"), "--out", tmp("steady.chfld")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("converged yes") != std::string::npos);
    CHECK(fs::exists(tmp("steady.chfld")));
}

TEST_CASE("uniqueness report")
{
    const std::string cfg = demo_config("uq.cfg", "grid.lx = 6.283185307179586\ngrid.ly = 6.283185307179586\n");
    const Outcome r = cli({"uniqueness", "--config", cfg, "--eps", "1e-4", "--series", tmp("d.csv")});
    REQUIRE(r.code == kExitOk);
    for (const char* key : {"d(0) ", "d(T) ", "C_emp "})
        CHECK(r.out.find(key) != std::string::npos);
    CHECK(read_text_file(tmp("d.csv")).rfind("t,d,d_sym,hm1\n", 0) == 0);

    CHECK(cli({"uniqueness", "--config", cfg, "--eps", "-1e-4"}).code == kExitValidation);
    CHECK(cli({"uniqueness", "--config", demo_config("uqa.cfg", "stepper.adaptive = true\n")}).code ==
          kExitValidation);
}

TEST_CASE("lab reports are deterministic")
{
    const Outcome a = cli({"lab", "--suite", "gronwall", "--seed", "7"});
    const Outcome b = cli({"lab", "--suite", "gronwall", "--seed", "7"});
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out.find("violations 0 of 50") != std::string::npos);
    CHECK(cli({"lab", "--suite", "gronwall", "--seed", "8"}).out != a.out);

    const Outcome all = cli({"lab", "--suite", "all", "--seed", "3", "--count", "10", "--out", tmp("lab.txt")});
    CHECK(all.code == kExitOk);
    CHECK(read_text_file(tmp("lab.txt")) == all.out);
}

TEST_CASE("check on a subset of criteria")
{
    const Outcome r = cli({"check", "--criteria", "3,9,11", "--ledger-dir", tmp("check")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("PASS  3") != std::string::npos);
    CHECK(r.out.find("PASS 11") != std::string::npos);
    CHECK(fs::exists(fs::path(tmp("check")) / "pass2" / "c9_blowup.csv"));
}

TEST_CASE("installed binary propagates exit codes")
{
    const std::string cmd = std::string(CHFH_CLI_PATH) + " simulate --config " + tmp("missing.cfg") + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == kExitValidation);

    const std::string ok = std::string(CHFH_CLI_PATH) + " lab --suite bb > /dev/null";
    const int s2 = std::system(ok.c_str());
    REQUIRE(WIFEXITED(s2));
    CHECK(WEXITSTATUS(s2) == kExitOk);
}
