#pragma once

// Run configuration in a flat key=value format with section prefixes:
//
//   # comment
//   grid.nx = 64
//   potential.theta0 = 2
//   mobility.coeffs = 1, 0.5
//
// Every key is optional and falls back to the default listed in the README.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chfh/grid.hpp"
#include "chfh/steady.hpp"
#include "chfh/stepper.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// Carries every problem found in a configuration, one message per entry.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct MobilityConfig {
    std::string form = "polynomial";  ///< constant | polynomial | degenerate
    double m0 = 1.0;
    std::vector<double> coeffs{1.0, 0.5};
    double b_min = 0.5;
    double b_max = 1.5;

    MobilitySpec build() const;
};

enum class InitialKind { noise, tanh_stripe, checkerboard, file };

struct InitialConfig {
    InitialKind kind = InitialKind::noise;
    double mean = 0.0;
    double amplitude = 0.05;
    std::uint64_t seed = 1;
    int modes = 2;          ///< noise: cosine modes per direction
    double width = 0.05;    ///< tanh_stripe: interface width
    int period = 4;         ///< checkerboard: cosine index in each direction
    std::string path;       ///< file: CHFLD snapshot
};

struct OutputConfig {
    std::string ledger;          ///< CSV path; empty disables
    long snapshot_every = 0;     ///< steps between snapshots; 0 disables
    std::string snapshot_dir = ".";
    bool images = false;         ///< PGM next to each snapshot
};

struct UniquenessConfig {
    double eps = 1e-4;
    std::uint64_t seed = 2;
    int cadence = 10;
};

struct RunConfig {
    Grid grid = make_grid(64, 64, 1.0, 1.0);
    PotentialParams potential{1.0, 2.0};
    MobilityConfig mobility;
    InitialConfig initial;
    StepperConfig stepper;
    double T = 1.0;
    OutputConfig output;
    SteadyConfig steady;
    UniquenessConfig uniqueness;
};

/// Parses and validates. Throws ConfigError listing every syntax error (with
/// its line number) and every violated constraint (naming the key).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Constraint check on an assembled config; returns all violations.
std::vector<std::string> config_violations(const RunConfig& cfg);

/// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& config_keys();

/// Initial field described by cfg.initial on cfg.grid. Its mean equals
/// cfg.initial.mean to rounding except for file input, which is used as is.
ScalarField initial_field(const RunConfig& cfg);

} // namespace chfh
