#pragma once

// Seeded randomness. Every consumer draws from its own stream, derived from
// (seed, stream id) by two rounds of SplitMix64, so adding a consumer never
// shifts the numbers another one sees.

#include <cstdint>
#include <random>

#include "chfh/grid.hpp"

namespace chfh {

namespace stream {
inline constexpr std::uint64_t initial_condition = 1;
inline constexpr std::uint64_t perturbation = 2;
inline constexpr std::uint64_t gronwall = 10;
inline constexpr std::uint64_t uniform_gronwall = 11;
inline constexpr std::uint64_t gn_sweep = 12;
inline constexpr std::uint64_t h2_estimate = 13;
inline constexpr std::uint64_t h2_forcing = 14;
} // namespace stream

std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream_id);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by Box-Muller.
    double normal();
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Random sum of Neumann cosine modes cos(pi k x / lx) cos(pi l y / ly) with
/// 0 <= k, l < modes. Coefficients are normal with variance decaying like
/// (1 + k^2 + l^2)^(-decay) and are rescaled so that their absolute values sum
/// to amplitude, which bounds |f| independently of the grid. The same spec
/// yields the same continuous function on every grid over the same domain.
struct RandomFieldSpec {
    std::uint64_t seed = 0;
    int modes = 8;
    double amplitude = 1.0;
    double decay = 1.0;
    bool zero_mean = true;
};

ScalarField band_limited_field(const Grid& grid, const RandomFieldSpec& spec,
                               std::uint64_t stream_id = stream::initial_condition);

/// Spinodal initial datum: m plus a random perturbation of size at most
/// amplitude, built from the modes with k, l < 2 only. Higher modes would be
/// damped within the first step and their splitting error would swamp the
/// first-order energy balance.
ScalarField spinodal_datum(const Grid& grid, std::uint64_t seed, double m = 0.0,
                           double amplitude = 0.05);

} // namespace chfh
