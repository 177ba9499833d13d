#include "chfh/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chfh/discrete.hpp"

namespace chfh {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream_id)
{
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (stream_id * 0xd1342543de82ef95ULL);
    engine_.seed(splitmix64(t));
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ScalarField band_limited_field(const Grid& grid, const RandomFieldSpec& spec, std::uint64_t stream_id)
{
    if (spec.modes < 1)
        throw std::invalid_argument("band_limited_field: modes must be at least 1");
    const int K = spec.modes;
    Rng rng(spec.seed, stream_id);
    std::vector<double> a(static_cast<std::size_t>(K * K), 0.0);
    double l1 = 0.0;
    for (int l = 0; l < K; ++l)
        for (int k = 0; k < K; ++k) {
            const double c = rng.normal() * std::pow(1.0 + k * k + l * l, -0.5 * spec.decay);
            if (spec.zero_mean && k == 0 && l == 0)
                continue;
            a[static_cast<std::size_t>(l * K + k)] = c;
            l1 += std::abs(c);
        }
    const double scale = l1 > 0.0 ? spec.amplitude / l1 : 0.0;

    std::vector<double> cx(static_cast<std::size_t>(K * grid.nx)), cy(static_cast<std::size_t>(K * grid.ny));
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < grid.nx; ++i)
            cx[static_cast<std::size_t>(k * grid.nx + i)] = std::cos(std::numbers::pi * k * grid.x_center(i) / grid.lx);
    for (int l = 0; l < K; ++l)
        for (int j = 0; j < grid.ny; ++j)
            cy[static_cast<std::size_t>(l * grid.ny + j)] = std::cos(std::numbers::pi * l * grid.y_center(j) / grid.ly);

    ScalarField f(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            double s = 0.0;
            for (int l = 0; l < K; ++l)
                for (int k = 0; k < K; ++k)
                    s += a[static_cast<std::size_t>(l * K + k)] * cx[static_cast<std::size_t>(k * grid.nx + i)] *
                         cy[static_cast<std::size_t>(l * grid.ny + j)];
            f[grid.index(i, j)] = scale * s;
        }
    return spec.zero_mean ? subtract_mean(f) : f;
}

ScalarField spinodal_datum(const Grid& grid, std::uint64_t seed, double m, double amplitude)
{
    ScalarField f = band_limited_field(grid, RandomFieldSpec{seed, 2, amplitude, 1.0, true});
    for (double& v : f.values())
        v += m;
    return f;
}

} // namespace chfh
