#include "chfh/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace chfh::kernels::serial {

// Ghost-cell form: the value outside the boundary mirrors the adjacent cell.
void laplacian(const Grid& g, std::span<const double> in, std::span<double> out)
{
    auto at = [&](int i, int j) {
        i = std::clamp(i, 0, g.nx - 1);
        j = std::clamp(j, 0, g.ny - 1);
        return in[g.index(i, j)];
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = at(i, j);
            out[g.index(i, j)] = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / (g.hx * g.hx) +
                                 (at(i, j + 1) - 2.0 * c + at(i, j - 1)) / (g.hy * g.hy);
        }
}

// Flux form: assemble face fluxes, then take their divergence.
void div_b_grad(const Grid& g, std::span<const double> bx, std::span<const double> by,
                std::span<const double> in, std::span<double> out)
{
    std::vector<double> flux_x(g.x_face_count(), 0.0), flux_y(g.y_face_count(), 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t f = static_cast<std::size_t>(j) * (g.nx + 1) + i;
            flux_x[f] = bx[f] * (in[g.index(i, j)] - in[g.index(i - 1, j)]) / g.hx;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t f = static_cast<std::size_t>(j) * g.nx + i;
            flux_y[f] = by[f] * (in[g.index(i, j)] - in[g.index(i, j - 1)]) / g.hy;
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t xl = static_cast<std::size_t>(j) * (g.nx + 1) + i;
            const std::size_t yl = static_cast<std::size_t>(j) * g.nx + i;
            out[g.index(i, j)] = (flux_x[xl + 1] - flux_x[xl]) / g.hx +
                                 (flux_y[yl + g.nx] - flux_y[yl]) / g.hy;
        }
}

double weighted_grad_sq(const Grid& g, std::span<const double> bx, std::span<const double> by,
                        std::span<const double> f)
{
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double d = (f[g.index(i, j)] - f[g.index(i - 1, j)]) / g.hx;
            s += bx[static_cast<std::size_t>(j) * (g.nx + 1) + i] * d * d * g.cell_area();
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d = (f[g.index(i, j)] - f[g.index(i, j - 1)]) / g.hy;
            s += by[static_cast<std::size_t>(j) * g.nx + i] * d * d * g.cell_area();
        }
    return s;
}

double grad_sq(const Grid& g, std::span<const double> f)
{
    const FaceCoeffs ones = FaceCoeffs::constant(g, 1.0);
    return weighted_grad_sq(g, ones.x, ones.y, f);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a[k] * b[k];
    return s;
}

double sum(std::span<const double> a)
{
    double s = 0.0;
    for (double v : a)
        s += v;
    return s;
}

namespace {

// Dense 1D transform along one axis; forward is type II, inverse is type III
// scaled so that inverse(forward(x)) = x.
void transform_axis(const Grid& g, std::span<const double> in, std::span<double> out, bool along_x,
                    bool inverse)
{
    const int n = along_x ? g.nx : g.ny;
    const int m = along_x ? g.ny : g.nx;
    std::vector<double> line(static_cast<std::size_t>(n)), res(static_cast<std::size_t>(n));
    for (int l = 0; l < m; ++l) {
        for (int k = 0; k < n; ++k)
            line[k] = along_x ? in[g.index(k, l)] : in[g.index(l, k)];
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            if (!inverse) {
                for (int i = 0; i < n; ++i)
                    s += line[i] * std::cos(std::numbers::pi * k * (i + 0.5) / n);
            } else {
                s = 0.5 * line[0];
                for (int i = 1; i < n; ++i)
                    s += line[i] * std::cos(std::numbers::pi * i * (k + 0.5) / n);
                s *= 2.0 / n;
            }
            res[k] = s;
        }
        for (int k = 0; k < n; ++k)
            (along_x ? out[g.index(k, l)] : out[g.index(l, k)]) = res[k];
    }
}

} // namespace

void dct2(const Grid& g, std::span<const double> in, std::span<double> out)
{
    std::vector<double> tmp(g.size());
    transform_axis(g, in, tmp, true, false);
    transform_axis(g, tmp, out, false, false);
}

void idct2(const Grid& g, std::span<const double> in, std::span<double> out)
{
    std::vector<double> tmp(g.size());
    transform_axis(g, in, tmp, true, true);
    transform_axis(g, tmp, out, false, true);
}

} // namespace chfh::kernels::serial
