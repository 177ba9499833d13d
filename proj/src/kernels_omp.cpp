#include "chfh/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chfh::kernels {

namespace {

constexpr std::ptrdiff_t kBlock = 4096;

double row_ordered_sum(const std::vector<double>& partial)
{
    double s = 0.0;
    for (double p : partial)
        s += p;
    return s;
}

} // namespace

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void laplacian(const Grid& g, std::span<const double> in, std::span<double> out)
{
    const int nx = g.nx, ny = g.ny;
    const double ix2 = 1.0 / (g.hx * g.hx), iy2 = 1.0 / (g.hy * g.hy);
    const double* f = in.data();
    double* o = out.data();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        const double* row = f + static_cast<std::ptrdiff_t>(j) * nx;
        const double* below = j > 0 ? row - nx : nullptr;
        const double* above = j + 1 < ny ? row + nx : nullptr;
        double* orow = o + static_cast<std::ptrdiff_t>(j) * nx;
        for (int i = 0; i < nx; ++i) {
            const double c = row[i];
            double fx = 0.0, fy = 0.0;
            if (i + 1 < nx)
                fx += row[i + 1] - c;
            if (i > 0)
                fx -= c - row[i - 1];
            if (above)
                fy += above[i] - c;
            if (below)
                fy -= c - below[i];
            orow[i] = fx * ix2 + fy * iy2;
        }
    }
}

void div_b_grad(const Grid& g, std::span<const double> bx, std::span<const double> by,
                std::span<const double> in, std::span<double> out)
{
    const int nx = g.nx, ny = g.ny;
    const double ix2 = 1.0 / (g.hx * g.hx), iy2 = 1.0 / (g.hy * g.hy);
    const double* f = in.data();
    double* o = out.data();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        const double* row = f + static_cast<std::ptrdiff_t>(j) * nx;
        const double* xb = bx.data() + static_cast<std::ptrdiff_t>(j) * (nx + 1);
        const double* yb_lo = by.data() + static_cast<std::ptrdiff_t>(j) * nx;
        const double* yb_hi = yb_lo + nx;
        double* orow = o + static_cast<std::ptrdiff_t>(j) * nx;
        for (int i = 0; i < nx; ++i) {
            const double c = row[i];
            double fx = 0.0, fy = 0.0;
            if (i + 1 < nx)
                fx += xb[i + 1] * (row[i + 1] - c);
            if (i > 0)
                fx -= xb[i] * (c - row[i - 1]);
            if (j + 1 < ny)
                fy += yb_hi[i] * (row[i + nx] - c);
            if (j > 0)
                fy -= yb_lo[i] * (c - row[i - nx]);
            orow[i] = fx * ix2 + fy * iy2;
        }
    }
}

double weighted_grad_sq(const Grid& g, std::span<const double> bx, std::span<const double> by,
                        std::span<const double> f)
{
    const int nx = g.nx, ny = g.ny;
    const double wx = g.hy / g.hx, wy = g.hx / g.hy;
    std::vector<double> partial(static_cast<std::size_t>(ny), 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        const double* row = f.data() + static_cast<std::ptrdiff_t>(j) * nx;
        const double* xb = bx.data() + static_cast<std::ptrdiff_t>(j) * (nx + 1);
        const double* yb = by.data() + static_cast<std::ptrdiff_t>(j) * nx;
        double sx = 0.0, sy = 0.0;
        for (int i = 1; i < nx; ++i) {
            const double d = row[i] - row[i - 1];
            sx += xb[i] * d * d;
        }
        if (j > 0)
            for (int i = 0; i < nx; ++i) {
                const double d = row[i] - row[i - nx];
                sy += yb[i] * d * d;
            }
        partial[static_cast<std::size_t>(j)] = sx * wx + sy * wy;
    }
    return row_ordered_sum(partial);
}

double grad_sq(const Grid& g, std::span<const double> f)
{
    const int nx = g.nx, ny = g.ny;
    const double wx = g.hy / g.hx, wy = g.hx / g.hy;
    std::vector<double> partial(static_cast<std::size_t>(ny), 0.0);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        const double* row = f.data() + static_cast<std::ptrdiff_t>(j) * nx;
        double sx = 0.0, sy = 0.0;
        for (int i = 1; i < nx; ++i) {
            const double d = row[i] - row[i - 1];
            sx += d * d;
        }
        if (j > 0)
            for (int i = 0; i < nx; ++i) {
                const double d = row[i] - row[i - nx];
                sy += d * d;
            }
        partial[static_cast<std::size_t>(j)] = sx * wx + sy * wy;
    }
    return row_ordered_sum(partial);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const std::ptrdiff_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < nblocks; ++blk) {
        const std::ptrdiff_t lo = blk * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::ptrdiff_t k = lo; k < hi; ++k)
            s += a[k] * b[k];
        partial[static_cast<std::size_t>(blk)] = s;
    }
    return row_ordered_sum(partial);
}

double sum(std::span<const double> a)
{
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const std::ptrdiff_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < nblocks; ++blk) {
        const std::ptrdiff_t lo = blk * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::ptrdiff_t k = lo; k < hi; ++k)
            s += a[k];
        partial[static_cast<std::size_t>(blk)] = s;
    }
    return row_ordered_sum(partial);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        y[k] += alpha * x[k];
}

void xpby(std::span<const double> x, double beta, std::span<double> y)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        y[k] = x[k] + beta * y[k];
}

void scale(double alpha, std::span<double> x)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        x[k] *= alpha;
}

void add_constant(double c, std::span<double> x)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        x[k] += c;
}

} // namespace chfh::kernels
