#pragma once

// Low-level stencil and reduction kernels on raw cell/face arrays.
//
// chfh::kernels holds the OpenMP versions used by the solver. Reductions are
// accumulated over fixed-size blocks and then summed in block order, so the
// result does not depend on the thread count. chfh::kernels::serial holds
// straightforward single-threaded versions kept as the reference for tests
// and benchmarks.

#include <span>

#include "chfh/grid.hpp"

namespace chfh::kernels {

/// out = Laplacian with homogeneous Neumann data (ghost-cell reflection).
void laplacian(const Grid& g, std::span<const double> in, std::span<double> out);

/// out = div(b grad in) with face coefficients bx, by (zero on the boundary).
void div_b_grad(const Grid& g, std::span<const double> bx, std::span<const double> by,
                std::span<const double> in, std::span<double> out);

/// Sum over all faces of b * |difference quotient|^2 * cell area.
double weighted_grad_sq(const Grid& g, std::span<const double> bx, std::span<const double> by,
                        std::span<const double> f);

/// Same with b = 1 on interior faces.
double grad_sq(const Grid& g, std::span<const double> f);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
void add_constant(double c, std::span<double> x);

namespace serial {

void laplacian(const Grid& g, std::span<const double> in, std::span<double> out);
void div_b_grad(const Grid& g, std::span<const double> bx, std::span<const double> by,
                std::span<const double> in, std::span<double> out);
double weighted_grad_sq(const Grid& g, std::span<const double> bx, std::span<const double> by,
                        std::span<const double> f);
double grad_sq(const Grid& g, std::span<const double> f);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

/// Direct O(N^2) per-axis type-II cosine transform, unnormalized:
/// out[k] = sum_i in[i] cos(pi k (i + 1/2) / n), applied along both axes.
void dct2(const Grid& g, std::span<const double> in, std::span<double> out);
/// Inverse of dct2.
void idct2(const Grid& g, std::span<const double> in, std::span<double> out);

} // namespace serial

int max_threads();

} // namespace chfh::kernels
