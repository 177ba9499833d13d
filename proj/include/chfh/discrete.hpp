#pragma once

#include "chfh/grid.hpp"

namespace chfh {

/// Five-point Laplacian with homogeneous Neumann data. The output sums to
/// zero up to rounding.
ScalarField laplacian_neumann(const ScalarField& f);

/// div(b grad p) with face-centered b and zero boundary flux.
ScalarField mobility_div_grad(const FaceCoeffs& b_face, const ScalarField& p);

double mean(const ScalarField& f);
/// Cell-area weighted L2 inner product.
double inner(const ScalarField& f, const ScalarField& g);
double norm_l2(const ScalarField& f);
double norm_lp(const ScalarField& f, double r);
double max_abs(const ScalarField& f);

/// ||grad_h f||^2 summed over interior faces. Equals (-Lap_h f, f) exactly.
double grad_norm_sq(const ScalarField& f);
/// sum over faces of b |grad_h f|^2.
double weighted_grad_norm_sq(const FaceCoeffs& b_face, const ScalarField& f);

ScalarField subtract_mean(const ScalarField& f);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

void require_finite(const ScalarField& f, const char* what);

} // namespace chfh
