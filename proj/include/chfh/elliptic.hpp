#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "chfh/dct.hpp"
#include "chfh/grid.hpp"
#include "chfh/krylov.hpp"
#include "chfh/thermo.hpp"

namespace chfh {

/// Raised when an operand that must have zero mean does not.
class MassDefectError : public std::domain_error {
public:
    MassDefectError(const char* what, double defect);
    double defect() const { return defect_; }

private:
    double defect_;
};

/// Raised when an iterative solver exhausts its budget.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations);
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Scratch state for the weighted inverse operator. One workspace per thread.
class EllipticWorkspace {
public:
    explicit EllipticWorkspace(const Grid& grid, double pcg_tol = 1e-10, int pcg_max_iter = 500);

    const Grid& grid() const { return grid_; }
    double pcg_tol() const { return pcg_tol_; }
    int pcg_max_iter() const { return pcg_max_iter_; }
    /// Statistics of the most recent weighted solve.
    const KrylovResult& last() const { return last_; }

    /// u = G f, the zero-mean inverse of -Lap_h, on raw arrays.
    void apply_inverse_laplacian(std::span<const double> f, std::span<double> u) const;

    /// Zero-mean solution of -div(b grad u) = f.
    ScalarField solve_weighted(const FaceCoeffs& b, const ScalarField& f);

private:
    Grid grid_;
    double pcg_tol_;
    int pcg_max_iter_;
    std::shared_ptr<const CosineTransform> transform_;
    std::vector<double> neg_lap_symbol_;
    KrylovResult last_;
};

/// Relative zero-mean tolerance shared by every H^{-1}_0 entry point.
inline constexpr double kZeroMeanTol = 1e-10;
void require_zero_mean(const ScalarField& f, const char* what);

/// Zero-mean u with -Lap_h u = f.
ScalarField solve_G(const ScalarField& f);

/// Zero-mean u with -div_h(b(q) grad_h u) = f, b evaluated at faces by
/// harmonic averaging. Refuses degenerate mobilities.
ScalarField solve_Gq(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec,
                     EllipticWorkspace& ws);

/// ||grad_h G f||.
double hm1_norm(const ScalarField& f);

/// ||sqrt(b(q)) grad_h G_q f||.
double weighted_dual_norm(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec,
                          EllipticWorkspace& ws);

struct IdentityReport {
    double symmetry_defect = 0.0;   ///< |<f, G_q g> - <g, G_q f>|
    double symmetry_scale = 0.0;    ///< max(|<f, G_q g>|, |<g, G_q f>|)
    double l2_sq = 0.0;             ///< ||f||^2
    double weighted_pairing = 0.0;  ///< (b(q) grad G_q f, grad f)
    double unweighted_pairing = 0.0;///< (grad G_q f, grad f), the form without b
    double interpolation_defect = 0.0; ///< |l2_sq - weighted_pairing|
    /// ||sqrt(b) grad G_q f|| * ||sqrt(b) grad f||; bounds l2_sq from above.
    double weighted_cauchy_schwarz = 0.0;
};

IdentityReport check_identities(const ScalarField& q, const ScalarField& f, const ScalarField& g,
                                const MobilitySpec& spec, EllipticWorkspace& ws);

} // namespace chfh
