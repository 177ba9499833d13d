#pragma once

#include <memory>
#include <span>
#include <vector>

#include "chfh/grid.hpp"

namespace chfh {

/// Eigenvalues of the 1D Neumann second-difference operator on n cells of
/// width h: -(2/h^2)(1 - cos(pi k / n)), k = 0..n-1.
std::vector<double> neumann_eigenvalues(int n, double h);

/// Two-dimensional type-II cosine transform that diagonalizes the Neumann
/// Laplacian. Backed by FFTW; forward() matches kernels::serial::dct2 and
/// inverse() undoes it exactly (up to rounding).
///
/// forward/inverse are safe to call concurrently on one instance.
class CosineTransform {
public:
    explicit CosineTransform(const Grid& grid);
    ~CosineTransform();
    CosineTransform(const CosineTransform&) = delete;
    CosineTransform& operator=(const CosineTransform&) = delete;

    const Grid& grid() const { return grid_; }
    const std::vector<double>& eigen_x() const { return lam_x_; }
    const std::vector<double>& eigen_y() const { return lam_y_; }

    void forward(std::span<const double> in, std::span<double> out) const;
    void inverse(std::span<const double> in, std::span<double> out) const;

    /// out = T^{-1} diag(1/symbol) T in. A mode whose symbol is exactly zero
    /// is mapped to zero.
    void solve_modal(std::span<const double> in, std::span<double> out,
                     std::span<const double> symbol) const;

    /// Shared instance for a grid; created on first use.
    static std::shared_ptr<const CosineTransform> for_grid(const Grid& grid);

private:
    Grid grid_;
    std::vector<double> lam_x_, lam_y_;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
};

/// Solves (alpha I - beta Lap_h) u = rhs with Neumann data.
///
/// Needs alpha > 0 and beta >= 0, or alpha = 0, beta > 0 and a zero-mean rhs,
/// in which case the zero-mean solution is returned. Throws
/// std::invalid_argument for alpha = beta = 0 and std::domain_error for a
/// singular system (alpha = 0 with a nonzero mean).
ScalarField dct_helmholtz_solve(double alpha, double beta, const ScalarField& rhs);

} // namespace chfh
