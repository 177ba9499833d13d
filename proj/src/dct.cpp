#include "chfh/dct.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "chfh/discrete.hpp"
#include "chfh/kernels.hpp"

namespace chfh {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

std::vector<double> neumann_eigenvalues(int n, double h)
{
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        lam[k] = -(2.0 / (h * h)) * (1.0 - std::cos(std::numbers::pi * k / n));
    return lam;
}

CosineTransform::CosineTransform(const Grid& grid)
    : grid_(grid), lam_x_(neumann_eigenvalues(grid.nx, grid.hx)),
      lam_y_(neumann_eigenvalues(grid.ny, grid.hy))
{
    std::vector<double> scratch(grid.size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    plan_fwd_ = fftw_plan_r2r_2d(grid.ny, grid.nx, scratch.data(), scratch.data(), FFTW_REDFT10,
                                 FFTW_REDFT10, flags);
    plan_inv_ = fftw_plan_r2r_2d(grid.ny, grid.nx, scratch.data(), scratch.data(), FFTW_REDFT01,
                                 FFTW_REDFT01, flags);
    if (!plan_fwd_ || !plan_inv_)
        throw std::runtime_error("FFTW could not plan the cosine transform");
}

CosineTransform::~CosineTransform()
{
    std::lock_guard lock(planner_mutex());
    if (plan_fwd_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void CosineTransform::forward(std::span<const double> in, std::span<double> out) const
{
    if (in.data() != out.data())
        std::copy(in.begin(), in.end(), out.begin());
    fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_), out.data(), out.data());
    // FFTW's REDFT10 carries a factor 2 per axis.
    kernels::scale(0.25, out);
}

void CosineTransform::inverse(std::span<const double> in, std::span<double> out) const
{
    if (in.data() != out.data())
        std::copy(in.begin(), in.end(), out.begin());
    fftw_execute_r2r(static_cast<fftw_plan>(plan_inv_), out.data(), out.data());
    kernels::scale(1.0 / static_cast<double>(grid_.size()), out);
}

void CosineTransform::solve_modal(std::span<const double> in, std::span<double> out,
                                  std::span<const double> symbol) const
{
    forward(in, out);
    const std::size_t n = out.size();
    for (std::size_t k = 0; k < n; ++k)
        out[k] = symbol[k] == 0.0 ? 0.0 : out[k] / symbol[k];
    inverse(out, out);
}

std::shared_ptr<const CosineTransform> CosineTransform::for_grid(const Grid& grid)
{
    using Key = std::tuple<int, int, double, double>;
    static std::mutex cache_mutex;
    static std::map<Key, std::shared_ptr<const CosineTransform>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[Key{grid.nx, grid.ny, grid.lx, grid.ly}];
    if (!slot)
        slot = std::make_shared<const CosineTransform>(grid);
    return slot;
}

ScalarField dct_helmholtz_solve(double alpha, double beta, const ScalarField& rhs)
{
    if (alpha == 0.0 && beta == 0.0)
        throw std::invalid_argument("dct_helmholtz_solve: alpha and beta are both zero");
    if (alpha < 0.0 || beta < 0.0)
        throw std::invalid_argument("dct_helmholtz_solve: alpha and beta must be non-negative");
    require_finite(rhs, "dct_helmholtz_solve");
    const Grid& g = rhs.grid();
    if (alpha == 0.0) {
        const double m = mean(rhs);
        const double scale = max_abs(rhs);
        if (std::abs(m) > 1e-10 * std::max(scale, 1e-300) && m != 0.0) {
            std::ostringstream msg;
            msg << "dct_helmholtz_solve: singular system, rhs mean " << m << " is not zero";
            throw std::domain_error(msg.str());
        }
    }
    const auto tr = CosineTransform::for_grid(g);
    std::vector<double> symbol(g.size());
    for (int l = 0; l < g.ny; ++l)
        for (int k = 0; k < g.nx; ++k)
            symbol[g.index(k, l)] = alpha - beta * (tr->eigen_x()[k] + tr->eigen_y()[l]);
    ScalarField u(g);
    tr->solve_modal(rhs.values(), u.values(), symbol);
    return u;
}

} // namespace chfh
