#include "chfh/discrete.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chfh/kernels.hpp"

namespace chfh {

void require_finite(const ScalarField& f, const char* what)
{
    if (!f.all_finite())
        throw std::domain_error(std::string(what) + ": non-finite input");
}

ScalarField laplacian_neumann(const ScalarField& f)
{
    require_finite(f, "laplacian_neumann");
    ScalarField out(f.grid());
    kernels::laplacian(f.grid(), f.values(), out.values());
    return out;
}

ScalarField mobility_div_grad(const FaceCoeffs& b_face, const ScalarField& p)
{
    require_same_grid(b_face.grid, p.grid(), "mobility_div_grad");
    require_finite(p, "mobility_div_grad");
    for (double v : b_face.x)
        if (!std::isfinite(v))
            throw std::domain_error("mobility_div_grad: non-finite face coefficient");
    for (double v : b_face.y)
        if (!std::isfinite(v))
            throw std::domain_error("mobility_div_grad: non-finite face coefficient");
    ScalarField out(p.grid());
    kernels::div_b_grad(p.grid(), b_face.x, b_face.y, p.values(), out.values());
    return out;
}

double mean(const ScalarField& f)
{
    return kernels::sum(f.values()) / static_cast<double>(f.size());
}

double inner(const ScalarField& f, const ScalarField& g)
{
    require_same_grid(f.grid(), g.grid(), "inner");
    return kernels::dot(f.values(), g.values()) * f.grid().cell_area();
}

double norm_l2(const ScalarField& f)
{
    return std::sqrt(inner(f, f));
}

double norm_lp(const ScalarField& f, double r)
{
    // Scaled by the max so that large r neither overflows nor underflows.
    const double m = max_abs(f);
    if (m == 0.0)
        return 0.0;
    double s = 0.0;
    for (double v : f.values())
        s += std::pow(std::abs(v) / m, r);
    return m * std::pow(s * f.grid().cell_area(), 1.0 / r);
}

double max_abs(const ScalarField& f)
{
    double m = 0.0;
    for (double v : f.values())
        m = std::max(m, std::abs(v));
    return m;
}

double grad_norm_sq(const ScalarField& f)
{
    return kernels::grad_sq(f.grid(), f.values());
}

double weighted_grad_norm_sq(const FaceCoeffs& b_face, const ScalarField& f)
{
    require_same_grid(b_face.grid, f.grid(), "weighted_grad_norm_sq");
    return kernels::weighted_grad_sq(f.grid(), b_face.x, b_face.y, f.values());
}

ScalarField subtract_mean(const ScalarField& f)
{
    ScalarField out = f;
    kernels::add_constant(-mean(f), out.values());
    return out;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a.grid(), b.grid(), "operator+");
    ScalarField out = a;
    kernels::axpy(1.0, b.values(), out.values());
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a.grid(), b.grid(), "operator-");
    ScalarField out = a;
    kernels::axpy(-1.0, b.values(), out.values());
    return out;
}

ScalarField operator*(double s, const ScalarField& a)
{
    ScalarField out = a;
    kernels::scale(s, out.values());
    return out;
}

} // namespace chfh
