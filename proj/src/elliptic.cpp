#include "chfh/elliptic.hpp"

#include <cmath>
#include <sstream>

#include "chfh/discrete.hpp"
#include "chfh/kernels.hpp"

namespace chfh {

namespace {

std::string defect_message(const char* what, double defect)
{
    std::ostringstream msg;
    msg << what << ": operand must have zero mean, mass defect " << defect;
    return msg.str();
}

} // namespace

MassDefectError::MassDefectError(const char* what, double defect)
    : std::domain_error(defect_message(what, defect)), defect_(defect)
{
}

SolverError::SolverError(const std::string& what, double residual, int iterations)
    : std::runtime_error(what), residual_(residual), iterations_(iterations)
{
}

void require_zero_mean(const ScalarField& f, const char* what)
{
    const double m = mean(f);
    const double scale = max_abs(f);
    if (std::abs(m) > kZeroMeanTol * scale)
        throw MassDefectError(what, m);
}

EllipticWorkspace::EllipticWorkspace(const Grid& grid, double pcg_tol, int pcg_max_iter)
    : grid_(grid), pcg_tol_(pcg_tol), pcg_max_iter_(pcg_max_iter),
      transform_(CosineTransform::for_grid(grid))
{
    if (!(pcg_tol > 0.0 && pcg_tol < 1.0))
        throw std::invalid_argument("pcg_tol must lie in (0, 1)");
    if (pcg_max_iter < 1)
        throw std::invalid_argument("pcg_max_iter must be at least 1");
    neg_lap_symbol_.resize(grid.size());
    for (int l = 0; l < grid.ny; ++l)
        for (int k = 0; k < grid.nx; ++k)
            neg_lap_symbol_[grid.index(k, l)] = -(transform_->eigen_x()[k] + transform_->eigen_y()[l]);
}

void EllipticWorkspace::apply_inverse_laplacian(std::span<const double> f, std::span<double> u) const
{
    transform_->solve_modal(f, u, neg_lap_symbol_);
}

ScalarField EllipticWorkspace::solve_weighted(const FaceCoeffs& b, const ScalarField& f)
{
    require_same_grid(b.grid, f.grid(), "solve_weighted");
    require_same_grid(grid_, f.grid(), "solve_weighted");
    require_zero_mean(f, "solve_Gq");
    ScalarField u(grid_);
    auto apply_a = [&](std::span<const double> in, std::span<double> out) {
        kernels::div_b_grad(grid_, b.x, b.y, in, out);
        kernels::scale(-1.0, out);
    };
    auto apply_m = [&](std::span<const double> in, std::span<double> out) {
        apply_inverse_laplacian(in, out);
    };
    last_ = pcg(apply_a, apply_m, f.values(), u.values(), pcg_tol_, pcg_max_iter_, true);
    if (!last_.converged) {
        std::ostringstream msg;
        msg << "solve_Gq: no convergence in " << last_.iterations << " iterations, residual "
            << last_.rel_residual;
        throw SolverError(msg.str(), last_.rel_residual, last_.iterations);
    }
    project_out_mean(u.values());
    return u;
}

ScalarField solve_G(const ScalarField& f)
{
    require_finite(f, "solve_G");
    require_zero_mean(f, "solve_G");
    return dct_helmholtz_solve(0.0, 1.0, subtract_mean(f));
}

ScalarField solve_Gq(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec,
                     EllipticWorkspace& ws)
{
    if (spec.form() == MobilitySpec::Form::degenerate)
        throw std::invalid_argument("solve_Gq: degenerate mobility has no coercivity");
    require_same_grid(q.grid(), f.grid(), "solve_Gq");
    for (double v : q.values())
        if (!(std::abs(v) <= 1.0))
            throw std::domain_error("solve_Gq: weight argument outside [-1, 1]");
    return ws.solve_weighted(spec.faces(q), f);
}

double hm1_norm(const ScalarField& f)
{
    return std::sqrt(grad_norm_sq(solve_G(f)));
}

double weighted_dual_norm(const ScalarField& q, const ScalarField& f, const MobilitySpec& spec,
                          EllipticWorkspace& ws)
{
    if (spec.form() == MobilitySpec::Form::degenerate)
        throw std::invalid_argument("weighted_dual_norm: degenerate mobility has no coercivity");
    const FaceCoeffs b = spec.faces(q);
    const ScalarField u = ws.solve_weighted(b, f);
    return std::sqrt(weighted_grad_norm_sq(b, u));
}

IdentityReport check_identities(const ScalarField& q, const ScalarField& f, const ScalarField& g,
                                const MobilitySpec& spec, EllipticWorkspace& ws)
{
    const FaceCoeffs b = spec.faces(q);
    const ScalarField gq_f = ws.solve_weighted(b, f);
    const ScalarField gq_g = ws.solve_weighted(b, g);
    IdentityReport rep;
    const double fg = inner(f, gq_g);
    const double gf = inner(g, gq_f);
    rep.symmetry_defect = std::abs(fg - gf);
    rep.symmetry_scale = std::max(std::abs(fg), std::abs(gf));
    rep.l2_sq = inner(f, f);
    rep.weighted_pairing = -inner(mobility_div_grad(b, gq_f), f);
    rep.unweighted_pairing = -inner(laplacian_neumann(gq_f), f);
    rep.interpolation_defect = std::abs(rep.l2_sq - rep.weighted_pairing);
    rep.weighted_cauchy_schwarz =
        std::sqrt(weighted_grad_norm_sq(b, gq_f)) * std::sqrt(weighted_grad_norm_sq(b, f));
    return rep;
}

} // namespace chfh
