#include "chfh/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chfh/discrete.hpp"

namespace chfh {

namespace {

void require_open(double s, const char* what)
{
    if (!(std::abs(s) < 1.0)) {
        std::ostringstream msg;
        msg << what << ": argument " << s << " outside (-1, 1)";
        throw std::domain_error(msg.str());
    }
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double entropy(double s) { return xlogx(1.0 + s) + xlogx(1.0 - s); }

} // namespace

PotentialParams make_potential(double theta, double theta0)
{
    if (!(theta > 0.0))
        throw std::invalid_argument("theta must be positive");
    if (!(theta0 > theta))
        throw std::invalid_argument("theta0 must exceed theta");
    return {theta, theta0};
}

double clamp_open(double s, bool* clamped)
{
    const double lim = 1.0 - kClamp;
    if (s > lim || s < -lim || std::isnan(s)) {
        if (clamped)
            *clamped = true;
        return std::isnan(s) ? 0.0 : std::clamp(s, -lim, lim);
    }
    return s;
}

double f_convex(double s, const PotentialParams& p)
{
    require_open(s, "F");
    return 0.5 * p.theta * entropy(s);
}

double psi(double s, const PotentialParams& p)
{
    require_open(s, "Psi");
    return 0.5 * p.theta * entropy(s) - 0.5 * p.theta0 * s * s;
}

double f_prime(double s, const PotentialParams& p)
{
    require_open(s, "F'");
    return p.theta * std::atanh(s);
}

double psi_prime(double s, const PotentialParams& p)
{
    return f_prime(s, p) - p.theta0 * s;
}

double f_second(double s, const PotentialParams& p)
{
    require_open(s, "F''");
    return p.theta / ((1.0 - s) * (1.0 + s));
}

namespace {

double energy_with(const ScalarField& phi, const PotentialParams& p, double concave_weight)
{
    require_finite(phi, "energy");
    double bulk = 0.0;
    for (double v : phi.values()) {
        const double s = clamp_open(v);
        bulk += 0.5 * p.theta * entropy(s) - 0.5 * concave_weight * s * s;
    }
    const double e = 0.5 * grad_norm_sq(phi) + bulk * phi.grid().cell_area();
    if (!std::isfinite(e))
        throw std::domain_error("energy: non-finite result");
    return e;
}

} // namespace

double energy(const ScalarField& phi, const PotentialParams& p)
{
    return energy_with(phi, p, p.theta0);
}

double energy_convex(const ScalarField& phi, const PotentialParams& p)
{
    return energy_with(phi, p, 0.0);
}

ScalarField psi_prime_field(const ScalarField& phi, const PotentialParams& p)
{
    ScalarField out(phi.grid());
    for (std::size_t k = 0; k < phi.size(); ++k)
        out[k] = psi_prime(clamp_open(phi[k]), p);
    return out;
}

MobilitySpec MobilitySpec::constant(double m0)
{
    if (!(m0 > 0.0))
        throw std::invalid_argument("constant mobility must be positive");
    MobilitySpec s;
    s.form_ = Form::constant;
    s.m0_ = m0;
    s.b_min_ = s.b_max_ = m0;
    return s;
}

MobilitySpec MobilitySpec::polynomial(std::vector<double> coeffs, double b_min, double b_max)
{
    if (coeffs.empty())
        throw std::invalid_argument("mobility polynomial needs at least one coefficient");
    if (!(b_min > 0.0) || !(b_max >= b_min))
        throw std::invalid_argument("mobility bounds must satisfy 0 < b_min <= b_max");
    MobilitySpec s;
    s.form_ = Form::nondegenerate;
    s.coeffs_ = std::move(coeffs);
    s.b_min_ = b_min;
    s.b_max_ = b_max;
    constexpr int kSweep = 10000;
    for (int k = 0; k <= kSweep; ++k) {
        const double x = -1.0 + 2.0 * k / kSweep;
        const double b = s.eval(x).b;
        if (b < b_min * (1.0 - 1e-12) || b > b_max * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "mobility b(" << x << ") = " << b << " violates declared bounds [" << b_min
                << ", " << b_max << "]";
            throw std::invalid_argument(msg.str());
        }
    }
    return s;
}

MobilitySpec MobilitySpec::degenerate(double m0)
{
    if (!(m0 > 0.0))
        throw std::invalid_argument("degenerate mobility scale must be positive");
    MobilitySpec s;
    s.form_ = Form::degenerate;
    s.m0_ = m0;
    s.b_min_ = 0.0;
    s.b_max_ = m0;
    return s;
}

MobilityValue MobilitySpec::eval(double s) const
{
    if (!(std::abs(s) <= 1.0)) {
        std::ostringstream msg;
        msg << "mobility argument " << s << " outside [-1, 1]";
        throw std::domain_error(msg.str());
    }
    switch (form_) {
    case Form::constant:
        return {m0_, 0.0, 0.0};
    case Form::degenerate:
        return {m0_ * (1.0 - s * s), -2.0 * m0_ * s, -2.0 * m0_};
    case Form::nondegenerate:
        break;
    }
    // Horner for b, b', b''.
    double b = 0.0, db = 0.0, d2b = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        d2b = d2b * s + 2.0 * db;
        db = db * s + b;
        b = b * s + *it;
    }
    return {b, db, d2b};
}

FaceCoeffs MobilitySpec::faces(const ScalarField& phi, FaceMean mode) const
{
    ScalarField cell(phi.grid());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double s = std::clamp(phi[k], -1.0, 1.0);
        double b = eval(s).b;
        if (form_ == Form::degenerate)
            b = std::max(b, 1e-12);
        cell[k] = b;
    }
    return face_average(cell, mode);
}

} // namespace chfh
