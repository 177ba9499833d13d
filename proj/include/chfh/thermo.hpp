#pragma once

#include <vector>

#include "chfh/grid.hpp"

namespace chfh {

/// Flory-Huggins parameters: Psi(s) = (theta/2)[(1+s)ln(1+s) + (1-s)ln(1-s)] - (theta0/2) s^2.
struct PotentialParams {
    double theta = 1.0;
    double theta0 = 2.0;
};

/// Throws std::invalid_argument unless theta > 0 and theta0 > theta.
PotentialParams make_potential(double theta, double theta0);

/// Field evaluation clamps arguments into [-1 + kClamp, 1 - kClamp].
inline constexpr double kClamp = 1e-13;

// Scalar evaluations; all throw std::domain_error for |s| >= 1.
double psi(double s, const PotentialParams& p);
double psi_prime(double s, const PotentialParams& p);
double f_convex(double s, const PotentialParams& p);
double f_prime(double s, const PotentialParams& p);
double f_second(double s, const PotentialParams& p);

/// Clamped evaluation. Sets *clamped when s had to be moved inside.
double clamp_open(double s, bool* clamped = nullptr);

double energy(const ScalarField& phi, const PotentialParams& p);
double energy_convex(const ScalarField& phi, const PotentialParams& p);

/// Cellwise Psi'(phi) with clamping.
ScalarField psi_prime_field(const ScalarField& phi, const PotentialParams& p);

struct MobilityValue {
    double b = 0.0;
    double db = 0.0;
    double d2b = 0.0;
};

/// Onsager mobility b(s) on [-1, 1].
class MobilitySpec {
public:
    enum class Form { constant, nondegenerate, degenerate };

    /// b = m0 > 0.
    static MobilitySpec constant(double m0);
    /// b(s) = sum_k coeffs[k] s^k with declared bounds 0 < b_min <= b <= b_max
    /// on [-1, 1]; the bounds are verified on a dense sweep.
    static MobilitySpec polynomial(std::vector<double> coeffs, double b_min, double b_max);
    /// b(s) = m0 (1 - s^2). No coercivity; runnable but unsupported by G_q.
    static MobilitySpec degenerate(double m0);

    Form form() const { return form_; }
    double b_min() const { return b_min_; }
    double b_max() const { return b_max_; }
    double m0() const { return m0_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Throws std::domain_error for |s| > 1.
    MobilityValue eval(double s) const;
    double operator()(double s) const { return eval(s).b; }

    /// Face mobility b(phi) by averaging cell values (harmonic by default).
    /// Degenerate cell values are floored at 1e-12.
    FaceCoeffs faces(const ScalarField& phi, FaceMean mode = FaceMean::harmonic) const;

private:
    MobilitySpec() = default;
    Form form_ = Form::constant;
    double m0_ = 1.0;
    std::vector<double> coeffs_;
    double b_min_ = 1.0;
    double b_max_ = 1.0;
};

} // namespace chfh
