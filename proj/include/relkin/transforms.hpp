#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relkin/lorentz.hpp"

namespace relkin {

enum class EquationForm { nondivergence, divergence };
enum class Provenance { original, classicalized, boosted, p_scaled };
enum class TransportKind { relativistic, classical };  // p/<p> . grad_x versus v . grad_x

const char* to_string(Provenance p);

// d_t u + w . grad_x u = tr(A D^2 u) + B . grad u + s   (nondivergence)
//                      = div(A grad u) + B . grad u + s (divergence)
// The third slot of the phase point is p or v depending on the transport.
struct LinearCoefficients {
    std::function<Mat3(const PhasePoint&)> A;
    std::function<Vec3(const PhasePoint&)> B;
    std::function<double(const PhasePoint&)> s;
    EquationForm form = EquationForm::nondivergence;
    TransportKind transport = TransportKind::relativistic;
    std::vector<Provenance> provenance{Provenance::original};
};
using TransformedCoefficients = LinearCoefficients;

// Value and derivatives of a field at one phase point.
struct Jet {
    double u = 0, ut = 0;
    Vec3 ux = Vec3::Zero(), up = Vec3::Zero();
    Mat3 upp = Mat3::Zero();
};

// u(t, x, psi(v)) given the p-jet of u at psi(v).
Jet pullback_velocity(const Jet& at_p, const Vec3& v);
// u(z0 o z) given the jet of u at z0 o z.
Jet pullback_boost(const Jet& at_zbar, const PhasePoint& z0, const PhasePoint& z);
// g(t, x, v) = u(t, P x, P v) given the jet of u at (t, P x, P v).
Jet pullback_linear(const Jet& at_Pz, const Mat3& P);

// v -> p = psi(v) on |v| < 1. Coefficients are evaluated at psi(v); |v| >= 1 throws DomainError.
TransformedCoefficients classicalize(const LinearCoefficients& c);
// Coefficients of u(z0 o z). S is the Jacobian of z0^{-1} o in p, taken at the boosted momentum.
TransformedCoefficients boost_conjugate(const LinearCoefficients& c, const PhasePoint& z0);
// Classical coefficients of u(t, P x, P v).
TransformedCoefficients p_conjugate(const LinearCoefficients& c, const Mat3& P);

Mat3 boost_jacobian_inverse(const Vec3& pbar, const Vec3& p0);  // S_ij = d p_i / d pbar_j
Mat3 p_scaling(const Vec3& p0);

// Radii from the Schauder chain: R' = <p0>^{-3/2} R^2 / sqrt(1+R^2) and R'' = R / (2 <p0>^4 sqrt(1+R^2)).
double schauder_radius(double R, const Vec3& p0);
double calpha_radius(double R, const Vec3& p0);

// Pointwise residual of the declared equation. Divergence form differentiates A numerically in the third
// slot with a 4th-order stencil of step div_step.
double residual(const Jet& u, const LinearCoefficients& c, const PhasePoint& z, double div_step = 1e-3);

struct EllipticityWindow {
    double perp_min = 1e300, perp_max = 0;  // xi . A xi / (<p0> |xi|^2), xi perp p0
    double par_min = 1e300, par_max = 0;    // xi . A xi <p0> / |xi|^2, xi parallel p0, z in Q_{1/<p0>}
    double par_max_q1 = 0;                  // same quotient over all of Q_1; grows like <p0>^2
    double ap_min = 1e300, ap_max = 0;      // eigenvalue range of A_P
    std::size_t samples = 0;
};

// A = random constant SPD with spectrum in [lambda, Lambda], |p0| <= p0_max. The perpendicular window
// is sampled on Q_1; the parallel one only holds for |p_perp| <~ 1/<p0>, so it is sampled on Q_{1/<p0>}.
// A_P is sampled for |v| <= r/<p0>.
EllipticityWindow ellipticity_window(double lambda, double Lambda, double p0_max, std::size_t samples,
                                     std::uint64_t seed, double r = 0.1);

}  // namespace relkin
