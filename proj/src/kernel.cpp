#include "relkin/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "relkin/rng.hpp"

namespace relkin {

double kappa_theta_integral(double p_norm, double rel_tol) {
    const double a = p_norm * p_norm;
    auto f = [a](double th) {
        const double s = std::sin(th);
        return s / std::pow(1.0 + a * s * s, 1.5);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi, 30, rel_tol, &err);
}

double kappa(const Vec3& p) { return kKappaPrefactor * energy(p) * kappa_theta_integral(p.norm()); }

namespace {

void bump(BoundStat& s, double ratio) {
    ++s.evaluated;
    if (std::isfinite(ratio)) s.max_ratio = std::max(s.max_ratio, ratio);
}

// Mixture: near-diagonal pairs, far pairs, and pairs on the outer shell.
void sample_pair(Rng& rng, double cap, Vec3& p, Vec3& q) {
    const double u = rng.uniform();
    p = rng.radial_uniform(cap);
    if (u < 0.4) {
        q = p + rng.unit_vector() * std::pow(10.0, rng.uniform(-4.0, 0.0));
    } else if (u < 0.8) {
        q = rng.radial_uniform(cap);
    } else {
        p = rng.unit_vector() * cap * rng.uniform(0.9, 1.0);
        q = rng.unit_vector() * cap * rng.uniform(0.0, 1.0);
    }
}

}  // namespace

KernelBoundReport kernel_bound_report(std::int64_t samples, double cap, std::uint64_t seed) {
    KernelBoundReport r;
    r.gs_lower.name = "(|p-q|^2+|pxq|^2)/(2<p><q>) <= tau-2";
    r.gs_upper.name = "tau-2 <= |p-q|^2/2";
    r.phi_near.name = "|Phi_ij| |p-q| / (<p><q>)^1/2, tau-2 < 1/8";
    r.phi_far.name = "|Phi_ij| / (<p>/<q> + <q>/<p>), tau-2 >= 1/8";
    r.g_upper.name = "G |p-q|";
    r.grad_g.name = "|grad_p G| / (<q>^7/2 (1 + |p-q|^-2))";
    r.min_tau = 1e300;
    Rng rng(seed, 0x6b65726e656c);
    constexpr double slack = 1e-12;
    for (std::int64_t i = 0; i < samples; ++i) {
        Vec3 p, q;
        sample_pair(rng, cap, p, q);
        if (p == q) continue;
        const double ep = energy(p), eq = energy(q);
        const double tm2 = tau_minus_2(p, q, ep, eq);
        const double d2 = (p - q).squaredNorm();
        const double lower = (d2 + p.cross(q - p).squaredNorm()) / (2.0 * ep * eq);
        const double upper = 0.5 * d2;
        ++r.gs_lower.evaluated;
        ++r.gs_upper.evaluated;
        if (lower > tm2 * (1 + slack)) ++r.gs_lower.violations;
        if (tm2 > upper * (1 + slack)) ++r.gs_upper.violations;
        r.gs_lower.max_ratio = std::max(r.gs_lower.max_ratio, lower / tm2);
        r.gs_upper.max_ratio = std::max(r.gs_upper.max_ratio, tm2 / upper);
        r.min_tau = std::min(r.min_tau, tm2 + 2.0);

        const KernelEval k = kernel_eval(p, q);
        const double phimax = k.Phi.cwiseAbs().maxCoeff();
        const double dist = std::sqrt(d2);
        if (tm2 < 0.125)
            bump(r.phi_near, phimax * dist / std::sqrt(ep * eq));
        else
            bump(r.phi_far, phimax / (ep / eq + eq / ep));
        bump(r.g_upper, k.G * dist);
        bump(r.grad_g, k.gradG.norm() / (std::pow(eq, 3.5) * (1.0 + 1.0 / d2)));
    }
    return r;
}

NullDirectionReport null_direction_check(std::int64_t samples, double cap, std::uint64_t seed) {
    NullDirectionReport r;
    Rng rng(seed, 0x6e756c6c);
    for (std::int64_t i = 0; i < samples; ++i) {
        Vec3 p, q;
        sample_pair(rng, cap, p, q);
        if (i % 4 == 0) q = p * rng.uniform(-3.0, 3.0);  // collinear
        if (p == q) continue;
        const double tm2 = tau_minus_2(p, q);
        const Mat3 S = s_matrix(p, q, tm2);
        // p/<p> - q/<q> without cancellation when p is close to q
        const double ep = energy(p), eq = energy(q);
        const Vec3 w = (p - q) / ep + q * ((q - p).dot(q + p) / (ep * eq * (ep + eq)));
        const double scale = S.norm() * w.norm();
        if (scale == 0.0) continue;
        ++r.evaluated;
        r.max_rel_residual = std::max(r.max_rel_residual, (S * w).norm() / scale);
    }
    return r;
}

}  // namespace relkin
