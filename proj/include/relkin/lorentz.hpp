#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "relkin/types.hpp"

namespace relkin {

template <class D> typename D::Scalar energy(const Eigen::MatrixBase<D>& p) {
    using S = typename D::Scalar;
    if (!p.allFinite()) throw DomainError("energy: non-finite momentum");
    return std::sqrt(S(1) + p.squaredNorm());
}

// For |p| beyond ~1e8 the quotient rounds to the unit sphere; pull it back inside.
template <class D> Vec3T<typename D::Scalar> mom_to_vel(const Eigen::MatrixBase<D>& p) {
    using S = typename D::Scalar;
    Vec3T<S> v = p / energy(p);
    const S n = v.norm();
    if (n >= S(1)) v *= std::nextafter(S(1), S(0)) / n;
    return v;
}

template <class D> Vec3T<typename D::Scalar> vel_to_mom(const Eigen::MatrixBase<D>& v) {
    using S = typename D::Scalar;
    const S v2 = v.squaredNorm();
    if (!(v2 < S(1))) throw DomainError("vel_to_mom: |v| >= 1");
    return v / std::sqrt(S(1) - v2);
}

// Parallel part of x along dir. A zero dir gives a zero parallel part.
template <class S> Vec3T<S> parallel_part(const Vec3T<S>& x, const Vec3T<S>& dir) {
    const S n2 = dir.squaredNorm();
    if (n2 == S(0)) return Vec3T<S>::Zero();
    return dir * (dir.dot(x) / n2);
}

// x_perp + c x_par, split along dir.
template <class S> Vec3T<S> stretch_along(const Vec3T<S>& x, const Vec3T<S>& dir, S c) {
    return x + (c - S(1)) * parallel_part(x, dir);
}

// z0 o_L z
template <class S> PhasePointT<S> boost_forward(const PhasePointT<S>& z0, const PhasePointT<S>& z) {
    const S e0 = energy(z0.p);
    PhasePointT<S> r;
    r.t = z0.t + z.t * e0 + z0.p.dot(z.x);
    r.x = z0.x + stretch_along(z.x, z0.p, e0) + z0.p * z.t;
    r.p = stretch_along(z.p, z0.p, e0) + z0.p * energy(z.p);
    return r;
}

// z0^{-1} o_L z
template <class S> PhasePointT<S> boost_inverse(const PhasePointT<S>& z0, const PhasePointT<S>& z) {
    const S e0 = energy(z0.p);
    const S dt = z.t - z0.t;
    const Vec3T<S> dx = z.x - z0.x;
    PhasePointT<S> r;
    r.t = e0 * dt - z0.p.dot(dx);
    r.x = stretch_along(dx, z0.p, e0) - z0.p * dt;
    r.p = stretch_along(z.p, z0.p, e0) - z0.p * energy(z.p);
    return r;
}

// Galilean group law, points are (t, x, v).
template <class S> PhasePointT<S> gal_forward(const PhasePointT<S>& z0, const PhasePointT<S>& z) {
    return {z0.t + z.t, z0.x + z.x + z.t * z0.p, z0.p + z.p};
}

template <class S> PhasePointT<S> gal_inverse(const PhasePointT<S>& z0, const PhasePointT<S>& z) {
    const S dt = z.t - z0.t;
    return {dt, z.x - z0.x - dt * z0.p, z.p - z0.p};
}

// |t|^{1/2} + |x|^{1/3} + |p|
template <class S> S kinetic_norm(const PhasePointT<S>& z) {
    return std::sqrt(std::abs(z.t)) + std::cbrt(z.x.norm()) + z.p.norm();
}

// Frame centered at the second argument.
template <class S> S dist_L(const PhasePointT<S>& z, const PhasePointT<S>& z0) {
    return kinetic_norm(boost_inverse(z0, z));
}

// Arguments in (t, x, v) coordinates.
template <class S> S dist_G(const PhasePointT<S>& z, const PhasePointT<S>& z0) {
    return kinetic_norm(gal_inverse(z0, z));
}

template <class S> PhasePointT<S> to_velocity(const PhasePointT<S>& z) { return {z.t, z.x, mom_to_vel(z.p)}; }
template <class S> PhasePointT<S> to_momentum(const PhasePointT<S>& z) { return {z.t, z.x, vel_to_mom(z.p)}; }

// I + (<p>-1) p^ p^T, written as I + p p^T / (<p>+1) so p = 0 needs no branch.
template <class D> Mat3T<typename D::Scalar> m_matrix(const Eigen::MatrixBase<D>& pin) {
    using S = typename D::Scalar;
    const Vec3T<S> p = pin;
    return Mat3T<S>::Identity() + p * p.transpose() / (energy(p) + S(1));
}

template <class D> Mat4T<typename D::Scalar> boost_matrix(const Eigen::MatrixBase<D>& pin) {
    using S = typename D::Scalar;
    const Vec3T<S> p = pin;
    Mat4T<S> L;
    L(0, 0) = energy(p);
    L.template block<1, 3>(0, 1) = -p.transpose();
    L.template block<3, 1>(1, 0) = -p;
    L.template block<3, 3>(1, 1) = m_matrix(p);
    return L;
}

template <class S> struct BoostDecompositionT {
    Mat3T<S> rotation;
    S residual_norm;      // |T - diag(1,R)|
    S orthogonality;      // |R^T R - I|
    S det;
};
using BoostDecomposition = BoostDecompositionT<double>;

// T = L(pbar2) L(p0) L(-p2) with pbar2 the momentum part of z0^{-1} o z2.
template <class D1, class D2>
BoostDecompositionT<typename D1::Scalar> boost_product_decompose(const Eigen::MatrixBase<D1>& p0in,
                                                                 const Eigen::MatrixBase<D2>& p2in) {
    using S = typename D1::Scalar;
    const Vec3T<S> p0 = p0in, p2 = p2in;
    const Vec3T<S> pbar = stretch_along(p2, p0, energy(p0)) - p0 * energy(p2);
    const Mat4T<S> T = boost_matrix(pbar) * boost_matrix(p0) * boost_matrix(-p2);
    BoostDecompositionT<S> d;
    d.rotation = T.template block<3, 3>(1, 1);
    Mat4T<S> D = Mat4T<S>::Identity();
    D.template block<3, 3>(1, 1) = d.rotation;
    d.residual_norm = (T - D).norm();
    d.orthogonality = (d.rotation.transpose() * d.rotation - Mat3T<S>::Identity()).norm();
    d.det = d.rotation.determinant();
    return d;
}

enum class CylinderKind { kinetic, relativistic, transformed };

struct CylinderSpec {
    PhasePoint center;
    double radius = 1.0;
    CylinderKind kind = CylinderKind::relativistic;
};

// -r^2 < t <= 0, |x| < r^3, |p| < r on an already recentered point.
inline bool unit_cylinder_test(const PhasePoint& w, double r) {
    return -r * r < w.t && w.t <= 0.0 && w.x.norm() < r * r * r && w.p.norm() < r;
}

// kinetic: center and z in (t,x,v); relativistic and transformed: in (t,x,p).
inline bool cylinder_contains(const CylinderSpec& c, const PhasePoint& z) {
    if (!(c.radius > 0)) throw DomainError("cylinder radius must be positive");
    switch (c.kind) {
    case CylinderKind::kinetic:
        return unit_cylinder_test(gal_inverse(c.center, z), c.radius);
    case CylinderKind::relativistic:
        return unit_cylinder_test(boost_inverse(c.center, z), c.radius);
    case CylinderKind::transformed:
        return unit_cylinder_test(gal_inverse(to_velocity(c.center), to_velocity(z)), c.radius);
    }
    return false;
}

struct RatioStat {
    std::string name;
    double max_ratio = 0.0;
    std::int64_t evaluated = 0;
    std::int64_t skipped = 0;
};

struct MetricComparisonReport {
    RatioStat l_controls_g;
    RatioStat g_controls_l;
    RatioStat e_controls_l;   // |p-p0| <= C <p0>^2 |pbar|
    RatioStat perp_parallel;  // both inequalities, worst LHS - RHS (must be <= slack)
};

MetricComparisonReport metric_comparison_report(std::int64_t samples, double momentum_cap, std::uint64_t seed);

}  // namespace relkin
