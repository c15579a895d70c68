#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "relkin/lorentz.hpp"

namespace relkin {

// tau - 2 = <p><q> - p.q - 1 rewritten as (|p-q|^2 + |p x q|^2) / (<p><q> + p.q + 1).
// The denominator is >= 1 for all p, q, so there is no cancellation near p = q.
template <class S> S tau_minus_2(const Vec3T<S>& p, const Vec3T<S>& q, S ep, S eq) {
    const Vec3T<S> d = q - p;
    // p x q = p x (q - p) avoids cancellation for nearly parallel large vectors
    return (d.squaredNorm() + p.cross(d).squaredNorm()) / (ep * eq + p.dot(q) + S(1));
}
template <class D1, class D2>
typename D1::Scalar tau_minus_2(const Eigen::MatrixBase<D1>& p, const Eigen::MatrixBase<D2>& q) {
    using S = typename D1::Scalar;
    const Vec3T<S> a = p, b = q;
    return tau_minus_2<S>(a, b, energy(a), energy(b));
}
template <class D1, class D2>
typename D1::Scalar tau(const Eigen::MatrixBase<D1>& p, const Eigen::MatrixBase<D2>& q) {
    return tau_minus_2(p, q) + typename D1::Scalar(2);
}

template <class S> struct KernelEvalT {
    S tau, lambda, G;
    Mat3T<S> S_, Phi, Psi;
    Vec3T<S> gradG, H;
};
using KernelEval = KernelEvalT<double>;

template <class S> Mat3T<S> s_matrix(const Vec3T<S>& p, const Vec3T<S>& q, S tm2) {
    const S t = tm2 + S(2);
    const Vec3T<S> d = p - q;
    return t * tm2 * Mat3T<S>::Identity() - d * d.transpose() + tm2 * (p * q.transpose() + q * p.transpose());
}

// grad_p G as g1 - g2, both terms written in closed form.
template <class S> Vec3T<S> grad_G(const Vec3T<S>& p, const Vec3T<S>& q, S ep, S eq, S tm2) {
    const S t = tm2 + S(2);
    const S tt = t * tm2;
    const S pq = p.dot(q);
    const Vec3T<S> g1 = (pq * p - q * (ep * ep)) / (ep * ep * ep * eq * std::sqrt(tt));
    const S tm1 = t - S(1);
    const Vec3T<S> g2 = tm1 * tm1 * (p * eq - q * ep) / (ep * ep * eq * tt * std::sqrt(tt));
    return g1 - g2;
}

template <class D1, class D2>
KernelEvalT<typename D1::Scalar> kernel_eval(const Eigen::MatrixBase<D1>& pin, const Eigen::MatrixBase<D2>& qin) {
    using S = typename D1::Scalar;
    const Vec3T<S> p = pin, q = qin;
    if (p == q) throw SingularityError("kernel_eval: p == q");
    const S ep = energy(p), eq = energy(q);
    const S tm2 = tau_minus_2<S>(p, q, ep, eq);
    if (tm2 < S(1e-300)) throw SingularityError("kernel_eval: tau - 2 underflow");
    KernelEvalT<S> k;
    k.tau = tm2 + S(2);
    const S tt = k.tau * tm2;
    const S tm1 = k.tau - S(1);
    k.lambda = tm1 * tm1 / (ep * eq) / (tt * std::sqrt(tt));
    k.S_ = s_matrix(p, q, tm2);
    k.Phi = k.lambda * k.S_;
    k.G = tm1 / (ep * eq * std::sqrt(tt));
    k.Psi = (tm1 / tt) * k.S_;
    k.gradG = grad_G(p, q, ep, eq, tm2);
    k.H = k.lambda * tm2 * (p + q);
    return k;
}

// Delta-mass coefficient of c^f: the flux of 2 Lambda [(tau-1)p - q] around q = p.
// The theta-integral int_0^pi (1+|p|^2 sin^2)^{-3/2} sin dtheta equals 2/<p>^2.
inline constexpr double kKappaPrefactor = 4.0 * 3.14159265358979323846;

double kappa(const Vec3& p);
double kappa_theta_integral(double p_norm, double rel_tol = 1e-10);

struct BoundStat {
    std::string name;
    double max_ratio = 0.0;
    std::int64_t evaluated = 0;
    std::int64_t violations = 0;  // only meaningful for the exact sandwich
};

struct KernelBoundReport {
    BoundStat gs_lower, gs_upper;
    BoundStat phi_near, phi_far;  // tau-2 < 1/8 and >= 1/8
    BoundStat g_upper, grad_g;
    double min_tau = 0.0;
};

KernelBoundReport kernel_bound_report(std::int64_t samples, double momentum_cap, std::uint64_t seed);

struct NullDirectionReport {
    double max_rel_residual = 0.0;
    std::int64_t evaluated = 0;
};

NullDirectionReport null_direction_check(std::int64_t samples, double momentum_cap, std::uint64_t seed);

}  // namespace relkin
