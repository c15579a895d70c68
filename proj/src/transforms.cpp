#include "relkin/transforms.hpp"

#include <cmath>

#include "relkin/rng.hpp"

namespace relkin {

const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::original: return "original";
    case Provenance::classicalized: return "classicalized";
    case Provenance::boosted: return "boosted";
    case Provenance::p_scaled: return "p_scaled";
    }
    return "?";
}

namespace {

Vec3 checked_psi(const Vec3& v) {
    if (!(v.squaredNorm() < 1.0)) throw DomainError("classicalize: |v| >= 1");
    return vel_to_mom(v);
}

}  // namespace

Jet pullback_velocity(const Jet& a, const Vec3& v) {
    // p = v / sqrt(1 - |v|^2): dp/dv = g (I + g^2 v v^T), g = <p>
    const double w = 1.0 - v.squaredNorm();
    const double g = 1.0 / std::sqrt(w);
    const Mat3 J = g * (Mat3::Identity() + (g * g) * v * v.transpose());
    Jet out;
    out.u = a.u;
    out.ut = a.ut;
    out.ux = a.ux;
    out.up = J.transpose() * a.up;
    // second derivatives of p_k in v
    const double g3 = g * g * g, g5 = g3 * g * g;
    Mat3 sec = Mat3::Zero();
    const double vk = v.dot(a.up);
    // d^2 p_k / dv_i dv_j = g^3 (v_i d_kj + v_j d_ki + v_k d_ij) + 3 g^5 v_i v_j v_k
    sec = g3 * (v * a.up.transpose() + a.up * v.transpose() + vk * Mat3::Identity()) + 3 * g5 * vk * v * v.transpose();
    out.upp = J.transpose() * a.upp * J + sec;
    return out;
}

Jet pullback_boost(const Jet& a, const PhasePoint& z0, const PhasePoint& z) {
    const Vec3& p0 = z0.p;
    const double e0 = energy(p0);
    const double e = energy(z.p);
    const Mat3 M = Mat3::Identity() + (e0 - 1.0) * (p0.squaredNorm() > 0 ? Mat3(p0 * p0.transpose() / p0.squaredNorm())
                                                                        : Mat3(Mat3::Zero()));
    Jet out;
    out.u = a.u;
    out.ut = e0 * a.ut + p0.dot(a.ux);
    out.ux = p0 * a.ut + M * a.ux;
    const Mat3 J = M + p0 * z.p.transpose() / e;  // d pbar / d p
    out.up = J.transpose() * a.up;
    const Mat3 hess_e = (Mat3::Identity() - z.p * z.p.transpose() / (e * e)) / e;
    out.upp = J.transpose() * a.upp * J + p0.dot(a.up) * hess_e;
    return out;
}

Jet pullback_linear(const Jet& a, const Mat3& P) {
    Jet out;
    out.u = a.u;
    out.ut = a.ut;
    out.ux = P.transpose() * a.ux;
    out.up = P.transpose() * a.up;
    out.upp = P.transpose() * a.upp * P;
    return out;
}

TransformedCoefficients classicalize(const LinearCoefficients& c) {
    if (c.transport != TransportKind::relativistic) throw DomainError("classicalize: expects relativistic coefficients");
    TransformedCoefficients t;
    t.form = c.form;
    t.transport = TransportKind::classical;
    t.provenance = c.provenance;
    t.provenance.push_back(Provenance::classicalized);
    auto at_p = [](const PhasePoint& z) { return PhasePoint{z.t, z.x, checked_psi(z.p)}; };
    t.A = [A = c.A, at_p](const PhasePoint& z) {
        const Vec3& v = z.p;
        const Mat3 Q = Mat3::Identity() - v * v.transpose();
        return Mat3((1 - v.squaredNorm()) * Q * A(at_p(z)) * Q);
    };
    if (c.form == EquationForm::nondivergence) {
        t.B = [A = c.A, B = c.B, at_p](const PhasePoint& z) {
            const Vec3& v = z.p;
            const double w = 1 - v.squaredNorm();
            const PhasePoint zp = at_p(z);
            const Mat3 a = A(zp);
            const Vec3 av = a * v;
            return Vec3(std::sqrt(w) * (B(zp) - v * v.dot(B(zp))) + w * ((3 * v.dot(av) - a.trace()) * v - 2 * av));
        };
    } else {
        // coefficient 5 from the Jacobian (1-|v|^2)^{-5/2}; see notes
        t.B = [A = c.A, B = c.B, at_p](const PhasePoint& z) {
            const Vec3& v = z.p;
            const double w = 1 - v.squaredNorm();
            const PhasePoint zp = at_p(z);
            const Vec3 av = A(zp) * v;
            const Vec3 b = B(zp);
            return Vec3(std::sqrt(w) * (b - v * v.dot(b)) + 5 * w * (av - v * v.dot(av)));
        };
    }
    t.s = [s = c.s, at_p](const PhasePoint& z) { return s(at_p(z)); };
    return t;
}

Mat3 boost_jacobian_inverse(const Vec3& pbar, const Vec3& p0) {
    const double e0 = energy(p0);
    Mat3 S = Mat3::Identity();
    if (p0.squaredNorm() > 0) S += (e0 - 1.0) * p0 * p0.transpose() / p0.squaredNorm();
    S -= p0 * pbar.transpose() / energy(pbar);
    return S;
}

TransformedCoefficients boost_conjugate(const LinearCoefficients& c, const PhasePoint& z0) {
    if (c.transport != TransportKind::relativistic) throw DomainError("boost_conjugate: expects relativistic coefficients");
    TransformedCoefficients t;
    t.form = c.form;
    t.transport = TransportKind::relativistic;
    t.provenance = c.provenance;
    t.provenance.push_back(Provenance::boosted);
    const Vec3 p0 = z0.p;
    // mu / <p> with mu = <p><p0> + p.p0 = <pbar>
    auto ratio = [p0](const Vec3& p) { return energy(p0) + p.dot(p0) / energy(p); };
    t.A = [A = c.A, z0, p0, ratio](const PhasePoint& z) {
        const PhasePoint zb = boost_forward(z0, z);
        const Mat3 S = boost_jacobian_inverse(zb.p, p0);
        return Mat3(ratio(z.p) * S * A(zb) * S.transpose());
    };
    if (c.form == EquationForm::nondivergence) {
        t.B = [A = c.A, B = c.B, z0, p0, ratio](const PhasePoint& z) {
            const PhasePoint zb = boost_forward(z0, z);
            const Mat3 S = boost_jacobian_inverse(zb.p, p0);
            const Mat3 a = A(zb);
            const double mu = energy(zb.p);
            const double e = energy(z.p);
            return Vec3((zb.p.dot(a * zb.p) / (mu * mu) - a.trace()) / e * p0 + ratio(z.p) * S * B(zb));
        };
    } else {
        t.B = [B = c.B, z0, p0, ratio](const PhasePoint& z) {
            const PhasePoint zb = boost_forward(z0, z);
            return Vec3(ratio(z.p) * boost_jacobian_inverse(zb.p, p0) * B(zb));
        };
    }
    t.s = [s = c.s, z0, ratio](const PhasePoint& z) { return ratio(z.p) * s(boost_forward(z0, z)); };
    return t;
}

TransformedCoefficients p_conjugate(const LinearCoefficients& c, const Mat3& P) {
    if (c.transport != TransportKind::classical) throw DomainError("p_conjugate: expects classical coefficients");
    TransformedCoefficients t = c;
    t.provenance.push_back(Provenance::p_scaled);
    const Mat3 Pi = P.inverse();
    auto moved = [P](const PhasePoint& z) { return PhasePoint{z.t, P * z.x, P * z.p}; };
    t.A = [A = c.A, Pi, moved](const PhasePoint& z) { return Mat3(Pi * A(moved(z)) * Pi); };
    t.B = [B = c.B, Pi, moved](const PhasePoint& z) { return Vec3(Pi * B(moved(z))); };
    t.s = [s = c.s, moved](const PhasePoint& z) { return s(moved(z)); };
    return t;
}

Mat3 p_scaling(const Vec3& p0) {
    const double n2 = p0.squaredNorm();
    if (n2 == 0) return Mat3::Identity();
    const double e0 = energy(p0);
    const Mat3 par = p0 * p0.transpose() / n2;
    return std::sqrt(e0) * (Mat3::Identity() - par) + par / std::sqrt(e0);
}

double schauder_radius(double R, const Vec3& p0) {
    return std::pow(energy(p0), -1.5) * R * R / std::sqrt(1 + R * R);
}

double calpha_radius(double R, const Vec3& p0) { return R / (2 * std::pow(energy(p0), 4) * std::sqrt(1 + R * R)); }

double residual(const Jet& u, const LinearCoefficients& c, const PhasePoint& z, double h) {
    const Vec3 w = c.transport == TransportKind::relativistic ? Vec3(z.p / energy(z.p)) : z.p;
    const Mat3 A = c.A(z);
    double diffusion = (A * u.upp).trace();
    if (c.form == EquationForm::divergence) {
        // (div A)_j = sum_i d_i A_ij
        static constexpr double w4[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
        static constexpr int off[4] = {-2, -1, 1, 2};
        Vec3 divA = Vec3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 4; ++k) {
                PhasePoint y = z;
                y.p[i] += off[k] * h;
                divA += (w4[k] / h) * c.A(y).row(i).transpose();
            }
        diffusion += divA.dot(u.up);
    }
    return u.ut + w.dot(u.ux) - diffusion - c.B(z).dot(u.up) - c.s(z);
}

EllipticityWindow ellipticity_window(double lambda, double Lambda, double p0_max, std::size_t samples,
                                     std::uint64_t seed, double r) {
    Rng rng(seed, 0x656c6c);
    EllipticityWindow win;
    win.samples = samples;
    for (std::size_t n = 0; n < samples; ++n) {
        // constant SPD A with spectrum in [lambda, Lambda]
        const Mat3 Q = Eigen::HouseholderQR<Mat3>(Mat3::NullaryExpr([&](Eigen::Index, Eigen::Index) { return rng.normal(); }))
                           .householderQ();
        const Vec3 ev(rng.uniform(lambda, Lambda), rng.uniform(lambda, Lambda), rng.uniform(lambda, Lambda));
        const Mat3 A = Q * ev.asDiagonal() * Q.transpose();
        LinearCoefficients c;
        c.A = [A](const PhasePoint&) { return A; };
        c.B = [](const PhasePoint&) { return Vec3::Zero().eval(); };
        c.s = [](const PhasePoint&) { return 0.0; };
        const double p0n = n % 8 == 0 ? 0.0 : std::exp(rng.uniform(std::log(0.1), std::log(p0_max)));
        const PhasePoint z0{rng.uniform(-1, 1), rng.in_ball(1.0), p0n * rng.unit_vector()};
        const double e0 = energy(z0.p);
        const auto boosted = boost_conjugate(c, z0);

        const Vec3 dir = z0.p.squaredNorm() > 0 ? Vec3(z0.p.normalized()) : Vec3::UnitZ();
        auto in_cylinder = [&rng](double rho) {
            return PhasePoint{-rng.uniform() * rho * rho, rng.in_ball(rho * rho * rho), rng.in_ball(rho)};
        };
        Vec3 perp = rng.unit_vector();
        perp -= dir * dir.dot(perp);
        perp.normalize();
        const Mat3 A1 = boosted.A(in_cylinder(1.0));
        const double qp = perp.dot(A1 * perp) / e0;
        win.perp_min = std::min(win.perp_min, qp);
        win.perp_max = std::max(win.perp_max, qp);
        win.par_max_q1 = std::max(win.par_max_q1, dir.dot(A1 * dir) * e0);
        const Mat3 As = boosted.A(in_cylinder(1.0 / e0));
        const double qa = dir.dot(As * dir) * e0;
        win.par_min = std::min(win.par_min, qa);
        win.par_max = std::max(win.par_max, qa);

        // P-conjugated classical matrix for |v| <= r / <p0>
        const auto ap = p_conjugate(classicalize(boosted), p_scaling(z0.p));
        const PhasePoint y{rng.uniform(-1, 0) * r * r / (e0 * e0), rng.in_ball(r * r * r / (e0 * e0 * e0)),
                           rng.in_ball(r / e0)};
        const Vec3 l = Eigen::SelfAdjointEigenSolver<Mat3>(ap.A(y)).eigenvalues();
        win.ap_min = std::min(win.ap_min, l[0]);
        win.ap_max = std::max(win.ap_max, l[2]);
    }
    return win;
}

}  // namespace relkin
