#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relkin/kernel.hpp"
#include "relkin/lorentz.hpp"
#include "relkin/strain_guo.hpp"

using namespace relkin;

namespace {

const MultiIndex e1{{1, 0, 0}}, e2{{0, 1, 0}}, e3{{0, 0, 1}}, none{{0, 0, 0}};

PairTestFunction gaussian_mu(bool depends_on_p) {
    PairTestFunction mu;
    const Vec3 c(0.5, -0.3, 0.8);
    mu.center = c;
    mu.reach = 9;
    mu.value = [c, depends_on_p](const Vec3& p, const Vec3& q) {
        const double s = depends_on_p ? 1 + 0.2 * std::sin(p[0] + 0.5 * p[2]) : 1.0;
        return std::exp(-0.5 * (q - c).squaredNorm()) * s;
    };
    return mu;
}

const PairFunction smooth_kernel = [](const Vec3& p, const Vec3& q) {
    return std::exp(-0.5 * (p - q).squaredNorm()) * (1 + 0.3 * p[0] * q[1]);
};

}  // namespace

TEST_CASE("theta of the empty index is the identity") {
    const PairFunction F = [](const Vec3& p, const Vec3& q) { return p.dot(q) + std::sin(p[2]); };
    const Vec3 p(0.1, 2, -1), q(3, 0, 1);
    CHECK(theta_apply(none, F, p, q, 1e-3) == F(p, q));
    CHECK_THROWS_AS(theta_apply(MultiIndex{{2, 1, 1}}, F, p, q, 1e-3), DomainError);
}

TEST_CASE("theta annihilates tau") {
    const PairFunction t = [](const Vec3& p, const Vec3& q) { return tau(p, q); };
    const Vec3 p(1, 0, 0), q(0, 2, 0);
    const double h = 1e-4;
    const double scale = tau(p, q);
    for (const MultiIndex& b : {e1, e2, e3, MultiIndex{{2, 0, 0}}, MultiIndex{{1, 1, 0}}, MultiIndex{{0, 1, 1}}})
        CHECK(std::abs(theta_apply(b, t, p, q, h, 2)) <= 10 * h * h * scale);
}

TEST_CASE("theta of the energy") {
    const PairFunction P = [](const Vec3& p, const Vec3&) { return energy(p); };
    const Vec3 p(2, 0, 1);
    CHECK(theta_apply(e1, P, p, Vec3(0.3, 1, 0), 1e-3) == doctest::Approx(2 / std::sqrt(6.0)).epsilon(1e-6));
}

TEST_CASE("first order table is the base case") {
    for (int i = 0; i < 3; ++i) {
        const MultiIndex ei = MultiIndex::unit(i);
        const PhiCoefficientTable t = phi_table(ei);
        CHECK(t.entries.size() == 4);
        const Vec3 p(0.3, -1.2, 2.0), q(1.5, 0.2, -0.7);
        const double P = energy(p), Q = energy(q);
        CHECK(t({none, none, none}, p, q) == doctest::Approx(q[i] / (Q * P)).epsilon(1e-15));
        CHECK(t({ei, none, none}, p, q) == 1.0);
        CHECK(t({none, none, ei}, p, q) == 1.0);
        CHECK(t({none, ei, none}, p, q) == doctest::Approx(Q / P).epsilon(1e-15));
    }
}

TEST_CASE("second order table against hand derivation") {
    const PhiCoefficientTable t = phi_table(MultiIndex{{2, 0, 0}});
    const MultiIndex two{{2, 0, 0}};
    const Vec3 p(1, 2, 3), q(-1, 0.5, 2);
    const double P = energy(p), Q = energy(q);
    CHECK(t.entries.size() == 10);
    CHECK(t({none, none, none}, p, q) == doctest::Approx(1 / (P * P) - q[0] * p[0] / (Q * P * P * P)).epsilon(1e-14));
    CHECK(t({none, none, e1}, p, q) == doctest::Approx(2 * q[0] / (Q * P)).epsilon(1e-14));
    CHECK(t({e1, none, none}, p, q) == doctest::Approx(2 * q[0] / (Q * P)).epsilon(1e-14));
    CHECK(t({none, e1, none}, p, q) == doctest::Approx(3 * q[0] / (P * P) - Q * p[0] / (P * P * P)).epsilon(1e-14));
    CHECK(t({e1, none, e1}, p, q) == 2.0);
    CHECK(t({e1, e1, none}, p, q) == doctest::Approx(2 * Q / P).epsilon(1e-14));
    CHECK(t({none, e1, e1}, p, q) == doctest::Approx(2 * Q / P).epsilon(1e-14));
    CHECK(t({none, two, none}, p, q) == doctest::Approx(Q * Q / (P * P)).epsilon(1e-14));
    CHECK(t({two, none, none}, p, q) == 1.0);
    CHECK(t({none, none, two}, p, q) == 1.0);
}

TEST_CASE("recursion from the base case") {
    PhiCoefficientTable base;
    base.beta = e1;
    base.entries[{none, none, none}] = phi_table(e1).entries.at({none, none, none});
    base.entries[{e1, none, none}] = PhiExpr::constant(1);
    base.entries[{none, none, e1}] = PhiExpr::constant(1);
    base.entries[{none, e1, none}] = phi_table(e1).entries.at({none, e1, none});
    const PhiCoefficientTable twice = phi_step(base, 0);
    const PhiCoefficientTable direct = phi_table(MultiIndex{{2, 0, 0}});
    REQUIRE(twice.entries.size() == direct.entries.size());
    const Vec3 p(0.7, -2, 5), q(3, 1, -0.5);
    for (const auto& [k, e] : direct.entries) CHECK(std::abs(e(p, q) - twice(k, p, q)) <= 1e-12 * (1 + std::abs(e(p, q))));
    CHECK_THROWS_AS(phi_step(phi_table(e2), 0), DomainError);
}

TEST_CASE("second order tables obey the decay bounds") {
    for (const MultiIndex& b : {MultiIndex{{2, 0, 0}}, MultiIndex{{1, 1, 0}}, MultiIndex{{0, 1, 1}}, MultiIndex{{0, 0, 2}}}) {
        const PhiCoefficientTable t = phi_table(b);
        const PhiBoundReport a = phi_bound_report(t, 10000, 50, 1, 1);
        const PhiBoundReport c = phi_bound_report(t, 20000, 50, 1, 2);
        CAPTURE(b.str());
        CHECK(std::isfinite(a.worst_ratio));
        CHECK(c.worst_ratio < 1.5 * a.worst_ratio);
        CHECK(a.worst_ratio < 1.5 * c.worst_ratio);
    }
}

TEST_CASE("q-only table keeps the (b1, b2) entries") {
    const PhiCoefficientTable t = phi_table(MultiIndex{{1, 1, 0}}).q_only();
    for (const auto& [k, e] : t.entries) CHECK(k.b3.order() == 0);
    const Vec3 p(0.3, 0.4, -0.2);
    const PairTestFunction mu = gaussian_mu(false);
    // with mu independent of p the dropped entries multiply zero
    const IbpReport full = ibp_verify(MultiIndex{{1, 1, 0}}, smooth_kernel, mu, p);
    CHECK(full.residual <= 1e-5);
}

TEST_CASE("integration by parts with a smooth kernel") {
    const Vec3 p(0.3, 0.4, -0.2);
    const PairTestFunction mu = gaussian_mu(true);
    for (const MultiIndex& b : {e1, e2, e3}) {
        const IbpReport r = ibp_verify(b, smooth_kernel, mu, p);
        CAPTURE(b.str());
        CHECK(r.residual <= 1e-5);
    }
    PairTestFunction zero = mu;
    zero.value = [](const Vec3&, const Vec3&) { return 0.0; };
    const IbpReport z = ibp_verify(e1, smooth_kernel, zero, p);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
}

TEST_CASE("integration by parts with the excised Phi") {
    const PairFunction phi11 = excised([](const Vec3& a, const Vec3& b) { return kernel_eval(a, b).Phi(0, 0); }, 0.2);
    IbpConfig cfg;
    cfg.extra_breaks = {0.2, 0.25, 0.3, 0.35, 0.4};
    const IbpReport r = ibp_verify(MultiIndex{{2, 0, 0}}, phi11, gaussian_mu(true), Vec3(0.3, 0.4, -0.2), cfg);
    CHECK(r.residual <= 1e-4);
}

TEST_CASE("integration by parts converges at second order") {
    IbpConfig coarse, fine;
    coarse.fd_order = fine.fd_order = 2;
    coarse.fd_step = 1e-2;
    fine.fd_step = 5e-3;
    const Vec3 p(0.3, 0.4, -0.2);
    const double a = ibp_verify(e1 + e2, smooth_kernel, gaussian_mu(true), p, coarse).residual;
    const double b = ibp_verify(e1 + e2, smooth_kernel, gaussian_mu(true), p, fine).residual;
    CHECK(std::log2(a / b) >= 1.8);
}

TEST_CASE("theta on kernels") {
    for (const MultiIndex& b : {e1, MultiIndex{{0, 1, 1}}}) {
        const ThetaKernelReport a = theta_kernel_bound_report(b, 10000, 50, 1);
        const ThetaKernelReport c = theta_kernel_bound_report(b, 20000, 50, 2);
        CAPTURE(b.str());
        for (auto [x, y] : {std::pair{a.phi, c.phi}, {a.G, c.G}, {a.H, c.H}}) {
            CHECK(std::isfinite(x));
            CHECK(x > 0);
            CHECK(std::abs(x - y) <= 0.25 * std::max(x, y));
        }
    }
}
