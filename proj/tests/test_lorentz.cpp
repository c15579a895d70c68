#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relkin/lorentz.hpp"
#include "relkin/rng.hpp"

using namespace relkin;

namespace {

double diff(const PhasePoint& a, const PhasePoint& b) {
    return std::abs(a.t - b.t) + (a.x - b.x).norm() + (a.p - b.p).norm();
}
double size(const PhasePoint& a) { return std::abs(a.t) + a.x.norm() + a.p.norm(); }

PhasePoint random_point(Rng& rng, double cap) {
    return {rng.uniform(-2, 2), rng.in_ball(2.0), rng.in_ball(cap)};
}

}  // namespace

TEST_CASE("energy") {
    CHECK(energy(Vec3(0, 0, 0)) == 1.0);
    CHECK(energy(Vec3(1, 0, 0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(energy(Vec3(3, 4, 0)) == doctest::Approx(std::sqrt(26.0)).epsilon(1e-15));
    CHECK_THROWS_AS(energy(Vec3(NAN, 0, 0)), DomainError);
}

TEST_CASE("velocity maps") {
    CHECK(mom_to_vel(Vec3::Zero()).norm() == 0.0);
    const Vec3 p(0.3, -1.2, 5);
    CHECK((vel_to_mom(mom_to_vel(p)) - p).norm() < 1e-13);
    const Vec3 v = mom_to_vel(Vec3(0, 0, std::sqrt(3.0)));
    CHECK(v.z() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
    CHECK(mom_to_vel(Vec3(1e8, 0, 0)).norm() < 1.0);
    CHECK_THROWS_AS(vel_to_mom(Vec3(1, 0, 0)), DomainError);
    CHECK_THROWS_AS(vel_to_mom(Vec3(0.8, 0.7, 0)), DomainError);
}

TEST_CASE("forward boost examples") {
    const PhasePoint z0(0.7, Vec3(1, -2, 3), Vec3(0.4, 1.1, -2));
    CHECK(diff(boost_forward(z0, PhasePoint::origin()), z0) < 1e-14);

    const PhasePoint n0(0.5, Vec3(1, 2, 3), Vec3::Zero());
    const PhasePoint z(1.5, Vec3(-1, 0.5, 2), Vec3(0.3, 0.2, 0.1));
    const PhasePoint r = boost_forward(n0, z);
    CHECK(r.t == 2.0);
    CHECK((r.x - (n0.x + z.x)).norm() == 0.0);
    CHECK((r.p - z.p).norm() == 0.0);

    const PhasePoint e(0, Vec3::Zero(), Vec3(1, 0, 0));
    const PhasePoint s = boost_forward(e, PhasePoint(1, Vec3::Zero(), Vec3::Zero()));
    CHECK(s.t == doctest::Approx(std::sqrt(2.0)));
    CHECK((s.x - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((s.p - Vec3(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("inverse boost examples and roundtrip") {
    const PhasePoint z0(0.7, Vec3(1, -2, 3), Vec3(0.4, 1.1, -2));
    CHECK(size(boost_inverse(z0, z0)) < 1e-14);
    const PhasePoint n0(0.5, Vec3(1, 2, 3), Vec3::Zero());
    const PhasePoint z(1.5, Vec3(-1, 0.5, 2), Vec3(0.3, 0.2, 0.1));
    const PhasePoint r = boost_inverse(n0, z);
    CHECK(r.t == 1.0);
    CHECK((r.x - (z.x - n0.x)).norm() == 0.0);
    CHECK((r.p - z.p).norm() == 0.0);

    Rng rng(7);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        const PhasePoint a = random_point(rng, 10), b = random_point(rng, 10);
        worst = std::max(worst, diff(boost_forward(a, boost_inverse(a, b)), b) / (1 + size(b)));
        worst = std::max(worst, diff(boost_inverse(a, boost_forward(a, b)), b) / (1 + size(b)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("long double agrees with double on boosts") {
    const PhasePointT<long double> z0(0.25L, Vec3T<long double>(1, 2, -1), Vec3T<long double>(3, -4, 2));
    const PhasePointT<long double> z(-0.5L, Vec3T<long double>(0.1L, 0.2L, 0.3L), Vec3T<long double>(-1, 2, 0.5L));
    const auto rl = boost_forward(z0, z);
    const PhasePoint rd = boost_forward(PhasePoint(0.25, Vec3(1, 2, -1), Vec3(3, -4, 2)),
                                        PhasePoint(-0.5, Vec3(0.1, 0.2, 0.3), Vec3(-1, 2, 0.5)));
    CHECK(std::abs(double(rl.t) - rd.t) < 1e-13);
    CHECK((rl.p.cast<double>() - rd.p).norm() < 1e-13);
}

TEST_CASE("boost matrices") {
    CHECK((boost_matrix(Vec3::Zero()) - Mat4::Identity()).norm() == 0.0);
    const Vec3 p(2, -1, 0.5);
    CHECK((m_matrix(p) * p - energy(p) * p).norm() < 1e-14);
    CHECK((m_matrix(p) * m_matrix(p) - (Mat3::Identity() + p * p.transpose())).norm() < 1e-13);
    CHECK((m_matrix(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Vec3 q = rng.in_ball(20);
        CHECK(std::abs(boost_matrix(q).determinant() - 1.0) < 1e-10);
        CHECK((boost_matrix(q) * boost_matrix(-q) - Mat4::Identity()).norm() < 1e-10);
    }
}

TEST_CASE("boost product decomposition") {
    auto d0 = boost_product_decompose(Vec3::Zero(), Vec3(1, 2, 3));
    CHECK((d0.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(d0.residual_norm < 1e-12);

    auto dc = boost_product_decompose(Vec3(1, 1, 0), Vec3(-2, -2, 0));
    CHECK((dc.rotation - Mat3::Identity()).norm() < 1e-10);

    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        auto d = boost_product_decompose(rng.in_ball(5), rng.in_ball(5));
        CHECK(d.residual_norm < 1e-10);
        CHECK(d.orthogonality < 1e-10);
        CHECK(std::abs(d.det - 1.0) < 1e-10);
    }
}

TEST_CASE("distances") {
    const PhasePoint z(0.3, Vec3(1, 2, 3), Vec3(4, -1, 2));
    CHECK(dist_L(z, z) < 1e-14);
    const PhasePoint w(-0.25, Vec3(0, 0, 8), Vec3(3, 4, 0));
    CHECK(dist_L(w, PhasePoint::origin()) == doctest::Approx(0.5 + 2.0 + 5.0).epsilon(1e-14));

    Rng rng(5);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        const PhasePoint z0 = random_point(rng, 20), z1 = random_point(rng, 20), z2 = random_point(rng, 20);
        const double d = dist_L(z1, z2);
        const double e = dist_L(boost_inverse(z0, z1), boost_inverse(z0, z2));
        worst = std::max(worst, std::abs(d - e) / (1 + d));
    }
    CHECK(worst < 1e-9);

    const PhasePoint g0(0, Vec3::Zero(), Vec3(0.5, 0, 0));
    const PhasePoint g(1, Vec3(0.5, 0, 0), Vec3(0.5, 0, 0));
    CHECK(dist_G(g, g0) == doctest::Approx(1.0));
}

TEST_CASE("group identities and Newtonian limit") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const PhasePoint z0 = random_point(rng, 20), z = random_point(rng, 20);
        CHECK(diff(boost_forward(z0, boost_inverse(z0, z)), z) <= 1e-10 * (1 + size(z)));
        CHECK(diff(boost_forward(z, PhasePoint::origin()), z) <= 1e-12 * (1 + size(z)));
    }
    for (int i = 0; i < 1000; ++i) {
        PhasePoint z0 = random_point(rng, 1);
        z0.p = rng.in_ball(1e-6);
        PhasePoint z = random_point(rng, 1);
        z.p = rng.in_ball(1e-3);
        const PhasePoint l = boost_forward(z0, z);
        const PhasePoint g = gal_forward(to_velocity(z0), to_velocity(z));
        CHECK(diff(l, to_momentum(g)) <= 1e-5 * (1 + size(z)));
    }
}

TEST_CASE("non-associativity is observed") {
    const PhasePoint a(0.1, Vec3(0.2, 0, 0), Vec3(1, 0.5, 0));
    const PhasePoint b(0.3, Vec3(0, 0.1, 0), Vec3(0, 2, 0.3));
    const PhasePoint c(0.2, Vec3(0, 0, 0.4), Vec3(0.4, 0, 1));
    CHECK(diff(boost_forward(boost_forward(a, b), c), boost_forward(a, boost_forward(b, c))) > 1e-3);
}

TEST_CASE("cylinders") {
    const PhasePoint z0(1, Vec3(1, 2, 3), Vec3(2, 0, -1));
    for (auto kind : {CylinderKind::kinetic, CylinderKind::relativistic, CylinderKind::transformed}) {
        CylinderSpec c{z0, 0.5, kind};
        if (kind == CylinderKind::kinetic) c.center = to_velocity(z0);
        CHECK(cylinder_contains(c, c.center));
    }
    CylinderSpec fut{PhasePoint(0, Vec3::Zero(), Vec3::Zero()), 1.0, CylinderKind::relativistic};
    CHECK_FALSE(cylinder_contains(fut, PhasePoint(1e-9, Vec3::Zero(), Vec3::Zero())));
    CHECK_THROWS_AS(cylinder_contains(CylinderSpec{z0, 0.0, CylinderKind::kinetic}, z0), DomainError);

    Rng rng(13);
    int mismatches = 0, inside = 0;
    for (int i = 0; i < 10000; ++i) {
        const PhasePoint c = random_point(rng, 20);
        const double r = rng.uniform(0.1, 1.0);
        const PhasePoint z(rng.uniform(-1.2, 0.2), rng.in_ball(1.2), rng.in_ball(1.2));
        const bool a = cylinder_contains(CylinderSpec{PhasePoint::origin(), r, CylinderKind::relativistic}, z);
        const bool b = cylinder_contains(CylinderSpec{c, r, CylinderKind::relativistic}, boost_forward(c, z));
        inside += a;
        mismatches += (a != b);
    }
    CHECK(mismatches == 0);
    CHECK(inside > 100);
}

TEST_CASE("metric comparison report") {
    auto r = metric_comparison_report(20000, 20.0, 1);
    CHECK(std::isfinite(r.l_controls_g.max_ratio));
    CHECK(std::isfinite(r.g_controls_l.max_ratio));
    CHECK(std::isfinite(r.e_controls_l.max_ratio));
    CHECK(r.perp_parallel.max_ratio <= 1e-12);
    CHECK(r.l_controls_g.evaluated > 19000);
}
