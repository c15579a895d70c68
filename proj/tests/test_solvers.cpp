#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relkin/kernel.hpp"
#include "relkin/solvers.hpp"

using namespace relkin;

namespace {

double juttner_density(const Vec3& p) { return std::exp(-energy(p)); }

// two anisotropic bumps at +-1.5 e_x with exponential tails, so log f has bounded slope
double double_bump(const Vec3& p) {
    auto one = [](const Vec3& v) {
        const double q = v[0] * v[0] / 0.5 + v[1] * v[1] + v[2] * v[2];
        return std::exp(-std::sqrt(1 + 2 * q));
    };
    return one(p - Vec3(1.5, 0, 0)) + 0.6 * one(p + Vec3(1.5, 0, 0));
}

// Brute-force Q: Phi from kernel_eval, D as an explicit 2nd-order stencil matrix, Q = -D^T F.
Eigen::VectorXd reference_q(const DistributionState& s) {
    const auto& g = s.grid;
    const int n = g.n;
    const std::size_t N = g.size();
    Eigen::Matrix3Xd lg = Eigen::Matrix3Xd::Zero(3, N);
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < N; ++i)
        if (g.interior(i, 1)) in.push_back(i);
    auto at = [&](int i, int j, int k) { return std::log(s.values[g.index(i, j, k)]); };
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j)
            for (int k = 1; k < n - 1; ++k)
                lg.col(g.index(i, j, k)) = Vec3(at(i + 1, j, k) - at(i - 1, j, k), at(i, j + 1, k) - at(i, j - 1, k),
                                                at(i, j, k + 1) - at(i, j, k - 1)) /
                                           (2 * g.h());
    Eigen::Matrix3Xd F = Eigen::Matrix3Xd::Zero(3, N);
    for (std::size_t a : in)
        for (std::size_t b : in) {
            if (a == b) continue;
            const KernelEval k = kernel_eval(g.node(a), g.node(b));
            F.col(a) += s.values[a] * s.values[b] * g.cell_volume() * (k.Phi * (lg.col(a) - lg.col(b)));
        }
    Eigen::VectorXd Q = Eigen::VectorXd::Zero(N);
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j)
            for (int k = 1; k < n - 1; ++k) {
                const Vec3 f = F.col(g.index(i, j, k)) / (2 * g.h());
                Q[g.index(i - 1, j, k)] += f[0];
                Q[g.index(i + 1, j, k)] -= f[0];
                Q[g.index(i, j - 1, k)] += f[1];
                Q[g.index(i, j + 1, k)] -= f[1];
                Q[g.index(i, j, k - 1)] += f[2];
                Q[g.index(i, j, k + 1)] -= f[2];
            }
    return Q;
}

}  // namespace

TEST_CASE("momentum grid layout and validation") {
    CHECK_THROWS_AS(MomentumGrid3D(8.0, 12), ConfigError);
    CHECK_THROWS_AS(MomentumGrid3D(-1.0, 16), ConfigError);
    const MomentumGrid3D g(4.0, 16);
    CHECK(g.h() == doctest::Approx(0.5));
    CHECK(g.node(0).isApprox(Vec3(-3.75, -3.75, -3.75)));
    CHECK(g.node(g.index(15, 0, 8)).isApprox(Vec3(3.75, -3.75, 0.25)));
    CHECK(g.node(g.index(3, 7, 11)) == g.node(3, 7, 11));
    CHECK_FALSE(g.interior(g.index(0, 5, 5)));
    CHECK(g.interior(g.index(1, 5, 5)));
    CHECK_FALSE(g.interior(g.index(1, 5, 5), 2));
    CHECK(g.interior(g.index(2, 13, 13), 2));
}

TEST_CASE("state validation and moments") {
    const MomentumGrid3D g(4.0, 16);
    CHECK_THROWS_AS(DistributionState::sample(g, [](const Vec3&) { return -1.0; }), DomainError);
    auto s = DistributionState::sample(g, [](const Vec3& p) { return std::exp(-p.squaredNorm()); });
    s.normalize();
    const GridMoments m = s.moments();
    CHECK(m.mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.momentum.norm() < 1e-14);
    // sum of f <p> and f log f, written out
    double e = 0, H = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        e += s.values[i] * std::sqrt(1 + g.node(i).squaredNorm());
        H += s.values[i] * std::log(s.values[i]);
    }
    CHECK(m.energy == doctest::Approx(e * g.cell_volume()).epsilon(1e-13));
    CHECK(m.entropy == doctest::Approx(H * g.cell_volume()).epsilon(1e-13));
}

TEST_CASE("grid interpolation reproduces trilinear data") {
    const MomentumGrid3D g(4.0, 16);
    auto lin = [](const Vec3& p) { return 3.0 + 0.2 * p[0] - 0.1 * p[1] + 0.05 * p[2] + 0.01 * p[0] * p[1] * p[2]; };
    const auto s = DistributionState::sample(g, lin);
    const DistributionSpec f = grid_distribution(s);
    for (const Vec3& p : {Vec3(0.1, -0.3, 2.2), Vec3(-3.7, 3.7, 0.0), Vec3(1.234, 0.5, -2.9)})
        CHECK(f(p) == doctest::Approx(lin(p)).epsilon(1e-13));
    CHECK(f(Vec3(3.9, 0, 0)) == 0.0);
}

TEST_CASE("pair-sum assembly matches a brute-force reference") {
    const MomentumGrid3D g(5.0, 16);
    const auto s = DistributionState::sample(g, double_bump);
    CollisionOptions opt;
    opt.stencil_order = 2;
    const Eigen::VectorXd Q = collision_operator(s, opt);
    const Eigen::VectorXd R = reference_q(s);
    CHECK((Q - R).cwiseAbs().maxCoeff() <= 1e-12 * R.cwiseAbs().maxCoeff());
}

TEST_CASE("discrete conservation and entropy production") {
    const MomentumGrid3D g(5.0, 16);
    const auto s = DistributionState::sample(g, double_bump);
    for (int order : {2, 4}) {
        CollisionOptions opt;
        opt.stencil_order = order;
        const Eigen::VectorXd Q = collision_operator(s, opt);
        const double scale = Q.cwiseAbs().sum();
        double mass = 0, dH = 0;
        Vec3 mom = Vec3::Zero();
        for (std::size_t i = 0; i < g.size(); ++i) {
            mass += Q[i];
            mom += Q[i] * g.node(i);
            dH += Q[i] * std::log(s.values[i]);
        }
        CHECK(std::abs(mass) <= 1e-13 * scale);
        CHECK(mom.norm() <= 1e-13 * scale * g.extent);
        CHECK(dH < 0);
    }
}

TEST_CASE("Juttner grid residual shrinks under refinement") {
    // fourth-order stencil; P = 4 keeps h small enough to be in the asymptotic range
    double prev = 0;
    for (int n : {16, 32}) {
        auto s = DistributionState::sample(MomentumGrid3D(4.0, n), juttner_density);
        s.normalize();
        const double r = collision_operator(s).cwiseAbs().maxCoeff() / s.values.maxCoeff();
        MESSAGE("n = " << n << "  |Q|/|f| = " << r);
        if (prev > 0) CHECK(prev / r >= 2.0);
        prev = r;
    }
}

TEST_CASE("zero initial data gives the zero trajectory") {
    const auto s = DistributionState::sample(MomentumGrid3D(8.0, 16), [](const Vec3&) { return 0.0; });
    HomogeneousConfig cfg;
    cfg.snapshot_times = {0.1, 0.2};
    const auto r = solve_homogeneous(s, 0.3, cfg);
    REQUIRE(r.snapshots.size() == 4);
    for (const auto& snap : r.snapshots) CHECK(snap.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.snapshots.back().time == 0.3);
}

TEST_CASE("homogeneous Juttner run conserves mass and momentum") {
    auto s = DistributionState::sample(MomentumGrid3D(8.0, 16), juttner_density);
    s.normalize();
    HomogeneousConfig cfg;
    cfg.snapshot_times = {0.25};
    const auto r = solve_homogeneous(s, 0.5, cfg);
    CHECK(r.snapshots.size() == 3);
    CHECK(r.snapshots[1].time == 0.25);
    CHECK(r.relative_drift_mass() < 1e-12);
    CHECK(r.relative_drift_energy() < 1e-3);
    CHECK(r.steps.back().moments.momentum.norm() < 1e-12);
    CHECK(r.total_clipped == 0.0);
}

TEST_CASE("step control errors") {
    auto s = DistributionState::sample(MomentumGrid3D(8.0, 16), juttner_density);
    s.normalize();
    HomogeneousConfig cfg;
    cfg.dt = 5.0;
    CHECK_THROWS_AS(solve_homogeneous(s, 0.5, cfg), CflError);
    cfg.dt.reset();
    cfg.lag = 0;
    CHECK_THROWS_AS(solve_homogeneous(s, 0.5, cfg), ConfigError);

    // a Gaussian double bump is far too steep for h = 1; the clip budget catches it
    auto gauss = DistributionState::sample(MomentumGrid3D(8.0, 16), [](const Vec3& p) {
        return std::exp(-(p - Vec3(1.5, 0, 0)).squaredNorm() / 0.25) + std::exp(-(p + Vec3(1.5, 0, 0)).squaredNorm() / 0.25);
    });
    CHECK_THROWS_AS(solve_homogeneous(gauss, 0.5, HomogeneousConfig{}), NegativityError);
}

TEST_CASE("entropy is nonincreasing for an anisotropic double bump") {
    auto s = DistributionState::sample(MomentumGrid3D(5.0, 20), double_bump);
    s.normalize();
    HomogeneousConfig cfg;
    const auto r = solve_homogeneous(s, 0.3, cfg);
    const double H0 = std::abs(r.steps.front().moments.entropy);
    for (std::size_t i = 1; i < r.steps.size(); ++i)
        CHECK(r.steps[i].moments.entropy <= r.steps[i - 1].moments.entropy + 1e-6 * H0);
    CHECK(r.steps.back().moments.entropy < r.steps.front().moments.entropy);
    CHECK(r.relative_drift_mass() < 1e-12);
    CHECK(r.total_clipped == 0.0);
}

TEST_CASE("lagged coefficients report their error") {
    auto s = DistributionState::sample(MomentumGrid3D(5.0, 16), double_bump);
    s.normalize();
    HomogeneousConfig a, b;
    b.lag = 2;
    const auto ra = solve_homogeneous(s, 0.5, a);
    const auto rb = solve_homogeneous(s, 0.5, b);
    REQUIRE(rb.steps.size() > 3);
    CHECK(ra.lag_error == 0.0);
    CHECK(rb.lag_error > 0.0);
    CHECK(rb.lag_error < 0.5);
    const double diff = (ra.snapshots.back().values - rb.snapshots.back().values).cwiseAbs().maxCoeff();
    CHECK(diff < 0.05 * ra.snapshots.back().values.maxCoeff());
}

TEST_CASE("barrier derivatives against finite differences") {
    const Vec3 p(0.7, -1.3, 2.1);
    const double h = 1e-4;
    for (const BarrierSpec& g : {BarrierSpec::polynomial(6, 2.0, 0.3), BarrierSpec::exponential(0.8, 1.5, 0.2)}) {
        Vec3 gr;
        Mat3 H;
        for (int i = 0; i < 3; ++i) {
            const Vec3 e = Vec3::Unit(i) * h;
            gr[i] = (g(0.4, p + e) - g(0.4, p - e)) / (2 * h);
            H.col(i) = (g.grad(0.4, p + e) - g.grad(0.4, p - e)) / (2 * h);
        }
        CHECK((g.grad(0.4, p) - gr).norm() < 1e-7 * gr.norm());
        CHECK((g.hess(0.4, p) - H).norm() < 1e-7 * H.norm());
        const double dt = (g(0.4 + h, p) - g(0.4 - h, p)) / (2 * h);
        CHECK(g.dt(0.4, p) == doctest::Approx(dt).epsilon(1e-7));
    }
}

TEST_CASE("barrier derivative bounds stay within the closed-form suprema") {
    std::vector<Vec3> pts;
    for (double r = 0; r <= 50; r += 0.25) pts.push_back(Vec3(r, 0.3 * r, -0.2 * r));
    const double k = 6;
    const auto b = barrier_derivative_bounds(BarrierSpec::polynomial(k, 1, 0), pts);
    // |grad g| <p> / g = k |p| / <p> < k ; nuclear norm of D^2 g <p>^2 / g <= k (k + 4)
    CHECK(b.grad < k);
    CHECK(b.grad > 0.99 * k);
    CHECK(b.hess <= k * (k + 4));
    const auto e = barrier_derivative_bounds(BarrierSpec::exponential(0.5, 1, 0), pts);
    CHECK(e.grad < 0.5);
    CHECK(e.hess <= 0.25 + 3 * 0.5);
}

TEST_CASE("barrier check on trivial and failing inputs") {
    const MomentumGrid3D g(8.0, 16);
    const auto zero = DistributionState::sample(g, [](const Vec3&) { return 0.0; });
    BarrierConfig cfg;
    cfg.residual_samples = 8;
    const auto rep = barrier_check({zero, zero}, BarrierSpec::polynomial(6, 1.0, 0.0), std::nullopt, cfg);
    CHECK(rep.dominated);
    CHECK(rep.worst_ratio == 0.0);
    CHECK(rep.supersolution);

    auto j = DistributionState::sample(g, juttner_density);
    const double M = barrier_constant(j, BarrierKind::polynomial, 6);
    CHECK_THROWS_AS(barrier_check({j}, BarrierSpec::polynomial(6, 0.5 * M, 1.0), std::nullopt, cfg), PreconditionError);
    // domination is monotone in k with the same constant
    const auto r6 = barrier_check({j}, BarrierSpec::polynomial(6, M, 0.0), juttner(), cfg);
    const auto r4 = barrier_check({j}, BarrierSpec::polynomial(4, M, 0.0), juttner(), cfg);
    CHECK(r6.dominated);
    CHECK(r4.dominated);
    CHECK(r4.worst_ratio <= r6.worst_ratio);
}

TEST_CASE("polynomial and exponential barriers along a short Juttner run") {
    auto s = DistributionState::sample(MomentumGrid3D(8.0, 16), juttner_density);
    s.normalize();
    HomogeneousConfig hc;
    hc.snapshot_times = {0.25};
    const auto run = solve_homogeneous(s, 0.5, hc);
    const DistributionSpec f = grid_distribution(s);
    std::vector<Vec3> nodes;
    for (std::size_t i = 0; i < s.grid.size(); i += 37) nodes.push_back(s.grid.node(i));
    BarrierConfig cfg;
    cfg.residual_samples = 16;

    const double M = barrier_constant(s, BarrierKind::polynomial, 6);
    const auto K = barrier_derivative_bounds(BarrierSpec::polynomial(6, M, 0), nodes);
    const auto C = coefficient_bounds(f, BarrierKind::polynomial, nodes, cfg.quadrature);
    const double beta = assembled_rate(C, K);
    CHECK(beta > 0);
    const auto rp = barrier_check(run.snapshots, BarrierSpec::polynomial(6, M, beta), std::nullopt, cfg);
    CHECK(rp.dominated);
    CHECK(rp.supersolution);

    const double N = barrier_constant(s, BarrierKind::exponential, 1.0);
    const auto Ke = barrier_derivative_bounds(BarrierSpec::exponential(1.0, N, 0), nodes);
    const auto Ce = coefficient_bounds(f, BarrierKind::exponential, nodes, cfg.quadrature);
    const auto re = barrier_check(run.snapshots, BarrierSpec::exponential(1.0, N, assembled_rate(Ce, Ke)), std::nullopt, cfg);
    CHECK(re.dominated);
    CHECK(re.supersolution);
}

TEST_CASE("RFP: diffusion-only mass conservation per step") {
    RfpState s;
    s.grid = {2.0, 32, 6.0, 48};
    s.u.resize(32, 48);
    for (int j = 0; j < 48; ++j) s.u.col(j).setConstant(std::exp(-std::pow(s.grid.p(j) - 1.0, 2)));
    RfpConfig cfg;
    const auto r = solve_rfp_1d(s, 1.0, cfg);
    CHECK(r.max_step_mass_change <= 1e-12);
    CHECK((r.snapshots.back().u.array() >= 0).all());
    cfg.dt = 10.0;
    CHECK_THROWS_AS(solve_rfp_1d(s, 1.0, cfg), CflError);
}

TEST_CASE("RFP: L1 distance to the steady profile is nonincreasing") {
    RfpState s;
    s.grid = {2.0, 32, 8.0, 64};
    s.u.resize(32, 64);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 64; ++j)
            s.u(i, j) = (1 + 0.5 * std::sin(M_PI * s.grid.x(i))) * std::exp(-0.5 * std::pow(s.grid.p(j) + 2.0, 2));
    RfpConfig cfg;
    cfg.friction = 1.0;
    const auto r = solve_rfp_1d(s, 2.0, cfg);
    for (std::size_t k = 1; k < r.l1_to_steady.size(); ++k)
        CHECK(r.l1_to_steady[k] <= r.l1_to_steady[k - 1] * (1 + 1e-12));
    CHECK(r.l1_to_steady.back() < 0.5 * r.l1_to_steady.front());
    // the steady profile itself does not move
    RfpState eq = s;
    eq.u = rfp_steady(s, 1.0);
    const auto re = solve_rfp_1d(eq, 0.5, cfg);
    CHECK((re.snapshots.back().u - eq.u).cwiseAbs().maxCoeff() < 1e-13 * eq.u.maxCoeff());
}

TEST_CASE("RFP: transport-only fronts stay inside the light cone") {
    RfpState s;
    s.grid = {4.0, 400, 6.0, 24};
    s.u.resize(400, 24);
    for (int i = 0; i < 400; ++i) {
        const double x = s.grid.x(i);
        const double plateau = 0.25 * (1 + std::tanh((x + 0.5) / 0.02)) * (1 - std::tanh(x / 0.02));
        for (int j = 0; j < 24; ++j) s.u(i, j) = plateau;
    }
    RfpConfig cfg;
    cfg.diffusion = 0.0;
    const double T = 1.0;
    const auto r = solve_rfp_1d(s, T, cfg);
    double fastest = 0;
    for (int j = 0; j < 24; ++j) {
        const double v = s.grid.p(j) / std::sqrt(1 + s.grid.p(j) * s.grid.p(j));
        const double speed = (rfp_front(r.snapshots.back(), j, 0.5) - rfp_front(s, j, 0.5)) / T;
        if (v > 0) CHECK(speed == doctest::Approx(v).epsilon(0.02));
        fastest = std::max(fastest, std::abs(speed));
    }
    CHECK(fastest <= 1.0 + s.grid.hx() / T);
}
