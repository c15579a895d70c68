#include "relkin/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relkin/parallel.hpp"
#include "relkin/rng.hpp"

namespace relkin {

namespace {

constexpr double kPi = std::numbers::pi;

// 4th-order central first derivative weights at offsets -2,-1,1,2 (divide by h)
constexpr double kD1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
constexpr int kOff[4] = {-2, -1, 1, 2};

template <class F> auto fd_gradient(const F& fn, const Vec3& p, double h) {
    using R = decltype(fn(p));
    R out[3];
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        out[i] = kD1[0] * fn(p + kOff[0] * e);
        for (int k = 1; k < 4; ++k) out[i] += kD1[k] * fn(p + kOff[k] * e);
        out[i] /= h;
    }
    return std::array<R, 3>{out[0], out[1], out[2]};
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }
double max_abs(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

Vec3 DistributionSpec::grad(const Vec3& p) const {
    if (gradient) return gradient(p);
    const double h = 1e-3 * (1.0 + p.norm());
    const auto g = fd_gradient([this](const Vec3& q) { return density(q); }, p, h);
    return {g[0], g[1], g[2]};
}

DistributionSpec zero_distribution() {
    DistributionSpec f;
    f.density = [](const Vec3&) { return 0.0; };
    f.gradient = [](const Vec3&) { return Vec3::Zero().eval(); };
    f.decay_kind = DecayKind::exponential;
    f.decay_rate = 1.0;
    f.decay_constant = 0.0;
    f.is_zero = true;
    f.name = "zero";
    return f;
}

DistributionSpec juttner(double c1, double c2) {
    DistributionSpec f;
    f.density = [c1, c2](const Vec3& p) { return c1 * std::exp(-c2 * energy(p)); };
    f.gradient = [c1, c2](const Vec3& p) {
        const double e = energy(p);
        return Vec3(-c1 * c2 * std::exp(-c2 * e) / e * p);
    };
    f.decay_kind = DecayKind::exponential;
    f.decay_rate = c2;
    f.decay_constant = c1;
    f.name = "juttner";
    return f;
}

DistributionSpec gaussian_mixture(const std::vector<GaussianBump>& bumps) {
    DistributionSpec f;
    f.density = [bumps](const Vec3& p) {
        double s = 0;
        for (const auto& b : bumps) {
            const Vec3 d = p - b.center;
            s += b.weight * std::exp(-0.5 * d.dot(b.inv_cov * d));
        }
        return s;
    };
    f.gradient = [bumps](const Vec3& p) {
        Vec3 g = Vec3::Zero();
        for (const auto& b : bumps) {
            const Vec3 d = p - b.center;
            g -= b.weight * std::exp(-0.5 * d.dot(b.inv_cov * d)) * (b.inv_cov * d);
        }
        return g;
    };
    // exp(-|d|^2 l/2) <= e^{l s^2/2 ...}: bound with sigma = 1 by scanning radial profiles
    double wsum = 0, cmax = 0, lmin = 1e300;
    Vec3 csum = Vec3::Zero();
    for (const auto& b : bumps) {
        wsum += std::abs(b.weight);
        cmax = std::max(cmax, b.center.norm());
        lmin = std::min(lmin, Eigen::SelfAdjointEigenSolver<Mat3>(b.inv_cov).eigenvalues()(0));
        csum += std::abs(b.weight) * b.center;
    }
    // w e^{-l (r-c)^2 / 2} <= w e^{sigma <r>} bound: max over r of -l(r-c)_+^2/2 + sigma sqrt(1+r^2)
    const double sigma = 1.0;
    double worst = 0;
    for (double r = 0; r < cmax + 10 + 4 * sigma / lmin; r += 0.01) {
        const double s = std::max(0.0, r - cmax);
        worst = std::max(worst, -0.5 * lmin * s * s + sigma * std::sqrt(1 + r * r));
    }
    f.decay_kind = DecayKind::exponential;
    f.decay_rate = sigma;
    f.decay_constant = wsum * std::exp(worst);
    f.center = wsum > 0 ? Vec3(csum / wsum) : Vec3::Zero();
    f.support_hint = cmax + 6.0 / std::sqrt(lmin);
    f.name = "gaussian_mixture";
    return f;
}

DistributionSpec smooth_ball(double R, double eps) {
    DistributionSpec f;
    f.density = [R, eps](const Vec3& p) {
        const double s = (p.norm() - R) / eps;
        return s > 700 ? 0.0 : 1.0 / (1.0 + std::exp(s));
    };
    f.decay_kind = DecayKind::exponential;
    f.decay_rate = 1.0;
    f.decay_constant = std::exp(std::sqrt(1 + (R + 40 * eps) * (R + 40 * eps)));
    f.support_hint = R;
    f.name = "smooth_ball";
    return f;
}

void verify_decay(const DistributionSpec& f, int probes, std::uint64_t seed) {
    Rng rng(seed, 0x6465636179);
    const double reach = f.center.norm() + f.support_hint.value_or(10.0) * 3.0 + 20.0;
    for (int i = 0; i < probes; ++i) {
        const Vec3 p = rng.radial_uniform(reach);
        const double v = f(p);
        if (v < 0) throw ConfigError(f.name + ": negative density");
        const double e = energy(p);
        const double bound = f.decay_kind == DecayKind::polynomial ? f.decay_constant * std::pow(e, -f.decay_rate)
                                                                   : f.decay_constant * std::exp(-f.decay_rate * e);
        if (v > 1.05 * bound) throw ConfigError(f.name + ": declared decay violated");
    }
}

QuadratureConfig QuadratureConfig::coarser() const {
    QuadratureConfig c = *this;
    c.radial_nodes = std::max(2, radial_nodes / 2);
    c.theta_nodes = std::max(2, theta_nodes / 2);
    c.phi_nodes = std::max(4, phi_nodes / 2);
    c.error_estimate = false;
    return c;
}

QuadratureConfig QuadratureConfig::refined() const {
    QuadratureConfig c = *this;
    c.radial_nodes *= 2;
    c.theta_nodes *= 2;
    c.phi_nodes *= 2;
    return c;
}

QuadratureConfig quadrature_level(int level) {
    QuadratureConfig c;
    c.radial_nodes = 3;
    c.theta_nodes = 2;
    c.phi_nodes = 6;
    for (int i = 0; i < level; ++i) c = c.refined();
    return c;
}

double tail_radius(const DistributionSpec& f, const QuadratureConfig& cfg) {
    const double g = cfg.growth_exponent;
    if (f.decay_kind == DecayKind::polynomial) {
        const double m = f.decay_rate - 3.0 - g;
        if (m <= 0) return cfg.max_radius;
        return std::min(cfg.max_radius, std::pow(4.0 * kPi / (m * cfg.tail_tol), 1.0 / m));
    }
    const double s = f.decay_rate;
    for (double R = 1.0; R < cfg.max_radius; R += 0.5) {
        const double tail = 4.0 * kPi * std::pow(R + 1.0, 2.0 + g) * std::exp(-s * R) / s;
        if (tail <= cfg.tail_tol) return R;
    }
    return cfg.max_radius;
}

namespace {

std::vector<double> radial_breaks(double R, double core, const QuadratureConfig& cfg) {
    std::vector<double> b = graded_breaks(cfg.first_panel, cfg.max_panel, std::min(R, core));
    double w = cfg.max_panel;
    while (b.back() < R) {
        w *= 1.3;
        b.push_back(std::min(R, b.back() + w));
    }
    return b;
}

}  // namespace

CoefficientQuadrature::CoefficientQuadrature(const DistributionSpec& f, const Vec3& anchor, const QuadratureConfig& cfg)
    : f_(f), cfg_(cfg) {
    const Vec3 to_center = f.center - anchor;
    const double dist = to_center.norm();
    radius_ = dist + tail_radius(f, cfg);
    const double core = dist + std::max(cfg.core_extent, f.support_hint.value_or(0.0));
    radial_ = composite_gauss(radial_breaks(radius_, core, cfg), cfg.radial_nodes);
    // pole toward the mass so the graded polar panels resolve it at long range
    frame_ = dist > 0 ? frame_from_axis(to_center) : Mat3::Identity();
    sphere_ = graded_sphere_rule(cfg.theta_levels, cfg.theta_nodes, cfg.phi_nodes);
    for (auto& d : sphere_.dir) d = frame_ * d;
}

CoefficientEval CoefficientQuadrature::eval(const Vec3& p, bool with_d) const {
    CoefficientEval out;
    if (f_.is_zero) return out;
    const double ep = energy(p);
    Eigen::Matrix<double, 6, 1> A = Eigen::Matrix<double, 6, 1>::Zero();
    Vec3 b = Vec3::Zero(), B = Vec3::Zero(), d = Vec3::Zero();
    double c = 0;
    for (std::size_t k = 0; k < radial_.size(); ++k) {
        const double r = radial_.x[k];
        const double wr = radial_.w[k] * r * r;
        for (std::size_t j = 0; j < sphere_.dir.size(); ++j) {
            const Vec3 dq = r * sphere_.dir[j];
            const Vec3 q = p + dq;
            const double fq = f_.density(q);
            if (fq == 0.0) continue;
            const double w = wr * sphere_.w[j] * fq;
            const double eq = energy(q);
            const double tm2 = (dq.squaredNorm() + p.cross(dq).squaredNorm()) / (ep * eq + p.dot(q) + 1.0);
            const double t = tm2 + 2.0;
            const double tt = t * tm2;
            const double tm1 = t - 1.0;
            const double stt = std::sqrt(tt);
            const double lam = tm1 * tm1 / (ep * eq * tt * stt);
            // Phi = lam [tt I - dq dq^T + tm2 (p q^T + q p^T)]
            const double wl = w * lam;
            const double pq0 = 2 * p[0] * q[0], pq1 = 2 * p[1] * q[1], pq2 = 2 * p[2] * q[2];
            const double o01 = p[0] * q[1] + q[0] * p[1], o02 = p[0] * q[2] + q[0] * p[2], o12 = p[1] * q[2] + q[1] * p[2];
            const double s00 = tt - dq[0] * dq[0] + tm2 * pq0;
            const double s11 = tt - dq[1] * dq[1] + tm2 * pq1;
            const double s22 = tt - dq[2] * dq[2] + tm2 * pq2;
            const double s01 = -dq[0] * dq[1] + tm2 * o01;
            const double s02 = -dq[0] * dq[2] + tm2 * o02;
            const double s12 = -dq[1] * dq[2] + tm2 * o12;
            A[0] += wl * s00;
            A[1] += wl * s11;
            A[2] += wl * s22;
            A[3] += wl * s01;
            A[4] += wl * s02;
            A[5] += wl * s12;
            b += (2.0 * wl * tm2) * (p + q);
            B += (2.0 * wl) * (tm1 * p - q);
            c += 4.0 * w * tm1 / (ep * eq * stt);
            if (with_d) {
                const Vec3 g = f_.grad(q) * (wr * sphere_.w[j] * lam);
                d[0] += s00 * g[0] + s01 * g[1] + s02 * g[2];
                d[1] += s01 * g[0] + s11 * g[1] + s12 * g[2];
                d[2] += s02 * g[0] + s12 * g[1] + s22 * g[2];
            }
        }
    }
    out.a << A[0], A[3], A[4], A[3], A[1], A[5], A[4], A[5], A[2];
    out.b = b;
    out.B = B;
    out.c = c + kappa(p) * f_.density(p);
    out.d = d;
    return out;
}

namespace {

CoefficientEval with_error(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg, bool with_d) {
    CoefficientEval e = CoefficientQuadrature(f, p, cfg).eval(p, with_d);
    const CoefficientEval c = CoefficientQuadrature(f, p, cfg.coarser()).eval(p, with_d);
    e.err_a = max_abs(Mat3(e.a - c.a));
    e.err_b = max_abs(Vec3(e.b - c.b));
    e.err_B = max_abs(Vec3(e.B - c.B));
    e.err_c = std::abs(e.c - c.c);
    e.err_d = max_abs(Vec3(e.d - c.d));
    return e;
}

bool meets(const CoefficientEval& e, double tol) {
    const double s = max_abs(e.a);
    return e.err_a <= tol * s && e.err_b <= tol * (s + max_abs(e.b)) && e.err_B <= tol * (s + max_abs(e.B)) &&
           e.err_c <= tol * (s + std::abs(e.c)) && e.err_d <= tol * (s + max_abs(e.d));
}

}  // namespace

CoefficientEval coefficients(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg, bool with_d) {
    if (f.decay_kind == DecayKind::polynomial && f.decay_rate <= 5.0)
        throw ConfigError("coefficients: polynomial decay k <= 5 is insufficient for a^f");
    if (!cfg.error_estimate) return CoefficientQuadrature(f, p, cfg).eval(p, with_d);
    QuadratureConfig c = cfg;
    for (int k = 0;; ++k) {
        const CoefficientEval e = with_error(f, p, c, with_d);
        if (meets(e, cfg.rel_tol)) return e;
        if (k == cfg.max_refinements)
            throw ConvergenceError("coefficients: error estimate above rel_tol after max refinements");
        c = c.refined();
    }
}

std::vector<CoefficientEval> coefficient_field(const DistributionSpec& f, const std::vector<Vec3>& points,
                                               const QuadratureConfig& cfg, unsigned threads) {
    std::vector<CoefficientEval> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = coefficients(f, points[i], cfg); }, threads);
    return out;
}

CoefficientField evaluate_field(const DistributionSpec& f, std::vector<Vec3> points, const QuadratureConfig& cfg,
                                unsigned threads) {
    CoefficientField out;
    out.values = coefficient_field(f, points, cfg, threads);
    out.points = std::move(points);
    return out;
}

double QrlAllForms::mismatch() const {
    const double m = std::max({std::abs(direct - nondivergence), std::abs(direct - divergence),
                               std::abs(nondivergence - divergence)});
    return scale > 0 ? m / scale : m;
}

namespace {

void require_decay(const DistributionSpec& f, double kmin, const char* what) {
    if (f.decay_kind == DecayKind::polynomial && f.decay_rate <= kmin)
        throw ConfigError(std::string(what) + ": declared polynomial decay too weak");
}

CoefficientEval unchecked(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg) {
    QuadratureConfig c = cfg;
    c.error_estimate = false;
    return CoefficientQuadrature(f, p, c).eval(p, false);
}

}  // namespace

Mat3 coeff_a(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg) {
    require_decay(f, 5.0, "coeff_a");
    return unchecked(f, p, cfg).a;
}
Vec3 coeff_b(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg) {
    require_decay(f, 4.0, "coeff_b");
    return unchecked(f, p, cfg).b;
}
Vec3 coeff_B(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg) {
    require_decay(f, 4.0, "coeff_B");
    return unchecked(f, p, cfg).B;
}
double coeff_c(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg) {
    require_decay(f, 3.0, "coeff_c");
    return unchecked(f, p, cfg).c;
}

Vec3 TestFunction::grad(const Vec3& p) const {
    if (gradient) return gradient(p);
    const auto g = fd_gradient(value, p, fd_rel_step * (1.0 + p.norm()));
    return {g[0], g[1], g[2]};
}

Mat3 TestFunction::hess(const Vec3& p) const {
    if (hessian) return hessian(p);
    const double h = fd_rel_step * (1.0 + p.norm());
    Mat3 H;
    const double g0 = value(p);
    for (int i = 0; i < 3; ++i) {
        Vec3 ei = Vec3::Zero();
        ei[i] = h;
        H(i, i) = (-value(p + 2 * ei) + 16 * value(p + ei) - 30 * g0 + 16 * value(p - ei) - value(p - 2 * ei)) / (12 * h * h);
        for (int j = i + 1; j < 3; ++j) {
            Vec3 ej = Vec3::Zero();
            ej[j] = h;
            double s = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) s += kD1[a] * kD1[b] * value(p + kOff[a] * ei + kOff[b] * ej);
            H(i, j) = H(j, i) = s / (h * h);
        }
    }
    return H;
}

TestFunction as_test_function(const DistributionSpec& g) {
    TestFunction t;
    t.value = g.density;
    t.gradient = g.gradient;
    return t;
}

const char* to_string(QForm f) {
    switch (f) {
    case QForm::direct: return "direct";
    case QForm::nondivergence: return "nondivergence";
    case QForm::divergence: return "divergence";
    }
    return "?";
}

QrlAllForms q_rl_all(const DistributionSpec& f, const TestFunction& g, const Vec3& p, const QuadratureConfig& cfg) {
    QrlAllForms r;
    if (f.is_zero) return r;
    const CoefficientQuadrature quad(f, p, cfg);
    const CoefficientEval c0 = quad.eval(p, false);
    const Vec3 dg = g.grad(p);
    const double g0 = g(p);
    const double t_a = (c0.a * g.hess(p)).trace();
    r.nondivergence = t_a + c0.b.dot(dg) + c0.c * g0;
    r.scale = std::abs(t_a) + std::abs(c0.b.dot(dg)) + std::abs(c0.c * g0);

    // divergences of a grad g and a grad g - g d on one shared stencil
    const double h = cfg.fd_rel_step * (1.0 + p.norm());
    double div_a = 0, div_w = 0;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 4; ++k) {
            Vec3 q = p;
            q[i] += kOff[k] * h;
            const CoefficientEval e = quad.eval(q, true);
            const Vec3 v = e.a * g.grad(q);
            div_a += kD1[k] * v[i] / h;
            div_w += kD1[k] * (v[i] - g(q) * e.d[i]) / h;
        }
    }
    r.divergence = div_a + c0.B.dot(dg) + c0.c * g0;
    r.direct = div_w;
    return r;
}

double q_rl(const DistributionSpec& f, const TestFunction& g, const Vec3& p, QForm form, const QuadratureConfig& cfg) {
    if (form == QForm::nondivergence) {
        if (f.is_zero) return 0.0;
        QuadratureConfig c = cfg;
        c.error_estimate = false;
        const CoefficientEval e = CoefficientQuadrature(f, p, c).eval(p, false);
        return (e.a * g.hess(p)).trace() + e.b.dot(g.grad(p)) + e.c * g(p);
    }
    const QrlAllForms all = q_rl_all(f, g, p, cfg);
    return form == QForm::direct ? all.direct : all.divergence;
}

namespace {

Moments moments_with(const DistributionSpec& f, const QuadratureConfig& cfg) {
    Moments m;
    if (f.is_zero) return m;
    const double R = tail_radius(f, cfg) + f.center.norm();
    std::vector<double> br = graded_breaks(cfg.first_panel, cfg.max_panel, std::min(R, cfg.core_extent + f.center.norm()));
    double w = cfg.max_panel;
    while (br.back() < R) {
        w *= 1.3;
        br.push_back(std::min(R, br.back() + w));
    }
    if (f.support_hint) {
        // grade toward a sharp shell at the hinted radius
        const double s = *f.support_hint;
        for (int k = 1; k <= 14; ++k) {
            br.push_back(s * (1 - std::pow(2.0, -k)));
            br.push_back(s * (1 + std::pow(2.0, -k)));
        }
        br.push_back(s);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        while (!br.empty() && br.back() > R && br.size() > 2 && br[br.size() - 2] >= R) br.pop_back();
    }
    const Rule1D rad = composite_gauss(br, cfg.radial_nodes);
    const SphereRule sph = graded_sphere_rule(1, 2 * cfg.theta_nodes, cfg.phi_nodes);
    for (std::size_t k = 0; k < rad.size(); ++k) {
        const double r = rad.x[k];
        for (std::size_t j = 0; j < sph.dir.size(); ++j) {
            const Vec3 p = f.center + r * sph.dir[j];
            const double v = f(p);
            const double wt = rad.w[k] * r * r * sph.w[j];
            m.mass += wt * v;
            m.energy += wt * v * energy(p);
            m.momentum += wt * v * p;
            if (v > 0) {
                m.entropy += wt * v * std::log(v);
                m.entropy_abs += wt * v * std::abs(std::log(v));
            }
        }
    }
    return m;
}

}  // namespace

Moments macroscopic_moments(const DistributionSpec& f, const QuadratureConfig& cfg) {
    Moments m = moments_with(f, cfg);
    if (cfg.error_estimate) {
        const Moments c = moments_with(f, cfg.coarser());
        m.err_mass = std::abs(m.mass - c.mass);
        m.err_energy = std::abs(m.energy - c.energy);
    }
    return m;
}

}  // namespace relkin
