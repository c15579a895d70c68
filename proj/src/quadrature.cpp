#include "relkin/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace relkin {

const Rule1D& gauss_legendre(int n) {
    static std::map<int, Rule1D> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw ConfigError("gauss_legendre: n must be >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int k = 0; k < n; ++k) {
        r.x[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        r.w[k] = 2.0 * v * v;
    }
    // symmetrize to remove eigensolver noise
    for (int k = 0; k < n / 2; ++k) {
        const double x = 0.5 * (r.x[n - 1 - k] - r.x[k]);
        const double w = 0.5 * (r.w[n - 1 - k] + r.w[k]);
        r.x[k] = -x;
        r.x[n - 1 - k] = x;
        r.w[k] = r.w[n - 1 - k] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return cache.emplace(n, std::move(r)).first->second;
}

Rule1D composite_gauss(const std::vector<double>& breaks, int n) {
    const Rule1D& g = gauss_legendre(n);
    Rule1D r;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.x.push_back(m + h * g.x[i]);
            r.w.push_back(h * g.w[i]);
        }
    }
    return r;
}

std::vector<double> graded_breaks(double first, double max_width, double R) {
    std::vector<double> b{0.0};
    double w = first;
    while (b.back() < R) {
        b.push_back(std::min(R, b.back() + w));
        if (w < max_width) w = std::min(2.0 * w, max_width);
    }
    return b;
}

Mat3 frame_from_axis(const Vec3& axis) {
    const Vec3 e3 = axis.normalized();
    const Vec3 seed = std::abs(e3.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (seed - seed.dot(e3) * e3).normalized();
    const Vec3 e2 = e3.cross(e1);
    Mat3 F;
    F.col(0) = e1;
    F.col(1) = e2;
    F.col(2) = e3;
    return F;
}

SphereRule graded_sphere_rule(int theta_levels, int n_theta, int n_phi) {
    std::vector<double> tb{0.0};
    for (int k = theta_levels; k >= 1; --k) tb.push_back(std::numbers::pi / std::pow(2.0, k));
    tb.push_back(std::numbers::pi);
    const Rule1D th = composite_gauss(tb, n_theta);
    SphereRule s;
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double st = std::sin(th.x[i]), ct = std::cos(th.x[i]);
        for (int j = 0; j < n_phi; ++j) {
            const double ph = (j + 0.5) * dphi;
            s.dir.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
            s.w.push_back(th.w[i] * st * dphi);
        }
    }
    return s;
}

}  // namespace relkin
