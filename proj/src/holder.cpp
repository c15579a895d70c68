#include "relkin/holder.hpp"

#include <cmath>
#include <functional>

#include "relkin/parallel.hpp"

namespace relkin {

const char* to_string(HolderOrder o) {
    switch (o) {
    case HolderOrder::alpha: return "alpha";
    case HolderOrder::alpha_t: return "alpha_t";
    case HolderOrder::alpha_x: return "alpha_x";
    case HolderOrder::one_alpha: return "1+alpha";
    case HolderOrder::two_alpha: return "2+alpha";
    case HolderOrder::three_alpha: return "3+alpha";
    }
    return "?";
}

void PointCloudSample::validate() const {
    const std::size_t n = points.size();
    if (values.size() != n) throw DomainError("cloud: values do not match points");
    auto check = [n](std::size_t m, const char* what) {
        if (m != 0 && m != n) throw DomainError(std::string("cloud: ") + what + " does not match points");
    };
    check(grad_p.size(), "grad_p");
    check(hess_p.size(), "hess_p");
    check(d3_p.size(), "d3_p");
    check(dt.size(), "dt");
    check(grad_x.size(), "grad_x");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("cloud: non-finite value");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (points[i].t == points[j].t && points[i].x == points[j].x && points[i].p == points[j].p)
                throw DomainError("cloud: duplicate point");
}

namespace {

struct Best {
    double value = 0.0;
    std::size_t i = 0, j = 0;
};

using Diff = std::function<double(std::size_t, std::size_t)>;
// Denominator for an ordered pair; <= 0 means the pair is not admissible.
using Denom = std::function<double(const PhasePoint&, const PhasePoint&)>;

Best pair_sup(const PointCloudSample& c, const Diff& diff, const Denom& denom) {
    const std::size_t n = c.size();
    std::vector<Best> rows(n);
    parallel_for(n, [&](std::size_t i) {
        Best b;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = denom(c.points[i], c.points[j]);
            if (d <= 0) continue;
            const double q = diff(i, j) / d;
            if (q > b.value) b = {q, i, j};
        }
        rows[i] = b;
    });
    Best out;
    for (const Best& b : rows)
        if (b.value > out.value) out = b;
    return out;
}

double full_distance(const PhasePoint& z, const PhasePoint& z0, Geometry g) {
    return g == Geometry::lorentz ? dist_L(z, z0) : dist_G(z, z0);
}

Denom full_denom(double alpha, Geometry g) {
    return [alpha, g](const PhasePoint& z, const PhasePoint& z0) { return std::pow(full_distance(z, z0, g), alpha); };
}

Denom time_denom(double alpha, Geometry g) {
    return [alpha, g](const PhasePoint& z, const PhasePoint& z0) {
        if (z.t == z0.t || z.x != z0.x || z.p != z0.p) return 0.0;
        const double dt = std::abs(z.t - z0.t);
        const double lead = g == Geometry::lorentz ? energy(z.p) * dt : dt;
        return std::pow(lead, alpha) + std::pow(z.p.norm() * dt, 2 * alpha / 3);
    };
}

Denom space_denom(double alpha, Geometry g) {
    return [alpha, g](const PhasePoint& z, const PhasePoint& z0) {
        if (z.t != z0.t || z.x == z0.x || z.p != z0.p) return 0.0;
        const Vec3 dx = z.x - z0.x;
        if (g == Geometry::galilean) return std::pow(dx.norm(), alpha);
        const Vec3 par = parallel_part(dx, z.p);
        const Vec3 mixed = (dx - par) + energy(z.p) * par;
        return std::pow(std::abs(z.p.dot(dx)), 1.5 * alpha) + std::pow(mixed.norm(), alpha);
    };
}

template <class V> Diff vector_diff(const std::vector<V>& v, const char* what) {
    if (v.empty()) throw DomainError(std::string("seminorm: missing derivative values ") + what);
    return [&v](std::size_t i, std::size_t j) { return (v[i] - v[j]).norm(); };
}

Diff scalar_diff(const std::vector<double>& v) {
    return [&v](std::size_t i, std::size_t j) { return std::abs(v[i] - v[j]); };
}

}  // namespace

SeminormReport seminorm(const PointCloudSample& c, HolderOrder order, double alpha, Geometry g, double beta) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("seminorm: alpha must lie in (0,1)");
    if (!(beta > 0 && beta < 1)) throw DomainError("seminorm: beta must lie in (0,1)");
    c.validate();
    SeminormReport r;
    r.order = order;
    double top = -1;
    auto add = [&](const char* name, const Best& b) {
        r.terms.emplace_back(name, b.value);
        r.value += b.value;
        if (b.value > top) {
            top = b.value;
            r.attaining_pair = {b.i, b.j};
        }
    };
    const Diff val = scalar_diff(c.values);
    switch (order) {
    case HolderOrder::alpha: add("value", pair_sup(c, val, full_denom(alpha, g))); break;
    case HolderOrder::alpha_t: add("t", pair_sup(c, val, time_denom(alpha, g))); break;
    case HolderOrder::alpha_x: add("x", pair_sup(c, val, space_denom(alpha, g))); break;
    case HolderOrder::one_alpha:
        add("grad_p", pair_sup(c, vector_diff(c.grad_p, "grad_p"), full_denom(alpha, g)));
        add("t", pair_sup(c, val, time_denom((1 + alpha) / 2, g)));
        add("x", pair_sup(c, val, space_denom((1 + alpha) / 3, g)));
        break;
    case HolderOrder::two_alpha:
        add("hess_p", pair_sup(c, vector_diff(c.hess_p, "hess_p"), full_denom(alpha, g)));
        add("t", pair_sup(c, val, time_denom(beta, g)));
        add("x", pair_sup(c, val, space_denom((2 + alpha) / 3, g)));
        break;
    case HolderOrder::three_alpha:
        add("d3_p", pair_sup(c, vector_diff(c.d3_p, "d3_p"), full_denom(alpha, g)));
        if (c.dt.empty()) throw DomainError("seminorm: missing derivative values dt");
        add("dt", pair_sup(c, scalar_diff(c.dt), full_denom(alpha, g)));
        add("grad_x", pair_sup(c, vector_diff(c.grad_x, "grad_x"), full_denom(alpha, g)));
        break;
    }
    return r;
}

double linf(const PointCloudSample& c) {
    double m = 0;
    for (double v : c.values) m = std::max(m, std::abs(v));
    return m;
}

ProductCheck product_inequality_check(const PointCloudSample& f, const PointCloudSample& g, double alpha, Geometry geo) {
    if (f.size() != g.size()) throw DomainError("product check: clouds differ");
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.points[i].t != g.points[i].t || f.points[i].x != g.points[i].x || f.points[i].p != g.points[i].p)
            throw DomainError("product check: clouds differ");
    PointCloudSample fg;
    fg.points = f.points;
    for (std::size_t i = 0; i < f.size(); ++i) fg.values.push_back(f.values[i] * g.values[i]);
    ProductCheck r;
    r.lhs = seminorm(fg, HolderOrder::alpha, alpha, geo).value;
    r.rhs = linf(f) * seminorm(g, HolderOrder::alpha, alpha, geo).value +
            seminorm(f, HolderOrder::alpha, alpha, geo).value * linf(g);
    // the discrete inequality is exact; allow rounding in the quotients only
    r.holds = r.lhs <= r.rhs * (1 + 1e-12);
    return r;
}

NormEquivReport norm_equiv_check(const PointCloudSample& cp, double alpha, double R) {
    if (!(R > 0 && R < 1)) throw DomainError("norm_equiv_check: R must lie in (0,1)");
    const double pmax = R / std::sqrt(1 - R * R);
    PointCloudSample cv;
    cv.values = cp.values;
    for (const PhasePoint& z : cp.points) {
        if (z.p.norm() > pmax * (1 + 1e-12)) throw DomainError("norm_equiv_check: momentum outside the ball");
        cv.points.push_back(to_velocity(z));
    }
    NormEquivReport r;
    r.seminorm_L = seminorm(cp, HolderOrder::alpha, alpha, Geometry::lorentz).value;
    r.seminorm_G = seminorm(cv, HolderOrder::alpha, alpha, Geometry::galilean).value;
    r.norm_L = r.seminorm_L + linf(cp);
    r.norm_G = r.seminorm_G + linf(cv);
    const double w = 1 - R * R;
    r.C_LG = r.norm_G > 0 ? r.seminorm_L / (std::pow(w, -alpha / 6) * r.norm_G) : 0.0;
    r.C_GL = r.norm_L > 0 ? r.seminorm_G / (std::pow(w, -alpha) * r.norm_L) : 0.0;
    return r;
}

}  // namespace relkin
