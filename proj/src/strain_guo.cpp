#include "relkin/strain_guo.hpp"

#include <cmath>

#include "relkin/kernel.hpp"
#include "relkin/lorentz.hpp"
#include "relkin/parallel.hpp"
#include "relkin/rng.hpp"

namespace relkin {

std::string MultiIndex::str() const {
    return "(" + std::to_string(b[0]) + "," + std::to_string(b[1]) + "," + std::to_string(b[2]) + ")";
}

namespace {

struct Stencil {
    std::vector<int> off;
    std::vector<double> w;
};

const Stencil& stencil(int order) {
    static const Stencil s2{{-1, 1}, {-0.5, 0.5}};
    static const Stencil s4{{-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}};
    if (order == 2) return s2;
    if (order == 4) return s4;
    throw DomainError("finite differences: order must be 2 or 4");
}

enum class Step { p, q, theta };
struct Op {
    Step kind;
    int i;
};

// ops[k] is applied outside ops[k-1]; ops[0] is innermost.
double nested(const std::vector<Op>& ops, int k, const PairFunction& F, const Vec3& p, const Vec3& q, double h,
              const Stencil& st) {
    if (k < 0) return F(p, q);
    const Op op = ops[k];
    const double r = op.kind == Step::theta ? energy(q) / energy(p) : 0.0;
    double s = 0;
    for (std::size_t j = 0; j < st.off.size(); ++j) {
        Vec3 pp = p, qq = q;
        const double d = st.off[j] * h;
        if (op.kind != Step::q) pp[op.i] += d;
        if (op.kind == Step::q) qq[op.i] += d;
        if (op.kind == Step::theta) qq[op.i] += r * d;
        s += st.w[j] * nested(ops, k - 1, F, pp, qq, h, st);
    }
    return s / h;
}

void push(std::vector<Op>& ops, Step kind, const MultiIndex& m) {
    for (int i = 0; i < 3; ++i)
        for (int n = 0; n < m.b[i]; ++n) ops.push_back({kind, i});
}

double ipow(double x, int n) {
    double r = 1;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

}  // namespace

double theta_apply(const MultiIndex& beta, const PairFunction& F, const Vec3& p, const Vec3& q, double h, int fd_order) {
    if (beta.order() > 3) throw DomainError("theta_apply: |beta| > 3 is not supported");
    std::vector<Op> ops;
    push(ops, Step::theta, beta);
    return nested(ops, int(ops.size()) - 1, F, p, q, h, stencil(fd_order));
}

PhiExpr PhiExpr::constant(double c) {
    PhiExpr e;
    if (c != 0) e.terms_[Monomial{}] = c;
    return e;
}

void PhiExpr::add(const Monomial& m, double c) {
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

double PhiExpr::operator()(const Vec3& p, const Vec3& q) const {
    const double P = energy(p), Q = energy(q);
    double s = 0;
    for (const auto& [m, c] : terms_) {
        double v = c * std::pow(P, m.ep) * std::pow(Q, m.eq);
        for (int i = 0; i < 3; ++i) v *= ipow(p[i], m.pk[i]) * ipow(q[i], m.qk[i]);
        s += v;
    }
    return s;
}

PhiExpr PhiExpr::dp(int i) const {
    PhiExpr out;
    for (const auto& [m, c] : terms_) {
        if (m.ep != 0) {
            // d <p>^a = a <p>^{a-2} p_i
            Monomial n = m;
            n.ep -= 2;
            n.pk[i] += 1;
            out.add(n, c * m.ep);
        }
        if (m.pk[i] != 0) {
            Monomial n = m;
            n.pk[i] -= 1;
            out.add(n, c * m.pk[i]);
        }
    }
    return out;
}

PhiExpr PhiExpr::dq(int i) const {
    PhiExpr out;
    for (const auto& [m, c] : terms_) {
        if (m.eq != 0) {
            Monomial n = m;
            n.eq -= 2;
            n.qk[i] += 1;
            out.add(n, c * m.eq);
        }
        if (m.qk[i] != 0) {
            Monomial n = m;
            n.qk[i] -= 1;
            out.add(n, c * m.qk[i]);
        }
    }
    return out;
}

PhiExpr PhiExpr::times(const Monomial& f, double k) const {
    PhiExpr out;
    for (const auto& [m, c] : terms_) {
        Monomial n = m;
        n.ep += f.ep;
        n.eq += f.eq;
        for (int i = 0; i < 3; ++i) {
            n.pk[i] += f.pk[i];
            n.qk[i] += f.qk[i];
        }
        out.add(n, c * k);
    }
    return out;
}

PhiExpr& PhiExpr::operator+=(const PhiExpr& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
}

double PhiCoefficientTable::operator()(const PhiKey& k, const Vec3& p, const Vec3& q) const {
    const auto it = entries.find(k);
    return it == entries.end() ? 0.0 : it->second(p, q);
}

PhiCoefficientTable PhiCoefficientTable::q_only() const {
    PhiCoefficientTable t;
    t.beta = beta;
    for (const auto& [k, e] : entries)
        if (k.b3.order() == 0) t.entries.emplace(k, e);
    return t;
}

PhiCoefficientTable phi_step(const PhiCoefficientTable& t, int m) {
    for (int j = m + 1; j < 3; ++j)
        if (t.beta.b[j] > 0) throw DomainError("phi_step: e_m must be the last nonzero direction");
    const MultiIndex em = MultiIndex::unit(m);
    Monomial ratio;  // <q>/<p>
    ratio.eq = 1;
    ratio.ep = -1;
    Monomial qm;  // q_m / (<q><p>)
    qm.eq = -1;
    qm.ep = -1;
    qm.qk[m] = 1;

    PhiCoefficientTable out;
    out.beta = t.beta + em;
    auto acc = [&out](const PhiKey& k, const PhiExpr& e) {
        PhiExpr& slot = out.entries[k];
        slot += e;
    };
    for (const auto& [k, phi] : t.entries) {
        acc({k.b1, k.b2, k.b3 + em}, phi);                // S1
        acc({k.b1, k.b2 + em, k.b3}, phi.times(ratio, 1));  // S2
        acc({k.b1 + em, k.b2, k.b3}, phi);                // S3
        PhiExpr s4 = phi.dp(m);                           // S4
        s4 += phi.dq(m).times(ratio, 1);
        s4 += phi.times(qm, 1);
        acc(k, s4);
    }
    for (auto it = out.entries.begin(); it != out.entries.end();)
        it = it->second.is_zero() ? out.entries.erase(it) : std::next(it);
    return out;
}

PhiCoefficientTable phi_table(const MultiIndex& beta) {
    if (beta.order() > 3) throw DomainError("phi_table: |beta| > 3 is not supported");
    PhiCoefficientTable t;
    t.entries[PhiKey{}] = PhiExpr::constant(1.0);
    for (int i = 0; i < 3; ++i)
        for (int n = 0; n < beta.b[i]; ++n) t = phi_step(t, i);
    return t;
}

namespace {

Vec3 log_radius_point(Rng& rng, double radius) {
    const double r = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(std::log(1e-2), std::log(radius)));
    return r * rng.unit_vector();
}

}  // namespace

PhiBoundReport phi_bound_report(const PhiCoefficientTable& t, std::size_t samples, double radius, int max_nu,
                                std::uint64_t seed) {
    // every derivative expression d_q^nu1 d_p^nu2 phi with |nu1| + |nu2| <= max_nu
    struct Probe {
        PhiKey key;
        PhiExpr expr;
        int nu_q, nu_p;
    };
    std::vector<Probe> probes;
    for (const auto& [k, e] : t.entries) {
        std::vector<Probe> layer{{k, e, 0, 0}};
        for (int n = 0; n <= max_nu; ++n) {
            std::vector<Probe> next;
            for (const Probe& pr : layer) {
                probes.push_back(pr);
                if (n == max_nu) continue;
                for (int i = 0; i < 3; ++i) {
                    next.push_back({k, pr.expr.dq(i), pr.nu_q + 1, pr.nu_p});
                    next.push_back({k, pr.expr.dp(i), pr.nu_q, pr.nu_p + 1});
                }
            }
            layer = std::move(next);
        }
    }
    Rng rng(seed, 0x706869);
    PhiBoundReport rep;
    rep.samples = samples;
    const int B = t.beta.order();
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec3 p = log_radius_point(rng, radius);
        const Vec3 q = log_radius_point(rng, radius);
        const double P = energy(p), Q = energy(q);
        for (const Probe& pr : probes) {
            const double bound = std::pow(Q, pr.key.b2.order() - pr.nu_q) *
                                 std::pow(P, pr.key.b1.order() + pr.key.b3.order() - B - pr.nu_p);
            const double ratio = std::abs(pr.expr(p, q)) / bound;
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_key = pr.key;
            }
        }
    }
    return rep;
}

double PairTestFunction::deriv(const MultiIndex& b2, const MultiIndex& b3, const Vec3& p, const Vec3& q, double h) const {
    if (derivative) return derivative(b2, b3, p, q);
    std::vector<Op> ops;
    push(ops, Step::q, b2);
    push(ops, Step::p, b3);
    return nested(ops, int(ops.size()) - 1, value, p, q, h, stencil(4));
}

double smooth_cutoff(double r, double eps) {
    if (r <= eps) return 0.0;
    if (r >= 2 * eps) return 1.0;
    const double s = (r - eps) / eps;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

PairFunction excised(const PairFunction& gamma, double eps) {
    return [gamma, eps](const Vec3& p, const Vec3& q) {
        const double chi = smooth_cutoff((p - q).norm(), eps);
        return chi == 0.0 ? 0.0 : chi * gamma(p, q);
    };
}

IbpReport ibp_verify(const MultiIndex& beta, const PairFunction& gamma, const PairTestFunction& mu, const Vec3& p,
                     const IbpConfig& cfg) {
    if (beta.order() == 0 || beta.order() > 3) throw DomainError("ibp_verify: need 0 < |beta| <= 3");
    // q-rule about p: uniform radial panels plus requested edges, sphere oriented toward mu
    const double R = (mu.center - p).norm() + mu.reach;
    std::vector<double> br{0.0};
    for (double e : cfg.extra_breaks)
        if (e > 0 && e < R) br.push_back(e);
    for (double r = cfg.panel; r < R; r += cfg.panel) br.push_back(r);
    br.push_back(R);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), br.end());
    const Rule1D rad = composite_gauss(br, cfg.radial_nodes);
    SphereRule sph = graded_sphere_rule(cfg.theta_levels, cfg.theta_nodes, cfg.phi_nodes);
    const Vec3 axis = mu.center - p;
    const Mat3 F = axis.norm() > 0 ? frame_from_axis(axis) : Mat3::Identity();
    std::vector<Vec3> qs;
    std::vector<double> ws;
    for (std::size_t k = 0; k < rad.size(); ++k)
        for (std::size_t j = 0; j < sph.dir.size(); ++j) {
            qs.push_back(p + rad.x[k] * (F * sph.dir[j]));
            ws.push_back(rad.w[k] * rad.x[k] * rad.x[k] * sph.w[j]);
        }

    IbpReport rep;
    const Stencil& st = stencil(cfg.fd_order);
    const double h = cfg.fd_step;
    // left side: derivative in p of the fixed-rule quadrature
    std::vector<Op> ops;
    push(ops, Step::p, beta);
    const PairFunction integral = [&](const Vec3& pp, const Vec3&) {
        double s = 0;
        for (std::size_t n = 0; n < qs.size(); ++n) s += ws[n] * gamma(pp, qs[n]) * mu.value(pp, qs[n]);
        return s;
    };
    rep.lhs = nested(ops, int(ops.size()) - 1, integral, p, p, h, st);

    const PhiCoefficientTable table = phi_table(beta);
    rep.terms = table.entries.size();
    std::vector<double> term(table.entries.size(), 0.0);
    std::vector<std::pair<PhiKey, const PhiExpr*>> entries;
    for (const auto& [k, e] : table.entries) entries.emplace_back(k, &e);
    std::vector<std::vector<double>> partial(qs.size());
    parallel_for(qs.size(), [&](std::size_t n) {
        const Vec3& q = qs[n];
        std::map<MultiIndex, double> theta_cache;
        std::vector<double> row(entries.size());
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const PhiKey& k = entries[e].first;
            auto it = theta_cache.find(k.b1);
            if (it == theta_cache.end())
                it = theta_cache.emplace(k.b1, theta_apply(k.b1, gamma, p, q, h, cfg.fd_order)).first;
            row[e] = ws[n] * it->second * mu.deriv(k.b2, k.b3, p, q, h) * (*entries[e].second)(p, q);
        }
        partial[n] = std::move(row);
    });
    for (const auto& row : partial)
        for (std::size_t e = 0; e < row.size(); ++e) term[e] += row[e];
    for (double t : term) {
        rep.rhs += t;
        rep.scale += std::abs(t);
    }
    const double denom = std::max(rep.scale, std::abs(rep.lhs));
    rep.residual = denom > 0 ? std::abs(rep.lhs - rep.rhs) / denom : std::abs(rep.lhs - rep.rhs);
    if (!std::isfinite(rep.residual)) throw ConvergenceError("ibp_verify: non-finite quadrature");
    return rep;
}

ThetaKernelReport theta_kernel_bound_report(const MultiIndex& beta, std::size_t samples, double radius,
                                            std::uint64_t seed) {
    if (beta.order() == 0 || beta.order() > 2) throw DomainError("theta_kernel_bound_report: need 0 < |beta| <= 2");
    Rng rng(seed, 0x7468657461);
    std::vector<std::pair<Vec3, Vec3>> pairs(samples);
    for (auto& pq : pairs) {
        const Vec3 p = log_radius_point(rng, radius);
        Vec3 q;
        if (rng.uniform() < 0.5) {
            q = p + std::exp(rng.uniform(std::log(1e-2), 0.0)) * rng.unit_vector();
        } else {
            q = log_radius_point(rng, radius);
        }
        pq = {p, q};
    }
    std::vector<ThetaKernelReport> rows(samples);
    const int B = beta.order();
    parallel_for(samples, [&](std::size_t s) {
        const auto& [p, q] = pairs[s];
        const double dist = (p - q).norm();
        if (dist == 0) return;
        const double P = energy(p), Q = energy(q);
        const double h = 1e-3 * std::min(1.0, dist / (1.0 + Q / P));
        ThetaKernelReport& r = rows[s];
        const double pB = std::pow(P, B);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const PairFunction phi = [i, j](const Vec3& a, const Vec3& b) { return kernel_eval(a, b).Phi(i, j); };
                const double v = std::abs(theta_apply(beta, phi, p, q, h));
                r.phi = std::max(r.phi, v * pB / (std::pow(Q, 7) * (1 + 1 / dist)));
            }
        const PairFunction G = [](const Vec3& a, const Vec3& b) { return kernel_eval(a, b).G; };
        r.G = std::abs(theta_apply(beta, G, p, q, h)) * pB * dist;
        for (int j = 0; j < 3; ++j) {
            const PairFunction H = [j](const Vec3& a, const Vec3& b) { return kernel_eval(a, b).H[j]; };
            r.H = std::max(r.H, std::abs(theta_apply(beta, H, p, q, h)) * std::pow(P, B - 1) * dist / Q);
        }
    });
    ThetaKernelReport out;
    out.samples = samples;
    for (const auto& r : rows) {
        out.phi = std::max(out.phi, r.phi);
        out.G = std::max(out.G, r.G);
        out.H = std::max(out.H, r.H);
    }
    return out;
}

}  // namespace relkin
