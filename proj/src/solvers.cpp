#include "relkin/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <cmath>
#include <numeric>
#include <sstream>

#include "relkin/kernel.hpp"
#include "relkin/lorentz.hpp"
#include "relkin/parallel.hpp"
#include "relkin/rng.hpp"

namespace relkin {

MomentumGrid3D::MomentumGrid3D(double P, int n_) : extent(P), n(n_) {
    if (n < 16) throw ConfigError("MomentumGrid3D: n must be at least 16");
    if (!(P > 0) || !std::isfinite(P)) throw ConfigError("MomentumGrid3D: extent must be positive");
}

Vec3 MomentumGrid3D::node(std::size_t idx) const {
    const int k = int(idx % n);
    const int j = int((idx / n) % n);
    const int i = int(idx / (std::size_t(n) * n));
    return node(i, j, k);
}

bool MomentumGrid3D::interior(std::size_t idx, int margin) const {
    const int k = int(idx % n);
    const int j = int((idx / n) % n);
    const int i = int(idx / (std::size_t(n) * n));
    const int hi = n - 1 - margin;
    return i >= margin && j >= margin && k >= margin && i <= hi && j <= hi && k <= hi;
}

DistributionState DistributionState::sample(const MomentumGrid3D& g, const std::function<double(const Vec3&)>& f,
                                            double t) {
    DistributionState s{g, Eigen::VectorXd(g.size()), t};
    for (std::size_t i = 0; i < g.size(); ++i) s.values[i] = f(g.node(i));
    s.validate();
    return s;
}

GridMoments DistributionState::moments() const {
    GridMoments m;
    const double v = grid.cell_volume();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f = values[i];
        if (f == 0.0) continue;
        const Vec3 p = grid.node(i);
        m.mass += f;
        m.energy += f * energy(p);
        m.momentum += f * p;
        m.entropy += f * std::log(f);
    }
    m.mass *= v;
    m.energy *= v;
    m.momentum *= v;
    m.entropy *= v;
    return m;
}

DistributionState& DistributionState::normalize() {
    const double m = values.sum() * grid.cell_volume();
    if (m > 0) values /= m;
    return *this;
}

void DistributionState::validate() const {
    if (std::size_t(values.size()) != grid.size()) throw ConfigError("DistributionState: size does not match grid");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]) || values[i] < 0)
            throw DomainError("DistributionState: values must be finite and nonnegative");
}

DistributionSpec grid_distribution(const DistributionState& s) {
    auto vals = std::make_shared<Eigen::VectorXd>(s.values);
    const MomentumGrid3D g = s.grid;
    DistributionSpec f;
    f.density = [vals, g](const Vec3& p) {
        const double h = g.h();
        double w[3];
        int i0[3];
        for (int a = 0; a < 3; ++a) {
            const double u = (p[a] + g.extent) / h - 0.5;
            if (u < 0 || u > g.n - 1) return 0.0;
            i0[a] = std::min(int(u), g.n - 2);
            w[a] = u - i0[a];
        }
        double out = 0;
        for (int c = 0; c < 8; ++c) {
            const int di = c >> 2, dj = (c >> 1) & 1, dk = c & 1;
            const double wt = (di ? w[0] : 1 - w[0]) * (dj ? w[1] : 1 - w[1]) * (dk ? w[2] : 1 - w[2]);
            out += wt * (*vals)[g.index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
        }
        return out;
    };
    // bounded support; the declared envelope only sets the quadrature truncation
    double N = 0;
    for (std::size_t i = 0; i < g.size(); ++i) N = std::max(N, s.values[i] * std::exp(energy(g.node(i))));
    f.decay_kind = DecayKind::exponential;
    f.decay_rate = 1.0;
    f.decay_constant = N;
    f.support_hint = g.extent * std::sqrt(3.0);
    f.is_zero = s.values.maxCoeff() == 0.0;
    f.name = "grid";
    return f;
}

// ---------------------------------------------------------------------------
// collision assembly

namespace {

constexpr int kChunks = 16;  // fixed so the summation order does not depend on the thread count

// D u = sum_s w_s (u_{+s} - u_{-s}) / h
struct Stencil {
    int width;
    double w[2];
};

Stencil stencil(int order) {
    if (order == 2) return {1, {0.5, 0.0}};
    if (order == 4) return {2, {2.0 / 3.0, -1.0 / 12.0}};
    throw ConfigError("collision: stencil_order must be 2 or 4");
}

Eigen::Matrix3Xd log_gradient(const DistributionState& s, const CollisionOptions& opt) {
    const auto& g = s.grid;
    const int n = g.n;
    const Stencil st = stencil(opt.stencil_order);
    const double ih = 1.0 / g.h();
    Eigen::VectorXd lf(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) lf[i] = std::log(std::max(s.values[i], opt.log_floor));
    Eigen::Matrix3Xd out = Eigen::Matrix3Xd::Zero(3, g.size());
    const int lo = st.width, hi = n - st.width;
    for (int i = lo; i < hi; ++i)
        for (int j = lo; j < hi; ++j)
            for (int k = lo; k < hi; ++k) {
                const std::size_t c = g.index(i, j, k);
                for (int r = 1; r <= st.width; ++r) {
                    const double w = st.w[r - 1] * ih;
                    out(0, c) += w * (lf[g.index(i + r, j, k)] - lf[g.index(i - r, j, k)]);
                    out(1, c) += w * (lf[g.index(i, j + r, k)] - lf[g.index(i, j - r, k)]);
                    out(2, c) += w * (lf[g.index(i, j, k + r)] - lf[g.index(i, j, k - r)]);
                }
            }
    return out;
}

double spectral_norm(double xx, double yy, double zz, double xy, double xz, double yz) {
    Mat3 m;
    m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    Eigen::SelfAdjointEigenSolver<Mat3> es;
    es.computeDirect(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

CollisionAssembly assemble_collision(const DistributionState& s, const CollisionOptions& opt) {
    const auto& grid = s.grid;
    const std::size_t N = grid.size();
    CollisionAssembly out;
    out.a = Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, N);
    out.d = Eigen::Matrix3Xd::Zero(3, N);

    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < N; ++i)
        if (grid.interior(i, opt.margin()) && s.values[i] > 0) act.push_back(i);
    const std::size_t m = act.size();
    if (m < 2) return out;

    const Eigen::Matrix3Xd lg = log_gradient(s, opt);
    // structure of arrays over active nodes
    std::vector<double> px(m), py(m), pz(m), E(m), F(m), gx(m), gy(m), gz(m);
    for (std::size_t a = 0; a < m; ++a) {
        const Vec3 p = grid.node(act[a]);
        px[a] = p[0], py[a] = p[1], pz[a] = p[2];
        E[a] = energy(p);
        F[a] = s.values[act[a]];
        gx[a] = lg(0, act[a]), gy[a] = lg(1, act[a]), gz[a] = lg(2, act[a]);
    }

    // rows split so each chunk holds about the same number of pairs (i < j)
    std::vector<std::size_t> cut{0};
    {
        const double total = 0.5 * double(m) * double(m - 1);
        double acc = 0;
        for (std::size_t i = 0; i < m && int(cut.size()) < kChunks; ++i) {
            acc += double(m - 1 - i);
            if (acc >= total * double(cut.size()) / kChunks) cut.push_back(i + 1);
        }
        while (int(cut.size()) <= kChunks) cut.push_back(m);
        cut.back() = m;
    }

    // per chunk: 9 planes of length m (a xx yy zz xy xz yz, d x y z)
    std::vector<std::vector<double>> buf(kChunks);
    parallel_for(
        kChunks,
        [&](std::size_t c) {
            auto& B = buf[c];
            B.assign(9 * m, 0.0);
            double* const A0 = B.data();
            double *A1 = A0 + m, *A2 = A0 + 2 * m, *A3 = A0 + 3 * m, *A4 = A0 + 4 * m, *A5 = A0 + 5 * m;
            double *D0 = A0 + 6 * m, *D1 = A0 + 7 * m, *D2 = A0 + 8 * m;
            const double *X = px.data(), *Y = py.data(), *Z = pz.data(), *En = E.data(), *Fv = F.data();
            const double *GX = gx.data(), *GY = gy.data(), *GZ = gz.data();
            for (std::size_t i = cut[c]; i < cut[c + 1]; ++i) {
                const double pix = X[i], piy = Y[i], piz = Z[i], Ei = En[i], fi = Fv[i];
                const double gix = GX[i], giy = GY[i], giz = GZ[i];
                double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, t0 = 0, t1 = 0, t2 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3, s4, s5, t0, t1, t2)
                for (std::size_t j = i + 1; j < m; ++j) {
                    const double qx = X[j], qy = Y[j], qz = Z[j];
                    const double dx = qx - pix, dy = qy - piy, dz = qz - piz;
                    const double cx = piy * dz - piz * dy, cy = piz * dx - pix * dz, cz = pix * dy - piy * dx;
                    const double EE = Ei * En[j];
                    const double tm2 =
                        (dx * dx + dy * dy + dz * dz + cx * cx + cy * cy + cz * cz) / (EE + pix * qx + piy * qy + piz * qz + 1.0);
                    const double tt = (tm2 + 2.0) * tm2;
                    const double tm1 = tm2 + 1.0;
                    const double lam = tm1 * tm1 / (EE * tt * std::sqrt(tt));
                    const double l2 = lam * tm2;
                    // Phi = lam [tt I - d d^T + tm2 (p q^T + q p^T)]
                    const double p00 = lam * (tt - dx * dx) + 2 * l2 * pix * qx;
                    const double p11 = lam * (tt - dy * dy) + 2 * l2 * piy * qy;
                    const double p22 = lam * (tt - dz * dz) + 2 * l2 * piz * qz;
                    const double p01 = -lam * dx * dy + l2 * (pix * qy + qx * piy);
                    const double p02 = -lam * dx * dz + l2 * (pix * qz + qx * piz);
                    const double p12 = -lam * dy * dz + l2 * (piy * qz + qy * piz);
                    const double fj = Fv[j];
                    s0 += fj * p00, s1 += fj * p11, s2 += fj * p22;
                    s3 += fj * p01, s4 += fj * p02, s5 += fj * p12;
                    t0 += fj * (p00 * GX[j] + p01 * GY[j] + p02 * GZ[j]);
                    t1 += fj * (p01 * GX[j] + p11 * GY[j] + p12 * GZ[j]);
                    t2 += fj * (p02 * GX[j] + p12 * GY[j] + p22 * GZ[j]);
                    A0[j] += fi * p00, A1[j] += fi * p11, A2[j] += fi * p22;
                    A3[j] += fi * p01, A4[j] += fi * p02, A5[j] += fi * p12;
                    D0[j] += fi * (p00 * gix + p01 * giy + p02 * giz);
                    D1[j] += fi * (p01 * gix + p11 * giy + p12 * giz);
                    D2[j] += fi * (p02 * gix + p12 * giy + p22 * giz);
                }
                A0[i] += s0, A1[i] += s1, A2[i] += s2, A3[i] += s3, A4[i] += s4, A5[i] += s5;
                D0[i] += t0, D1[i] += t1, D2[i] += t2;
            }
        },
        opt.threads);

    const double v = grid.cell_volume();
    for (std::size_t a = 0; a < m; ++a) {
        double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
        for (int c = 0; c < kChunks; ++c)
            for (int r = 0; r < 9; ++r) acc[r] += buf[c][r * m + a];
        const std::size_t idx = act[a];
        for (int r = 0; r < 6; ++r) out.a(r, idx) = acc[r] * v;
        for (int r = 0; r < 3; ++r) out.d(r, idx) = acc[6 + r] * v;
        out.max_a = std::max(out.max_a, spectral_norm(out.a(0, idx), out.a(1, idx), out.a(2, idx), out.a(3, idx),
                                                      out.a(4, idx), out.a(5, idx)));
        const auto A = out.a.col(idx);
        const Vec3 g = lg.col(idx);
        const Vec3 vel(A[0] * g[0] + A[3] * g[1] + A[4] * g[2], A[3] * g[0] + A[1] * g[1] + A[5] * g[2],
                       A[4] * g[0] + A[5] * g[1] + A[2] * g[2]);
        out.max_v = std::max(out.max_v, (vel - out.d.col(idx)).norm());
    }
    return out;
}

double CollisionAssembly::step_bound(double cfl, double h) const {
    double b = std::numeric_limits<double>::infinity();
    if (max_a > 0) b = std::min(b, cfl * h * h / max_a);
    if (max_v > 0) b = std::min(b, cfl * h / max_v);
    return b;
}

Eigen::VectorXd collision_rhs(const DistributionState& s, const CollisionAssembly& c, const CollisionOptions& opt) {
    const auto& g = s.grid;
    const int n = g.n;
    const Stencil st = stencil(opt.stencil_order);
    const Eigen::Matrix3Xd lg = log_gradient(s, opt);
    Eigen::Matrix3Xd F = Eigen::Matrix3Xd::Zero(3, g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double f = s.values[i];
        if (f == 0.0 || !g.interior(i, st.width)) continue;
        const auto a = c.a.col(i);
        const Vec3 gl = lg.col(i);
        F(0, i) = f * (a[0] * gl[0] + a[3] * gl[1] + a[4] * gl[2] - c.d(0, i));
        F(1, i) = f * (a[3] * gl[0] + a[1] * gl[1] + a[5] * gl[2] - c.d(1, i));
        F(2, i) = f * (a[4] * gl[0] + a[5] * gl[1] + a[2] * gl[2] - c.d(2, i));
    }
    // Q = -D^T F, the exact adjoint of D on interior nodes
    Eigen::VectorXd Q = Eigen::VectorXd::Zero(g.size());
    const double ih = 1.0 / g.h();
    const int lo = st.width, hi = n - st.width;
    for (int i = lo; i < hi; ++i)
        for (int j = lo; j < hi; ++j)
            for (int k = lo; k < hi; ++k) {
                const std::size_t p = g.index(i, j, k);
                for (int r = 1; r <= st.width; ++r) {
                    const double w = st.w[r - 1] * ih;
                    const double fx = w * F(0, p), fy = w * F(1, p), fz = w * F(2, p);
                    Q[g.index(i - r, j, k)] += fx;
                    Q[g.index(i + r, j, k)] -= fx;
                    Q[g.index(i, j - r, k)] += fy;
                    Q[g.index(i, j + r, k)] -= fy;
                    Q[g.index(i, j, k - r)] += fz;
                    Q[g.index(i, j, k + r)] -= fz;
                }
            }
    return Q;
}

Eigen::VectorXd collision_operator(const DistributionState& s, const CollisionOptions& opt) {
    return collision_rhs(s, assemble_collision(s, opt), opt);
}

double HomogeneousResult::relative_drift_mass() const {
    double m0 = steps.front().moments.mass, worst = 0;
    if (m0 == 0) return 0;
    for (const auto& r : steps) worst = std::max(worst, std::abs(r.moments.mass - m0) / m0);
    return worst;
}

double HomogeneousResult::relative_drift_energy() const {
    double e0 = steps.front().moments.energy, worst = 0;
    if (e0 == 0) return 0;
    for (const auto& r : steps) worst = std::max(worst, std::abs(r.moments.energy - e0) / e0);
    return worst;
}

namespace {

// negative entries set to zero; returns the mass added
double clip(DistributionState& s) {
    double added = 0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
        if (s.values[i] < 0) {
            added -= s.values[i];
            s.values[i] = 0;
        }
    return added * s.grid.cell_volume();
}

}  // namespace

HomogeneousResult solve_homogeneous(const DistributionState& f0, double T, const HomogeneousConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    f0.validate();
    if (!(T >= f0.time)) throw ConfigError("solve_homogeneous: T before the initial time");
    if (cfg.lag < 1) throw ConfigError("solve_homogeneous: lag must be >= 1");
    if (!(cfg.cfl > 0)) throw ConfigError("solve_homogeneous: cfl must be positive");

    std::vector<double> stops;
    for (double t : cfg.snapshot_times)
        if (t > f0.time && t < T) stops.push_back(t);
    stops.push_back(T);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    HomogeneousResult res;
    DistributionState f = f0;
    res.snapshots.push_back(f);
    StepRecord r0;
    r0.time = f.time;
    r0.moments = f.moments();
    res.steps.push_back(r0);

    const double h = f.grid.h();
    const double vol = f.grid.cell_volume();
    CollisionAssembly coeffs;
    std::size_t step = 0;
    for (double stop : stops) {
        while (f.time < stop) {
            if (step >= cfg.max_steps) throw ConvergenceError("solve_homogeneous: max_steps exceeded");
            StepRecord rec;
            const bool refresh = step % std::size_t(cfg.lag) == 0;
            if (refresh) {
                CollisionAssembly fresh = assemble_collision(f, cfg.collision);
                if (step > 0 && cfg.lag > 1) {
                    const Eigen::VectorXd q_old = collision_rhs(f, coeffs, cfg.collision);
                    const Eigen::VectorXd q_new = collision_rhs(f, fresh, cfg.collision);
                    const double s = q_new.cwiseAbs().maxCoeff();
                    if (s > 0) res.lag_error = std::max(res.lag_error, (q_old - q_new).cwiseAbs().maxCoeff() / s);
                }
                coeffs = std::move(fresh);
                rec.refreshed = true;
            }
            const double bound = coeffs.step_bound(cfg.cfl, h);
            if (cfg.dt && *cfg.dt > bound * (1 + 1e-12)) {
                std::ostringstream os;
                os << "solve_homogeneous: dt " << *cfg.dt << " exceeds CFL bound " << bound;
                throw CflError(os.str());
            }
            double dt = cfg.dt ? *cfg.dt : bound;
            if (f.time + dt >= stop || stop - (f.time + dt) < 1e-12 * dt) dt = stop - f.time;

            const double mass = f.values.sum() * vol;
            // Heun
            const Eigen::VectorXd k1 = collision_rhs(f, coeffs, cfg.collision);
            DistributionState mid = f;
            mid.values += dt * k1;
            double clipped = clip(mid);
            Eigen::VectorXd k2;
            if (cfg.lag == 1) {
                const CollisionAssembly cm = assemble_collision(mid, cfg.collision);
                k2 = collision_rhs(mid, cm, cfg.collision);
            } else {
                k2 = collision_rhs(mid, coeffs, cfg.collision);
            }
            f.values += 0.5 * dt * (k1 + k2);
            clipped += clip(f);
            f.time = stop - f.time - dt <= 0 ? stop : f.time + dt;
            if (clipped > cfg.clip_budget * mass) {
                std::ostringstream os;
                os << "solve_homogeneous: clipped mass " << clipped << " exceeds budget at t = " << f.time;
                throw NegativityError(os.str());
            }
            rec.time = f.time;
            rec.dt = dt;
            rec.moments = f.moments();
            rec.clipped = clipped;
            rec.max_a = coeffs.max_a;
            res.max_entropy_increase =
                std::max(res.max_entropy_increase, rec.moments.entropy - res.steps.back().moments.entropy);
            res.total_clipped += clipped;
            res.steps.push_back(rec);
            ++step;
        }
        res.snapshots.push_back(f);
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

// ---------------------------------------------------------------------------
// barriers

BarrierSpec BarrierSpec::polynomial(double k, double M_k, double beta) {
    if (!(k > 0) || !(M_k > 0)) throw ConfigError("BarrierSpec: k and M_k must be positive");
    return {BarrierKind::polynomial, k, M_k, beta};
}

BarrierSpec BarrierSpec::exponential(double sigma, double N, double gamma) {
    if (!(sigma > 0) || !(N > 0)) throw ConfigError("BarrierSpec: sigma and N must be positive");
    return {BarrierKind::exponential, sigma, N, gamma};
}

double BarrierSpec::operator()(double t, const Vec3& p) const {
    const double e = energy(p);
    const double prof = kind == BarrierKind::polynomial ? std::pow(e, -k) : std::exp(-k * e);
    return M * std::exp(rate * t) * prof;
}

Vec3 BarrierSpec::grad(double t, const Vec3& p) const {
    const double e = energy(p);
    const double g = (*this)(t, p);
    if (kind == BarrierKind::polynomial) return (-k * g / (e * e)) * p;
    return (-k * g / e) * p;
}

Mat3 BarrierSpec::hess(double t, const Vec3& p) const {
    const double e = energy(p), e2 = e * e;
    const double g = (*this)(t, p);
    const Mat3 I = Mat3::Identity();
    const Mat3 pp = p * p.transpose();
    if (kind == BarrierKind::polynomial) return (-k * g / e2) * (I - ((k + 2) / e2) * pp);
    return g * ((k * k / e2) * pp - k * (I / e - pp / (e2 * e)));
}

std::string BarrierSpec::describe() const {
    std::ostringstream os;
    if (kind == BarrierKind::polynomial)
        os << "polynomial k=" << k << " M_k=" << M << " beta=" << rate;
    else
        os << "exponential sigma=" << k << " N=" << M << " gamma=" << rate;
    return os.str();
}

double barrier_constant(const DistributionState& f0, BarrierKind kind, double k) {
    double M = 0;
    for (std::size_t i = 0; i < f0.grid.size(); ++i) {
        const double e = energy(f0.grid.node(i));
        const double w = kind == BarrierKind::polynomial ? std::pow(e, k) : std::exp(k * e);
        M = std::max(M, w * f0.values[i]);
    }
    return M;
}

namespace {

double nuclear_norm(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> es;
    es.computeDirect(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

// |D^2 g| is the nuclear norm, so tr(a D^2 g) <= |a|_2 |D^2 g|.
DerivativeBounds barrier_derivative_bounds(const BarrierSpec& g, const std::vector<Vec3>& samples) {
    DerivativeBounds b;
    for (const Vec3& p : samples) {
        const double w = g.kind == BarrierKind::polynomial ? energy(p) : 1.0;
        const double v = g(0, p);
        b.grad = std::max(b.grad, g.grad(0, p).norm() * w / v);
        b.hess = std::max(b.hess, nuclear_norm(g.hess(0, p)) * w * w / v);
    }
    return b;
}

CoefficientBounds coefficient_bounds(const DistributionSpec& f, BarrierKind kind, const std::vector<Vec3>& samples,
                                     const QuadratureConfig& cfg, unsigned threads) {
    const auto ev = coefficient_field(f, samples, cfg, threads);
    CoefficientBounds c;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double e = energy(samples[i]);
        const double wa = kind == BarrierKind::polynomial ? e : 1.0;
        const double wb = kind == BarrierKind::polynomial ? std::cbrt(e) : 1.0;
        Eigen::SelfAdjointEigenSolver<Mat3> es;
        es.computeDirect(ev[i].a, Eigen::EigenvaluesOnly);
        c.C_a = std::max(c.C_a, es.eigenvalues().cwiseAbs().maxCoeff() / wa);
        c.C_b = std::max(c.C_b, ev[i].b.norm() / wb);
        c.C_c = std::max(c.C_c, ev[i].c);
    }
    return c;
}

double assembled_rate(const CoefficientBounds& c, const DerivativeBounds& d, double safety) {
    return safety * (c.C_a * d.hess + c.C_b * d.grad + c.C_c);
}

BarrierReport barrier_check(const std::vector<DistributionState>& traj, const BarrierSpec& g,
                            const std::optional<DistributionSpec>& f_ref, const BarrierConfig& cfg) {
    if (traj.empty()) throw PreconditionError("barrier_check: empty trajectory");
    BarrierReport rep;
    rep.barrier = g;
    const double slack = 1 + cfg.domination_slack;
    {
        const auto& s0 = traj.front();
        for (std::size_t i = 0; i < s0.grid.size(); ++i)
            if (s0.values[i] > slack * g(s0.time, s0.grid.node(i)))
                throw PreconditionError("barrier_check: barrier does not dominate the initial state");
    }
    std::vector<Vec3> nodes;
    for (std::size_t i = 0; i < traj.front().grid.size(); ++i) nodes.push_back(traj.front().grid.node(i));
    rep.deriv = barrier_derivative_bounds(g, nodes);

    Rng rng(cfg.seed, 0x6261727269657231ULL);
    const double P = traj.front().grid.extent;
    std::vector<Vec3> samples;
    for (int i = 0; i < cfg.residual_samples; ++i)
        samples.push_back({rng.uniform(-P, P), rng.uniform(-P, P), rng.uniform(-P, P)});

    rep.min_residual = std::numeric_limits<double>::infinity();
    for (const auto& s : traj) {
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
            const double r = s.values[i] / g(s.time, s.grid.node(i));
            if (r > rep.worst_ratio) {
                rep.worst_ratio = r;
                rep.worst_time = s.time;
                rep.worst_node = s.grid.node(i);
            }
        }
        const DistributionSpec f = f_ref ? *f_ref : grid_distribution(s);
        const auto ev = coefficient_field(f, samples, cfg.quadrature, cfg.threads);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const Vec3& p = samples[i];
            const double gv = g(s.time, p);
            const double Lg = (ev[i].a.cwiseProduct(g.hess(s.time, p))).sum() + ev[i].b.dot(g.grad(s.time, p)) +
                              ev[i].c * gv;
            rep.min_residual = std::min(rep.min_residual, (g.dt(s.time, p) - Lg) / gv);
        }
        ++rep.snapshots_checked;
    }
    rep.dominated = rep.worst_ratio <= slack;
    rep.supersolution = rep.min_residual >= -cfg.residual_tol;
    return rep;
}

// ---------------------------------------------------------------------------
// 1+1D relativistic Fokker-Planck

double RfpState::mass() const { return u.sum() * grid.hx() * grid.hp(); }

namespace {

struct RfpOperator {
    RfpGrid g;
    double diffusion, beta;
    Eigen::VectorXd v, up, dn;  // velocity; interface couplings j+1/2 toward j+1 and toward j

    RfpOperator(const RfpGrid& grid, double diff, double b) : g(grid), diffusion(diff), beta(b) {
        v.resize(g.np);
        for (int j = 0; j < g.np; ++j) v[j] = g.p(j) / std::sqrt(1 + g.p(j) * g.p(j));
        // F_{j+1/2} = w (u_{j+1} sqrt(M_j/M_{j+1}) - u_j sqrt(M_{j+1}/M_j)), M = e^{-beta <p>}
        up = Eigen::VectorXd::Zero(g.np);
        dn = Eigen::VectorXd::Zero(g.np);
        const double hp = g.hp();
        for (int j = 0; j + 1 < g.np; ++j) {
            const double pm = -g.extent + (j + 1) * hp;
            const double w = diffusion * std::sqrt(1 + pm * pm) / hp;
            const double r = std::exp(0.5 * beta * (std::sqrt(1 + g.p(j + 1) * g.p(j + 1)) - std::sqrt(1 + g.p(j) * g.p(j))));
            up[j] = w * r;        // coefficient of u_{j+1}
            dn[j] = w / r;        // coefficient of u_j
        }
    }

    double max_rate() const {
        double worst = 0;
        for (int j = 0; j < g.np; ++j) {
            double out = std::abs(v[j]) / g.hx();
            if (j + 1 < g.np) out += dn[j] / g.hp();
            if (j > 0) out += up[j - 1] / g.hp();
            worst = std::max(worst, out);
        }
        return worst;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& u) const {
        Eigen::MatrixXd du = Eigen::MatrixXd::Zero(g.nx, g.np);
        const double hx = g.hx(), hp = g.hp();
        for (int j = 0; j < g.np; ++j) {
            const double vj = v[j];
            for (int i = 0; i < g.nx; ++i) {
                if (vj > 0) {
                    const int im = (i + g.nx - 1) % g.nx;
                    du(i, j) -= vj * (u(i, j) - u(im, j)) / hx;
                } else {
                    const int ip = (i + 1) % g.nx;
                    du(i, j) -= vj * (u(ip, j) - u(i, j)) / hx;
                }
            }
        }
        for (int j = 0; j + 1 < g.np; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double F = (up[j] * u(i, j + 1) - dn[j] * u(i, j)) / hp;
                du(i, j) += F;
                du(i, j + 1) -= F;
            }
        return du;
    }
};

Eigen::MatrixXd steady_profile(const RfpGrid& g, double beta, double mass) {
    Eigen::MatrixXd M(g.nx, g.np);
    for (int j = 0; j < g.np; ++j) M.col(j).setConstant(std::exp(-beta * (std::sqrt(1 + g.p(j) * g.p(j)) - 1)));
    return M * (mass / (M.sum() * g.hx() * g.hp()));
}

}  // namespace

Eigen::MatrixXd rfp_steady(const RfpState& s, double beta) { return steady_profile(s.grid, beta, s.mass()); }

RfpResult solve_rfp_1d(const RfpState& u0, double T, const RfpConfig& cfg) {
    const auto& g = u0.grid;
    if (u0.u.rows() != g.nx || u0.u.cols() != g.np) throw ConfigError("solve_rfp_1d: state shape mismatch");
    if (g.nx < 2 || g.np < 2) throw ConfigError("solve_rfp_1d: grid too small");
    if ((u0.u.array() < 0).any() || !u0.u.allFinite()) throw DomainError("solve_rfp_1d: u0 must be finite and nonnegative");
    if (cfg.friction < 0 || cfg.diffusion < 0) throw ConfigError("solve_rfp_1d: friction and diffusion must be nonnegative");

    const RfpOperator op(g, cfg.diffusion, cfg.friction);
    const double bound = 1.0 / op.max_rate();
    if (cfg.dt && *cfg.dt > bound * (1 + 1e-12)) {
        std::ostringstream os;
        os << "solve_rfp_1d: dt " << *cfg.dt << " exceeds CFL bound " << bound;
        throw CflError(os.str());
    }
    const double dt0 = cfg.dt ? *cfg.dt : cfg.cfl * bound;

    std::vector<double> stops;
    for (double t : cfg.snapshot_times)
        if (t > u0.time && t < T) stops.push_back(t);
    stops.push_back(T);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    RfpResult res;
    res.dt = dt0;
    RfpState s = u0;
    const double m0 = s.mass();
    const Eigen::MatrixXd Minf = steady_profile(g, cfg.friction, m0);
    auto record = [&] {
        res.times.push_back(s.time);
        res.mass.push_back(s.mass());
        res.l1_to_steady.push_back((s.u - Minf).cwiseAbs().sum() * g.hx() * g.hp());
    };
    res.snapshots.push_back(s);
    record();
    for (double stop : stops) {
        while (s.time < stop) {
            double dt = dt0;
            if (s.time + dt >= stop || stop - (s.time + dt) < 1e-12 * dt) dt = stop - s.time;
            const double before = s.mass();
            s.u += dt * op.apply(s.u);
            s.time = stop - s.time - dt <= 0 ? stop : s.time + dt;
            if (m0 > 0) res.max_step_mass_change = std::max(res.max_step_mass_change, std::abs(s.mass() - before) / m0);
            record();
        }
        res.snapshots.push_back(s);
    }
    return res;
}

double rfp_front(const RfpState& s, int j, double level) {
    const auto col = s.u.col(j);
    const double thr = level * col.maxCoeff();
    const auto& g = s.grid;
    for (int i = g.nx - 1; i > 0; --i)
        if (col[i - 1] >= thr && col[i] < thr) {
            const double w = (col[i - 1] - thr) / (col[i - 1] - col[i]);
            return g.x(i - 1) + w * g.hx();
        }
    return g.x(g.nx - 1);
}

}  // namespace relkin
