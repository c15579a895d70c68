#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relkin/coefficients.hpp"
#include "relkin/types.hpp"

namespace relkin {

struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CflError : StabilityError {
    using StabilityError::StabilityError;
};
struct NegativityError : StabilityError {
    using StabilityError::StabilityError;
};
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Cell-centered nodes -P + (i + 1/2) h, h = 2P/n, row-major with the last axis fastest.
struct MomentumGrid3D {
    double extent = 8.0;
    int n = 32;

    MomentumGrid3D() = default;
    MomentumGrid3D(double P, int n_);

    double h() const { return 2.0 * extent / n; }
    double cell_volume() const { const double s = h(); return s * s * s; }
    std::size_t size() const { return std::size_t(n) * n * n; }
    double coord(int i) const { return -extent + (i + 0.5) * h(); }
    std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n + j) * n + k; }
    Vec3 node(std::size_t idx) const;
    Vec3 node(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
    // at least margin nodes away from every face
    bool interior(std::size_t idx, int margin = 1) const;
};

struct GridMoments {
    double mass = 0, energy = 0;
    Vec3 momentum = Vec3::Zero();
    double entropy = 0;  // sum f log f h^3, 0 log 0 = 0
};

struct DistributionState {
    MomentumGrid3D grid;
    Eigen::VectorXd values;
    double time = 0;

    static DistributionState sample(const MomentumGrid3D& g, const std::function<double(const Vec3&)>& f,
                                    double t = 0);
    GridMoments moments() const;
    // rescale so the grid mass is one
    DistributionState& normalize();
    void validate() const;
};

// Trilinear interpolation of the nodal values, zero outside the node hull.
DistributionSpec grid_distribution(const DistributionState& s);

struct CollisionOptions {
    int stencil_order = 4;  // central difference D: 2 or 4
    double log_floor = 1e-300;
    unsigned threads = 0;

    int margin() const { return stencil_order / 2; }
};

struct HomogeneousConfig {
    double cfl = 0.25;                 // see CollisionAssembly::step_bound
    std::optional<double> dt;          // fixed step; CflError if above the bound
    int lag = 1;                       // coefficients recomputed every lag steps
    double clip_budget = 1e-8;         // clipped mass per step, relative to mass
    std::vector<double> snapshot_times;  // always includes T
    std::size_t max_steps = 1000000;
    CollisionOptions collision;
};

struct StepRecord {
    double time = 0, dt = 0;
    GridMoments moments;
    double clipped = 0;     // mass added by clipping in this step
    double max_a = 0;       // spectral norm, max over nodes
    bool refreshed = false;
};

struct HomogeneousResult {
    std::vector<DistributionState> snapshots;
    std::vector<StepRecord> steps;  // steps[0] describes the initial state
    double lag_error = 0;           // max relative flux change at refresh, 0 when lag = 1
    double max_entropy_increase = 0;  // max over steps of H_{n+1} - H_n
    double total_clipped = 0;
    double wall_seconds = 0;

    double relative_drift_mass() const;
    double relative_drift_energy() const;
};

// Landau collision fluxes on the grid in weak (pair-symmetric) form:
// F_p = f_p sum_q f_q Phi(p,q) (D log f_p - D log f_q) h^3 over interior nodes, Q = -D^T F.
// Interior means D is defined, i.e. stencil_order/2 nodes from the faces.
struct CollisionAssembly {
    Eigen::Matrix<double, 6, Eigen::Dynamic> a;  // xx yy zz xy xz yz per node
    Eigen::Matrix3Xd d;                           // sum f_q Phi D log f_q h^3
    double max_a = 0;                             // spectral norm
    double max_v = 0;                             // |a D log f - d|, the flux velocity F/f

    // explicit step bound: cfl min(h^2 / max_a, h / max_v)
    double step_bound(double cfl, double h) const;
};

CollisionAssembly assemble_collision(const DistributionState& s, const CollisionOptions& opt = {});
// Q_RL(f, f) at every node with the given (possibly lagged) assembly.
Eigen::VectorXd collision_rhs(const DistributionState& s, const CollisionAssembly& c, const CollisionOptions& opt = {});
Eigen::VectorXd collision_operator(const DistributionState& s, const CollisionOptions& opt = {});

HomogeneousResult solve_homogeneous(const DistributionState& f0, double T, const HomogeneousConfig& cfg = {});

// ---------------------------------------------------------------------------
// barriers

enum class BarrierKind { polynomial, exponential };

struct BarrierSpec {
    BarrierKind kind = BarrierKind::polynomial;
    double k = 6;       // polynomial exponent, or sigma for the exponential kind
    double M = 1;       // M_k or N
    double rate = 0;    // beta (polynomial) or gamma (exponential)

    static BarrierSpec polynomial(double k, double M_k, double beta);
    static BarrierSpec exponential(double sigma, double N, double gamma);

    double operator()(double t, const Vec3& p) const;
    Vec3 grad(double t, const Vec3& p) const;
    Mat3 hess(double t, const Vec3& p) const;
    double dt(double t, const Vec3& p) const { return rate * (*this)(t, p); }
    std::string describe() const;
};

// Smallest M with the barrier's profile dominating f0 on the grid.
double barrier_constant(const DistributionState& f0, BarrierKind kind, double k_or_sigma);

struct DerivativeBounds {
    double grad = 0;  // sup |grad g| w(p) / g
    double hess = 0;  // sup |D^2 g| w(p)^2 / g
};
// w(p) = <p> for the polynomial kind and 1 for the exponential kind.
DerivativeBounds barrier_derivative_bounds(const BarrierSpec& g, const std::vector<Vec3>& samples);

// Empirical constants with a <= C_a w_a(p), |b| <= C_b w_b(p), c <= C_c on samples.
struct CoefficientBounds {
    double C_a = 0, C_b = 0, C_c = 0;
};
CoefficientBounds coefficient_bounds(const DistributionSpec& f, BarrierKind kind, const std::vector<Vec3>& samples,
                                     const QuadratureConfig& cfg, unsigned threads = 0);
// 2 (C_a K2 + C_b K1 + C_c)
double assembled_rate(const CoefficientBounds& c, const DerivativeBounds& d, double safety = 2.0);

struct BarrierConfig {
    double domination_slack = 1e-12;  // relative
    double residual_tol = 1e-6;       // relative to g
    int residual_samples = 64;
    std::uint64_t seed = 1;
    QuadratureConfig quadrature = quadrature_level(2);
    unsigned threads = 0;
};

struct BarrierReport {
    BarrierSpec barrier;
    bool dominated = true;
    double worst_ratio = 0;   // max f / g over nodes and snapshots
    double worst_time = 0;
    Vec3 worst_node = Vec3::Zero();
    DerivativeBounds deriv;
    double min_residual = 0;  // min over samples of (dt g - L g) / g
    bool supersolution = true;
    int snapshots_checked = 0;

    bool passed() const { return dominated && supersolution; }
};

// f_reference supplies a^f, b^f, c^f for the supersolution residual; when empty the snapshots are
// interpolated.
BarrierReport barrier_check(const std::vector<DistributionState>& trajectory, const BarrierSpec& barrier,
                            const std::optional<DistributionSpec>& f_reference, const BarrierConfig& cfg = {});

// ---------------------------------------------------------------------------
// 1+1D relativistic Fokker-Planck, periodic in x, zero flux at |p| = P

struct RfpGrid {
    double length = 2.0;  // x in [-L/2, L/2)
    int nx = 64;
    double extent = 8.0;  // p in [-P, P]
    int np = 64;

    double hx() const { return length / nx; }
    double hp() const { return 2.0 * extent / np; }
    double x(int i) const { return -0.5 * length + (i + 0.5) * hx(); }
    double p(int j) const { return -extent + (j + 0.5) * hp(); }
};

struct RfpConfig {
    double friction = 0.0;   // beta
    double diffusion = 1.0;  // scales the momentum operator; 0 leaves pure transport
    double cfl = 0.9;
    std::optional<double> dt;
    std::vector<double> snapshot_times;
};

struct RfpState {
    RfpGrid grid;
    Eigen::MatrixXd u;  // nx x np
    double time = 0;

    double mass() const;
};

struct RfpResult {
    std::vector<RfpState> snapshots;
    std::vector<double> times, mass, l1_to_steady;
    double max_step_mass_change = 0;  // relative
    double dt = 0;
};

// Discrete steady profile with the mass of u: x-independent, proportional to e^{-beta <p>}.
Eigen::MatrixXd rfp_steady(const RfpState& u, double beta);
RfpResult solve_rfp_1d(const RfpState& u0, double T, const RfpConfig& cfg = {});
// Rightmost x where the p-slice j first drops below level * plateau, linearly interpolated.
double rfp_front(const RfpState& s, int j, double level);

}  // namespace relkin
