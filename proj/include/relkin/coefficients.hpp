#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relkin/kernel.hpp"
#include "relkin/quadrature.hpp"

namespace relkin {

enum class DecayKind { polynomial, exponential };

// Momentum density with declared decay: f <= M <p>^{-k} (polynomial) or f <= N e^{-sigma <p>} (exponential).
struct DistributionSpec {
    std::function<double(const Vec3&)> density;
    std::function<Vec3(const Vec3&)> gradient;  // optional; finite differences otherwise
    DecayKind decay_kind = DecayKind::exponential;
    double decay_rate = 1.0;      // k or sigma
    double decay_constant = 1.0;  // M_k or N
    std::optional<double> support_hint;
    Vec3 center = Vec3::Zero();   // where the mass sits; used to orient angular rules
    std::string name = "f";

    double operator()(const Vec3& p) const { return density(p); }
    Vec3 grad(const Vec3& p) const;
    bool is_zero = false;
};

DistributionSpec zero_distribution();
// c1 exp(-c2 <p>)
DistributionSpec juttner(double c1 = 1.0, double c2 = 1.0);
struct GaussianBump {
    Vec3 center;
    Mat3 inv_cov;  // exp(-(p-c)^T inv_cov (p-c) / 2)
    double weight;
};
DistributionSpec gaussian_mixture(const std::vector<GaussianBump>& bumps);
// Smoothed indicator of the ball of radius R: 1 / (1 + exp((|p|-R)/eps)).
DistributionSpec smooth_ball(double R, double eps);

// Probe the declared decay on n points; throws ConfigError if f <= 1.05 * bound fails anywhere.
void verify_decay(const DistributionSpec& f, int probes = 1000, std::uint64_t seed = 1);

struct QuadratureConfig {
    int radial_nodes = 10;          // Gauss points per radial panel
    double first_panel = 1.0 / 16;  // innermost panel width, doubling outward
    double max_panel = 1.0;         // panel width cap in the core region
    double core_extent = 16.0;      // uniform-width region beyond |p - center|
    int theta_levels = 5;           // polar panels graded toward the axis
    int theta_nodes = 8;            // per polar panel
    int phi_nodes = 24;
    double tail_tol = 1e-15;        // relative tail mass bound for truncation
    double growth_exponent = 1.0;   // kernel growth <q>^g folded into the tail bound
    double max_radius = 1e4;
    double fd_rel_step = 1e-3;      // h = fd_rel_step (1 + |p|)
    bool error_estimate = true;     // also evaluate a coarser rule and report the gap
    double rel_tol = 1e-3;          // error estimate target, relative to |a| + |value|
    int max_refinements = 2;        // refinements tried before ConvergenceError

    QuadratureConfig coarser() const;
    QuadratureConfig refined() const;
};

// Refinement level: 0 is a deliberately coarse rule, each level doubles every resolution parameter.
QuadratureConfig quadrature_level(int level);

struct CoefficientEval {
    Mat3 a = Mat3::Zero();
    Vec3 b = Vec3::Zero();
    Vec3 B = Vec3::Zero();
    double c = 0.0;
    Vec3 d = Vec3::Zero();  // int Phi grad f, only when requested
    double err_a = 0, err_b = 0, err_B = 0, err_c = 0, err_d = 0;
};

// Spherical rule centered at an anchor momentum; reusable at nearby points so finite differences
// in p see one fixed smooth rule.
class CoefficientQuadrature {
public:
    CoefficientQuadrature(const DistributionSpec& f, const Vec3& anchor, const QuadratureConfig& cfg);
    CoefficientEval eval(const Vec3& p, bool with_d = false) const;
    std::size_t node_count() const { return radial_.size() * sphere_.dir.size(); }
    double radius() const { return radius_; }

private:
    DistributionSpec f_;
    QuadratureConfig cfg_;
    Rule1D radial_;
    SphereRule sphere_;
    Mat3 frame_;
    double radius_;
};

// Truncation radius measured from the center of f.
double tail_radius(const DistributionSpec& f, const QuadratureConfig& cfg);

// With cfg.error_estimate the err_* fields hold the gap to the next coarser rule, and the rule is
// refined until they meet rel_tol (ConvergenceError otherwise).
CoefficientEval coefficients(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg = {},
                             bool with_d = false);
// Parallel map over points; threads = 0 uses RELKIN_THREADS or the hardware count.
std::vector<CoefficientEval> coefficient_field(const DistributionSpec& f, const std::vector<Vec3>& points,
                                               const QuadratureConfig& cfg = {}, unsigned threads = 0);

// The bundle on a momentum point set, at a fixed (t, x) for bookkeeping.
struct CoefficientField {
    std::vector<Vec3> points;
    std::vector<CoefficientEval> values;
    double time = 0;
    Vec3 x = Vec3::Zero();

    std::size_t size() const { return points.size(); }
};
CoefficientField evaluate_field(const DistributionSpec& f, std::vector<Vec3> points, const QuadratureConfig& cfg = {},
                                unsigned threads = 0);

Mat3 coeff_a(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg = {});
Vec3 coeff_b(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg = {});
Vec3 coeff_B(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg = {});
double coeff_c(const DistributionSpec& f, const Vec3& p, const QuadratureConfig& cfg = {});

// g and its derivatives; missing derivatives fall back to 4th-order central differences.
struct TestFunction {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;
    std::function<Mat3(const Vec3&)> hessian;
    double fd_rel_step = 1e-3;

    double operator()(const Vec3& p) const { return value(p); }
    Vec3 grad(const Vec3& p) const;
    Mat3 hess(const Vec3& p) const;
};

TestFunction as_test_function(const DistributionSpec& g);

enum class QForm { direct, nondivergence, divergence };
const char* to_string(QForm f);

double q_rl(const DistributionSpec& f, const TestFunction& g, const Vec3& p, QForm form,
            const QuadratureConfig& cfg = {});

struct QrlAllForms {
    double direct = 0, nondivergence = 0, divergence = 0;
    double scale = 0;  // sum of magnitudes of the nondivergence terms

    // largest pairwise gap relative to scale
    double mismatch() const;
};
// All three forms sharing one stencil of quadratures.
QrlAllForms q_rl_all(const DistributionSpec& f, const TestFunction& g, const Vec3& p, const QuadratureConfig& cfg = {});

struct Moments {
    double mass = 0, energy = 0;
    Vec3 momentum = Vec3::Zero();
    double entropy = 0;      // int f log f
    double entropy_abs = 0;  // int f |log f|
    double err_mass = 0, err_energy = 0;
};

Moments macroscopic_moments(const DistributionSpec& f, const QuadratureConfig& cfg = {});

}  // namespace relkin
