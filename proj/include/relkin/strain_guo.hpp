#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "relkin/quadrature.hpp"
#include "relkin/types.hpp"

namespace relkin {

struct MultiIndex {
    std::array<int, 3> b{0, 0, 0};

    int order() const { return b[0] + b[1] + b[2]; }
    bool operator<(const MultiIndex& o) const { return b < o.b; }
    bool operator==(const MultiIndex& o) const { return b == o.b; }
    MultiIndex operator+(const MultiIndex& o) const { return {{b[0] + o.b[0], b[1] + o.b[1], b[2] + o.b[2]}}; }
    bool leq(const MultiIndex& o) const { return b[0] <= o.b[0] && b[1] <= o.b[1] && b[2] <= o.b[2]; }
    static MultiIndex unit(int i) {
        MultiIndex m;
        m.b[i] = 1;
        return m;
    }
    std::string str() const;
};

using PairFunction = std::function<double(const Vec3& p, const Vec3& q)>;

// Theta_beta F by nested central differences; index-1 factors innermost. Each factor is the derivative
// along (e_i, <q>/<p> e_i) with the ratio taken at the point where that factor is evaluated.
// fd_order is 2 or 4. Throws DomainError for |beta| > 3.
double theta_apply(const MultiIndex& beta, const PairFunction& F, const Vec3& p, const Vec3& q, double h,
                   int fd_order = 4);

// c <p>^a <q>^b prod p_i^{k_i} prod q_i^{l_i}
struct Monomial {
    int ep = 0, eq = 0;
    std::array<int, 3> pk{0, 0, 0}, qk{0, 0, 0};
    bool operator<(const Monomial& o) const {
        return std::tie(ep, eq, pk, qk) < std::tie(o.ep, o.eq, o.pk, o.qk);
    }
};

// Finite sum of monomials; closed under d/dp_i, d/dq_i and products, so the table is exact.
class PhiExpr {
public:
    PhiExpr() = default;
    static PhiExpr constant(double c);
    double operator()(const Vec3& p, const Vec3& q) const;
    PhiExpr dp(int i) const;
    PhiExpr dq(int i) const;
    PhiExpr times(const Monomial& m, double c) const;
    PhiExpr& operator+=(const PhiExpr& o);
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::map<Monomial, double>& terms() const { return terms_; }

private:
    void add(const Monomial& m, double c);
    std::map<Monomial, double> terms_;
};

struct PhiKey {
    MultiIndex b1, b2, b3;
    bool operator<(const PhiKey& o) const { return std::tie(b1, b2, b3) < std::tie(o.b1, o.b2, o.b3); }
};

struct PhiCoefficientTable {
    MultiIndex beta;
    std::map<PhiKey, PhiExpr> entries;

    double operator()(const PhiKey& k, const Vec3& p, const Vec3& q) const;
    // entries that survive when mu does not depend on p
    PhiCoefficientTable q_only() const;
};

// The table for |beta| = 0 is {(0,0,0): 1}. One step of the recursion S1..S4 along e_m.
PhiCoefficientTable phi_step(const PhiCoefficientTable& t, int m);
// Built from the empty index, adding e_1 factors, then e_2, then e_3. |beta| <= 3.
PhiCoefficientTable phi_table(const MultiIndex& beta);

// Worst ratio |d_q^nu1 d_p^nu2 phi| / (<q>^{|b2|-|nu1|} <p>^{|b1|+|b3|-|beta|-|nu2|}) over all entries and
// all |nu1| + |nu2| <= max_nu.
struct PhiBoundReport {
    double worst_ratio = 0.0;
    PhiKey worst_key;
    std::size_t samples = 0;
};
PhiBoundReport phi_bound_report(const PhiCoefficientTable& t, std::size_t samples, double radius, int max_nu,
                                std::uint64_t seed);

// mu as a function of (p, q) with its mixed derivatives d_q^{b2} d_p^{b3}; missing derivatives fall back
// to nested central differences.
struct PairTestFunction {
    PairFunction value;
    std::function<double(const MultiIndex& b2, const MultiIndex& b3, const Vec3& p, const Vec3& q)> derivative;
    Vec3 center = Vec3::Zero();  // where mu is concentrated in q
    double reach = 8.0;          // q-radius beyond which mu is negligible

    double deriv(const MultiIndex& b2, const MultiIndex& b3, const Vec3& p, const Vec3& q, double h) const;
};

struct IbpConfig {
    double fd_step = 1e-3;
    int fd_order = 4;
    int radial_nodes = 12;
    double panel = 0.25;
    std::vector<double> extra_breaks;  // radii about p that need panel edges (e.g. a cutoff)
    int theta_levels = 3, theta_nodes = 10, phi_nodes = 32;
};

struct IbpReport {
    double lhs = 0.0, rhs = 0.0;
    double scale = 0.0;     // sum of magnitudes of the right-hand terms
    double residual = 0.0;  // |lhs - rhs| / max(scale, |lhs|)
    std::size_t terms = 0;
};

// d_p^beta int Gamma mu dq against the table-built sum, both on one q-rule centered at p.
IbpReport ibp_verify(const MultiIndex& beta, const PairFunction& gamma, const PairTestFunction& mu, const Vec3& p,
                     const IbpConfig& cfg = {});

// Gamma chi(|p-q|) with chi smooth, zero for r <= eps and one for r >= 2 eps.
PairFunction excised(const PairFunction& gamma, double eps);
double smooth_cutoff(double r, double eps);

struct ThetaKernelReport {
    double phi = 0.0;  // max |Theta Phi^{ij}| <p>^{|beta|} / (<q>^7 (1 + 1/|p-q|))
    double G = 0.0;    // max |Theta G| <p>^{|beta|} |p-q|
    double H = 0.0;    // max |Theta H_j| <p>^{|beta|-1} |p-q| / <q>
    std::size_t samples = 0;
};
ThetaKernelReport theta_kernel_bound_report(const MultiIndex& beta, std::size_t samples, double radius,
                                            std::uint64_t seed);

}  // namespace relkin
