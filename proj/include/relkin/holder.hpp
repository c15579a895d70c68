#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relkin/lorentz.hpp"

namespace relkin {

enum class Geometry { lorentz, galilean };

enum class HolderOrder { alpha, alpha_t, alpha_x, one_alpha, two_alpha, three_alpha };
const char* to_string(HolderOrder o);

using Vec27 = Eigen::Matrix<double, 27, 1>;

// Samples of g on a finite set of phase points. For Galilean geometry the p slot holds v.
// Derivative arrays are optional; when present they match points in length.
struct PointCloudSample {
    std::vector<PhasePoint> points;
    std::vector<double> values;
    std::vector<Vec3> grad_p;
    std::vector<Mat3> hess_p;
    std::vector<Vec27> d3_p;  // D^3_p g flattened as (i, j, k) -> 9 i + 3 j + k
    std::vector<double> dt;
    std::vector<Vec3> grad_x;

    std::size_t size() const { return points.size(); }
    // DomainError on duplicates, non-finite values or mismatched derivative arrays.
    void validate() const;
};

// Exact maximum of the quotient over the admissible ordered pairs of the cloud. That is only a lower
// bound for the seminorm over any continuum containing the cloud.
struct SeminormReport {
    HolderOrder order = HolderOrder::alpha;
    double value = 0.0;
    std::pair<std::size_t, std::size_t> attaining_pair{0, 0};
    std::vector<std::pair<std::string, double>> terms;  // parts of the composite orders
};

SeminormReport seminorm(const PointCloudSample& cloud, HolderOrder order, double alpha,
                        Geometry geometry = Geometry::lorentz, double beta = 0.9);

double linf(const PointCloudSample& cloud);

struct ProductCheck {
    double lhs = 0.0;  // [fg]
    double rhs = 0.0;  // |f|_inf [g] + [f] |g|_inf
    bool holds = false;
};
ProductCheck product_inequality_check(const PointCloudSample& f, const PointCloudSample& g, double alpha,
                                      Geometry geometry = Geometry::lorentz);

// Empirical constants in [g]_L <= C1 (1-R^2)^{-a/6} |g~|_G and [g~]_G <= C2 (1-R^2)^{-a} |g|_L, where
// g~ is g carried to velocity coordinates.
struct NormEquivReport {
    double seminorm_L = 0, norm_L = 0;
    double seminorm_G = 0, norm_G = 0;
    double C_LG = 0, C_GL = 0;
};
NormEquivReport norm_equiv_check(const PointCloudSample& cloud_p, double alpha, double R);

}  // namespace relkin
