#pragma once

#include <utility>
#include <vector>

#include "relkin/types.hpp"

namespace relkin {

struct Rule1D {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

// Gauss-Legendre on [-1, 1], Golub-Welsch through Eigen's symmetric eigensolver. Cached per n.
const Rule1D& gauss_legendre(int n);

// n-point Gauss-Legendre on each panel [b_k, b_{k+1}].
Rule1D composite_gauss(const std::vector<double>& breaks, int n);

// Breakpoints 0, h, 2h, 4h, ... doubling until width reaches max_width, then uniform steps of max_width up to R.
std::vector<double> graded_breaks(double first, double max_width, double R);

// Orthonormal frame whose third column is axis (any unit axis).
Mat3 frame_from_axis(const Vec3& axis);

struct SphereRule {
    std::vector<Vec3> dir;
    std::vector<double> w;  // sums to 4 pi
};

// Polar angle panels graded toward theta = 0 (levels halvings of pi/2), n_theta nodes per panel,
// trapezoid in azimuth with n_phi nodes. Directions are in the local frame (pole = +z).
SphereRule graded_sphere_rule(int theta_levels, int n_theta, int n_phi);

}  // namespace relkin
