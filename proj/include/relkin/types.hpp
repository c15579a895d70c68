#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace relkin {

template <class S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <class S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <class S> using Vec4T = Eigen::Matrix<S, 4, 1>;
template <class S> using Mat4T = Eigen::Matrix<S, 4, 4>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Vec4 = Vec4T<double>;
using Mat4 = Mat4T<double>;

// z = (t, x, p) in 1+3+3 phase space.
template <class S> struct PhasePointT {
    S t = S(0);
    Vec3T<S> x = Vec3T<S>::Zero();
    Vec3T<S> p = Vec3T<S>::Zero();

    PhasePointT() = default;
    PhasePointT(S t_, const Vec3T<S>& x_, const Vec3T<S>& p_) : t(t_), x(x_), p(p_) {}

    static PhasePointT origin() { return {}; }
};
using PhasePoint = PhasePointT<double>;

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace relkin
