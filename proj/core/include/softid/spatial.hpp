#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace softid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

template <class S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
template <class S>
using Mat3T = Eigen::Matrix<S, 3, 3>;
template <class S>
using VecXT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Rotations are plain 3x3 matrices with orthonormal columns and det +1.
using Rotation3 = Mat3;

template <class S>
struct TransformT {
  Mat3T<S> R = Mat3T<S>::Identity();
  Vec3T<S> t = Vec3T<S>::Zero();

  Vec3T<S> apply(const Vec3T<S>& p) const { return R * p + t; }
};
using Transform3 = TransformT<double>;

template <class S>
Mat3T<S> skew(const Vec3T<S>& v) {
  Mat3T<S> m;
  m << S(0.0), -v(2), v(1),
       v(2), S(0.0), -v(0),
       -v(1), v(0), S(0.0);
  return m;
}
inline Mat3 skew(const Vec3& v) { return skew<double>(v); }

// vee of the antisymmetric part, so noisy inputs still give a clean axis
inline Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

template <class S>
TransformT<S> compose(const TransformT<S>& a, const TransformT<S>& b) {
  TransformT<S> c;
  c.R = a.R * b.R;
  c.t = a.t + a.R * b.t;
  return c;
}

template <class S>
TransformT<S> inverse(const TransformT<S>& a) {
  TransformT<S> c;
  c.R = a.R.transpose();
  c.t = -(c.R * a.t);
  return c;
}

bool is_rotation(const Mat3& R, double tol = 1e-12);

// Rodrigues rotation about a unit axis
template <class S>
Mat3T<S> axis_angle(const Vec3& axis, const S& angle) {
  using std::cos, std::sin;
  const Mat3T<S> K = skew(Vec3(axis.normalized())).template cast<S>();
  return Mat3T<S>::Identity() + K * sin(angle) + (K * K) * (S(1.0) - cos(angle));
}

Mat3 rotation_from_quaternion(double w, double x, double y, double z);

// Component k is 0.5 * w' * reshape(col k, 3, 3) * w.
VecX vec_kron_contract(const Vec3& omega, const MatX& dIdq_stack);

}  // namespace softid
