#include "softid/spatial.hpp"

#include <stdexcept>

namespace softid {

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 rotation_from_quaternion(double w, double x, double y, double z) {
  Eigen::Quaterniond qt(w, x, y, z);
  if (qt.norm() == 0.0) throw std::invalid_argument("zero quaternion");
  return qt.normalized().toRotationMatrix();
}

VecX vec_kron_contract(const Vec3& omega, const MatX& dIdq_stack) {
  if (dIdq_stack.rows() != 9)
    throw std::invalid_argument("vec_kron_contract: stack must have 9 rows");
  // (w' (x) w') vec(A) = w' A w, so each column reduces to one quadratic form
  Eigen::Matrix<double, 9, 1> ww;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) ww(3 * c + r) = omega(r) * omega(c);
  return 0.5 * (dIdq_stack.transpose() * ww);
}

}  // namespace softid
