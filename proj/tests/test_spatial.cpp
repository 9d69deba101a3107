#include <gtest/gtest.h>

#include <cmath>

#include "softid/jet.hpp"
#include "softid/spatial.hpp"
#include "support.hpp"

using namespace softid;

TEST(Spatial, SkewVeeRoundTrip) {
  const Vec3 a(0.3, -1.2, 2.5), b(-0.7, 0.4, 1.1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
  EXPECT_LT((vee(skew(a)) - a).norm(), 1e-15);
  EXPECT_LT((skew(a) + skew(a).transpose()).norm(), 1e-15);
}

TEST(Spatial, AxisAngleIsRotation) {
  const Vec3 axis = Vec3(1, 2, -0.5).normalized();
  const Mat3 R = axis_angle<double>(axis, 0.8);
  EXPECT_TRUE(is_rotation(R, 1e-12));
  EXPECT_LT((R * axis - axis).norm(), 1e-14);
  const Mat3 ref = Eigen::AngleAxisd(0.8, axis).toRotationMatrix();
  EXPECT_LT((R - ref).norm(), 1e-14);
}

TEST(Spatial, QuaternionMatchesAxisAngle) {
  const double th = 1.1;
  const Vec3 n = Vec3(0, 1, 1).normalized();
  const Mat3 R = rotation_from_quaternion(std::cos(th / 2), std::sin(th / 2) * n(0),
                                          std::sin(th / 2) * n(1), std::sin(th / 2) * n(2));
  EXPECT_LT((R - axis_angle<double>(n, th)).norm(), 1e-14);
  // unnormalized input is accepted
  const Mat3 R2 = rotation_from_quaternion(2 * std::cos(th / 2), 2 * std::sin(th / 2) * n(0),
                                           2 * std::sin(th / 2) * n(1), 2 * std::sin(th / 2) * n(2));
  EXPECT_LT((R2 - R).norm(), 1e-14);
  EXPECT_THROW(rotation_from_quaternion(0, 0, 0, 0), std::invalid_argument);
}

TEST(Spatial, ComposeInverse) {
  Transform3 A, B;
  A.R = axis_angle<double>(Vec3::UnitZ(), 0.4);
  A.t = Vec3(1, 2, 3);
  B.R = axis_angle<double>(Vec3::UnitX(), -0.9);
  B.t = Vec3(-0.5, 0.1, 0.2);
  const Vec3 p(0.3, 0.6, -0.2);
  EXPECT_LT((compose(A, B).apply(p) - A.apply(B.apply(p))).norm(), 1e-14);
  EXPECT_LT((inverse(A).apply(A.apply(p)) - p).norm(), 1e-14);
}

TEST(Spatial, KroneckerContractionMatchesQuadraticForm) {
  test::Sampler s(3);
  const Vec3 w = s(3);
  MatX stack(9, 4);
  VecX ref(4);
  for (int k = 0; k < 4; ++k) {
    const MatX A = MatX(s(9)).reshaped(3, 3);
    stack.col(k) = A.reshaped();
    ref(k) = 0.5 * w.dot(A * w);
  }
  EXPECT_LT((vec_kron_contract(w, stack) - ref).norm(), 1e-14);
  EXPECT_THROW(vec_kron_contract(w, MatX::Zero(8, 1)), std::invalid_argument);
}

TEST(Jet, FirstDerivatives) {
  using J = Jet10;
  const J x = J::seed(0.7, 0, 2), y = J::seed(-1.3, 1, 2);
  const J f = sin(x) * y + x / y;
  EXPECT_NEAR(f.v[0], std::cos(0.7) * -1.3 + 1.0 / -1.3, 1e-15);
  EXPECT_NEAR(f.v[1], std::sin(0.7) - 0.7 / (1.3 * 1.3), 1e-15);
}

TEST(Jet, MixedSecondDerivative) {
  // f(q(t)) with q(t) = q0 + qd t: d/dt (df/dq) = f''(q) qd
  DualJet q;
  q.a = Jet10::seed(0.4, 0, 1);
  q.n = 1;
  q.v[0] = Jet10::with_dirs(2.0, 1);
  const DualJet f = exp(q) * q;
  EXPECT_NEAR(val(f), std::exp(0.4) * 0.4, 1e-15);
  EXPECT_NEAR(d_q(f, 0), std::exp(0.4) * 1.4, 1e-14);
  EXPECT_NEAR(d_t(f), 2.0 * std::exp(0.4) * 1.4, 1e-14);
  EXPECT_NEAR(d_tq(f, 0), 2.0 * std::exp(0.4) * 2.4, 1e-13);
}
