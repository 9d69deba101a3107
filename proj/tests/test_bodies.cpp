#include <gtest/gtest.h>

#include <cmath>

#include "softid/bodies.hpp"
#include "softid/model_io.hpp"
#include "support.hpp"

using namespace softid;

namespace {

BodyDesc rod(const std::string& kind, double L0 = 0.2, double R = 0.01) {
  BodyDesc b;
  b.kind = kind;
  b.geometry.shape = "cylinder";
  b.geometry.radius = R;
  b.geometry.length = L0;
  b.rho = 1000;
  b.C = 1e5;
  b.x_J = Vec3(0, 0, L0);
  b.x_a = Vec3(R, 0, L0);
  b.x_b = Vec3(0, R, L0);
  return b;
}

BodyDesc lvp_body() {
  BodyDesc b = rod("lvp", 0.1);
  b.dof = 6;
  b.lvp = {{LvpKind::stretch_compression, {0}},
           {LvpKind::planar_bending_x1, {1, 2}},
           {LvpKind::planar_bending_x2, {3, 4}},
           {LvpKind::twist, {5}}};
  return b;
}

Mat3X fd_jacobian_q(const BodyModel& m, const Vec3& x, const VecX& q, double h = 1e-5) {
  Mat3X J(3, q.size());
  for (int k = 0; k < q.size(); ++k) {
    VecX qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    J.col(k) = (m.position(x, qp) - m.position(x, qm)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST(Bodies, ZeroStrainIsIdentity) {
  for (const char* kind : {"pcc", "pcc_planar", "pcs", "pac", "pgc"}) {
    const auto m = build_body(rod(kind));
    const VecX q0 = VecX::Zero(m->dof());
    for (const Vec3& x : {Vec3(0, 0, 0), Vec3(0.005, -0.003, 0.07), Vec3(0, 0.01, 0.2)})
      EXPECT_LT((m->position(x, q0) - x).norm(), 1e-12) << kind;
  }
}

TEST(Bodies, ConstantCurvatureArc) {
  // planar bending by angle th: the centreline is a circular arc of radius L0 / th
  const double L0 = 0.2, th = 0.7;
  const auto m = build_body(rod("pcc", L0));
  VecX q = VecX::Zero(3);
  q(0) = th;
  const Vec3 tip = m->position(Vec3(0, 0, L0), q);
  const double r = L0 / th;
  EXPECT_NEAR(tip(0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(tip(1)), r * (1 - std::cos(th)), 1e-10);
  EXPECT_NEAR(tip(2), r * std::sin(th), 1e-10);
  // arc length is preserved along the centreline
  const int K = 400;
  double len = 0.0;
  Vec3 prev = m->position(Vec3::Zero(), q);
  for (int k = 1; k <= K; ++k) {
    const Vec3 p = m->position(Vec3(0, 0, L0 * k / K), q);
    len += (p - prev).norm();
    prev = p;
  }
  EXPECT_NEAR(len, L0, 1e-6);
}

TEST(Bodies, ElongationStretchesCentreline) {
  const double L0 = 0.2;
  const auto m = build_body(rod("pcc", L0));
  VecX q = VecX::Zero(3);
  q(2) = 0.03;
  EXPECT_NEAR(m->position(Vec3(0, 0, L0), q)(2), L0 + 0.03, 1e-12);
}

TEST(Bodies, JacobianMatchesFiniteDifference) {
  test::Sampler s(11);
  for (const char* kind : {"pcc", "pcs", "pac", "pgc", "variable_radius_pcc"}) {
    const auto m = build_body(rod(kind));
    const VecX q = s(m->dof(), 0.3);
    const Vec3 x(0.004, -0.006, 0.13);
    const Mat3X J = m->jacobian_q(x, q);
    EXPECT_LT((J - fd_jacobian_q(*m, x, q)).norm(), 1e-7 * std::max(1.0, J.norm())) << kind;
  }
  const auto lvp = build_body(lvp_body());
  const VecX q = s(6, 0.3);
  const Vec3 x(0.004, -0.006, 0.06);
  EXPECT_LT((lvp->jacobian_q(x, q) - fd_jacobian_q(*lvp, x, q)).norm(), 1e-7);
}

TEST(Bodies, BatchAndScalarMapsAgree) {
  test::Sampler s(5);
  const auto m = build_body(rod("pcs"));
  const VecX q = s(6, 0.2);
  std::vector<Vec3> xs{{0, 0, 0.01}, {0.005, 0.002, 0.1}, {-0.007, 0.0, 0.19}};
  std::vector<Vec3> out;
  m->map_points(xs, q, out);
  ASSERT_EQ(out.size(), xs.size());
  for (size_t i = 0; i < xs.size(); ++i) EXPECT_LT((out[i] - m->position(xs[i], q)).norm(), 1e-13);
}

TEST(Bodies, LvpPreservesVolume) {
  test::Sampler s(9);
  const auto m = build_body(lvp_body());
  for (int t = 0; t < 20; ++t) {
    const VecX q = s(6, 0.5);
    const Vec3 x(0.008 * s.u(s.rng), 0.008 * s.u(s.rng), 0.05 + 0.05 * s.u(s.rng));
    EXPECT_NEAR(m->jacobian_x(x, q).determinant(), 1.0, 1e-6);
  }
}

TEST(Bodies, RadialBumpSupport) {
  const double L0 = 0.2;
  EXPECT_EQ(radial_bump(0.0, 1.0, L0), 0.0);
  EXPECT_EQ(radial_bump(0.1, -0.1, L0), 0.0);
  EXPECT_GT(radial_bump(0.1, 1.5, L0), 0.0);
  EXPECT_GT(radial_bump(0.1, M_PI / 2, L0), radial_bump(0.09, M_PI / 2, L0));
}

TEST(Bodies, Validation) {
  BodyDesc b = rod("pcc");
  b.rho = 0;
  EXPECT_THROW(build_body(b), ModelError);
  b = rod("pcc");
  b.C = -1;
  EXPECT_THROW(build_body(b), ModelError);
  b = rod("lvp");
  b.dof = 11;
  EXPECT_THROW(build_body(b), ModelError);
}
