#include <gtest/gtest.h>

#include <cmath>

#include "softid/bodies.hpp"
#include "softid/kinematics.hpp"
#include "softid/oracle.hpp"
#include "support.hpp"

using namespace softid;

TEST(Kinematics, TwoLinkForwardKinematics) {
  const ChainModel chain = test::load_model("rigid_2r");
  VecX q(2);
  q << 0.4, -1.1;
  const auto T = forward_kinematics(chain, q);
  ASSERT_EQ(T.size(), 2u);
  EXPECT_LT((T[0].t - Vec3(std::cos(0.4), std::sin(0.4), 0)).norm(), 1e-14);
  const Vec3 tip(std::cos(0.4) + std::cos(-0.7), std::sin(0.4) + std::sin(-0.7), 0);
  EXPECT_LT((T[1].t - tip).norm(), 1e-14);
  EXPECT_LT((T[1].R - axis_angle<double>(Vec3::UnitZ(), -0.7)).norm(), 1e-14);
}

TEST(Kinematics, ContactFrameIsRotationAtJointAnchor) {
  const ChainModel chain = test::load_model("pcs_2body");
  test::Sampler s(4);
  const auto& body = chain.links[0].body;
  const VecX qB = s(body.dof(), 0.2);
  const Transform3 F = contact_frame(body, qB);
  EXPECT_TRUE(is_rotation(F.R, 1e-12));
  EXPECT_LT((F.t - body.model->position(body.x_J, qB)).norm(), 1e-14);
}

TEST(Kinematics, FrameVelocitiesFromProjections) {
  for (const char* name : {"rigid_2r", "pcc_sim6", "pcs_2body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(21);
    const VecX q = s(n, 0.3), qd = s(n), qdd = s(n);
    const auto cache = forward_pass(chain, q, qd, qdd, Vec3::Zero());
    const auto cache0 = forward_pass(chain, q, qd, VecX::Zero(n), Vec3::Zero());
    for (int i = 0; i < chain.size(); ++i) {
      const auto& b = cache.bodies[i];
      const auto J = test::frame_jacobian(chain, cache, i);
      EXPECT_LT((b.base.R * b.v - J.Jv * qd).norm(), 1e-10 * std::max(1.0, qd.norm())) << name;
      EXPECT_LT((b.base.R * b.w - J.Jw * qd).norm(), 1e-10 * std::max(1.0, qd.norm())) << name;
      // accelerations are affine in qdd with the same Jacobian
      const Vec3 da = b.base.R * (b.a - cache0.bodies[i].a);
      EXPECT_LT((da - J.Jv * qdd).norm(), 1e-10 * std::max(1.0, qdd.norm())) << name;
      // and the Jacobian is the configuration derivative of the frame origin
      const double h = 1e-6;
      for (int k = 0; k < n; ++k) {
        VecX qp = q, qm = q;
        qp(k) += h;
        qm(k) -= h;
        const Vec3 fd = (forward_kinematics(chain, qp)[i].t - forward_kinematics(chain, qm)[i].t) / (2 * h);
        EXPECT_LT((fd - J.Jv.col(k)).norm(), 1e-7) << name << " k=" << k;
      }
    }
  }
}

TEST(Kinematics, PointJacobianMatchesOracle) {
  const ChainModel chain = test::load_model("pcs_2body");
  const int n = chain.dof();
  test::Sampler s(8);
  const VecX q = s(n, 0.2);
  const auto cache = forward_pass(chain, q, VecX::Zero(n), VecX::Zero(n), Vec3::Zero());
  const auto nodes = chain_nodes(chain, q);
  const auto Jo = full_chain_jacobian(chain, q);
  // first node of each body
  int idx = 0;
  for (int i = 0; i < chain.size(); ++i) {
    const Vec3 x = chain.links[i].body.nodes.front().x;
    Vec3 p;
    const Mat3X J = point_jacobian(chain, cache, i, x, &p);
    EXPECT_LT((p - nodes.p[idx]).norm(), 1e-12);
    EXPECT_LT((J - Jo[idx]).norm(), 1e-8 * std::max(1.0, J.norm()));
    idx += static_cast<int>(chain.links[i].body.nodes.size());
  }
}

TEST(Kinematics, FinalizeRejectsBadChains) {
  ChainModel c;
  Link l;
  l.joint = JointModel::revolute(Vec3::UnitZ());
  l.body.model = make_rigid_body(ReferenceDomain::box(Vec3::Zero(), Vec3::Ones()), Material{});
  l.body.x_J = Vec3(1, 0, 0);
  l.body.x_a = Vec3(1, 0, 0);
  l.body.x_b = Vec3(1, 1, 0);
  c.links.push_back(l);
  EXPECT_THROW(c.finalize(), std::invalid_argument);
  c.links[0].body.x_a = Vec3(1, 0, 1);
  c.links[0].joint = JointModel::revolute(Vec3::Zero());
  EXPECT_THROW(c.finalize(), std::invalid_argument);
  EXPECT_THROW(JointModel::rotated_base(2.0 * Mat3::Identity()), std::invalid_argument);
}

TEST(Kinematics, ForwardPassRejectsBadInput) {
  const ChainModel chain = test::load_model("rigid_2r");
  EXPECT_THROW(forward_pass(chain, VecX::Zero(3), VecX::Zero(2), VecX::Zero(2), Vec3::Zero()),
               std::invalid_argument);
  VecX q = VecX::Zero(2);
  q(0) = NAN;
  EXPECT_THROW(forward_pass(chain, q, VecX::Zero(2), VecX::Zero(2), Vec3::Zero()),
               std::invalid_argument);
}
