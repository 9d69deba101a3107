#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "softid/bodies.hpp"
#include "softid/jet.hpp"
#include "softid/quadrature.hpp"
#include "softid/spatial.hpp"

namespace softid {

// Thrown when the contact area degenerates (anchors collapse).
struct DegenerateFrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JointModel {
  enum class Kind { fixed, revolute, prismatic, rotated_base };
  Kind kind = Kind::fixed;
  Vec3 axis = Vec3::UnitZ();
  Transform3 offset;  // constant transform of fixed and rotated_base joints

  static JointModel fixed(const Transform3& T = {});
  static JointModel revolute(const Vec3& axis);
  static JointModel prismatic(const Vec3& axis);
  static JointModel rotated_base(const Mat3& R);

  int dof() const { return (kind == Kind::revolute || kind == Kind::prismatic) ? 1 : 0; }

  template <class S>
  TransformT<S> transform(const S* q) const {
    TransformT<S> T;
    switch (kind) {
      case Kind::fixed:
      case Kind::rotated_base:
        T.R = offset.R.template cast<S>();
        T.t = offset.t.template cast<S>();
        break;
      case Kind::revolute:
        T.R = axis_angle<S>(axis, q[0]);
        break;
      case Kind::prismatic:
        T.t = axis.normalized().template cast<S>() * q[0];
        break;
    }
    return T;
  }
};

std::string to_string(JointModel::Kind k);

struct BodyLink {
  BodyModelPtr model;
  Vec3 x_J = Vec3::Zero();  // pivot of the successor joint
  Vec3 x_a = Vec3::UnitX();
  Vec3 x_b = Vec3::UnitY();
  bool free_tip = false;
  QuadOrder order{8, 8, 8};
  std::vector<VolumeNode> nodes;  // filled by ChainModel::finalize

  int dof() const { return model ? model->dof() : 0; }
};

struct Link {
  JointModel joint;
  BodyLink body;
  int offset = 0;  // first configuration index of this link
  int dof() const { return joint.dof() + body.dof(); }
};

enum class StressLaw { neo_hookean_weak, body_force_divergence, none };

class ChainModel {
 public:
  Transform3 base;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);  // world frame
  StressLaw stress_law = StressLaw::neo_hookean_weak;
  std::vector<Link> links;

  // Slices the configuration, builds quadrature nodes and checks invariants.
  void finalize();
  int dof() const { return n_; }
  int size() const { return static_cast<int>(links.size()); }
  // gravity expressed in the chain base frame
  Vec3 base_gravity() const { return base.R.transpose() * gravity; }

 private:
  int n_ = 0;
};

// Contact frame of a body from three anchor points (translation at x_J).
template <class S>
TransformT<S> contact_frame(const BodyLink& body, const VecXT<S>& qB) {
  const BodyModel& m = *body.model;
  const Vec3T<S> pJ = m.position(Vec3T<S>(body.x_J.template cast<S>()), qB);
  const Vec3T<S> pa = m.position(Vec3T<S>(body.x_a.template cast<S>()), qB);
  const Vec3T<S> pb = m.position(Vec3T<S>(body.x_b.template cast<S>()), qB);
  using std::sqrt;
  Vec3T<S> d1 = pa - pJ;
  Vec3T<S> d2 = pb - pJ;
  const S l1 = sqrt(d1.dot(d1));
  if (!(value(l1) > 1e-12)) throw DegenerateFrameError("contact frame: |f(x_a) - f(x_J)| vanished");
  const Vec3T<S> n1 = d1 / l1;
  // Gram-Schmidt keeps the triad orthonormal when the contact area shears
  d2 = d2 - n1 * n1.dot(d2);
  const S l2 = sqrt(d2.dot(d2));
  if (!(value(l2) > 1e-12)) throw DegenerateFrameError("contact frame: |f(x_b) - f(x_J)| vanished");
  const Vec3T<S> n2 = d2 / l2;
  TransformT<S> T;
  T.R.col(0) = n1;
  T.R.col(1) = n2;
  T.R.col(2) = n1.cross(n2);
  T.t = pJ;
  return T;
}

Transform3 contact_frame(const BodyLink& body, const VecX& qB);
Transform3 link_transform(const Link& link, const VecX& qi);
// Base-frame transforms of every body frame.
std::vector<Transform3> forward_kinematics(const ChainModel& chain, const VecX& q);

struct BodyKinematics {
  Transform3 rel;   // i-1 T i
  Transform3 base;  // 0 T i
  Transform3 body_to_joint;  // contact frame in the joint frame
  Vec3 v, w, a, wd;  // body-frame velocity/acceleration of frame i
  Vec3 v_rel, w_rel, vd_rel, wd_rel;  // relative quantities in frame i-1
  Mat3X dt;  // d t / d q_k in frame i-1
  Mat3X dw;  // vee(dR/dq_k R') in frame i-1
  MatX3 Pv;  // d v_i / d qdot_i, rows in configuration order
  MatX3 Pw;  // d w_i / d qdot_i
  TransformT<DualJet> contact_ad;  // contact frame with derivative seeds
  VecXT<DualJet> q_ad;             // seeded body coordinates
};

struct KinematicsCache {
  std::vector<BodyKinematics> bodies;
  Vec3 base_accel = Vec3::Zero();
};

// Seeds value/direction pairs: outer direction carries qd, inner directions
// are unit vectors on [first, first + count).
VecXT<DualJet> seed_coordinates(const VecX& q, const VecX& qd, int nd, int first);

void forward_pass(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                  const Vec3& base_accel, KinematicsCache& cache);
KinematicsCache forward_pass(const ChainModel& chain, const VecX& q, const VecX& qd,
                             const VecX& qdd, const Vec3& base_accel);

struct Projection {
  MatX3 Pv, Pw;
};
Projection projection_matrices(const KinematicsCache& cache, int i);

// Base-frame position of material point x of body i and its 3 x n Jacobian,
// from a cache built at the configuration of interest.
Mat3X point_jacobian(const ChainModel& chain, const KinematicsCache& cache, int body,
                     const Vec3& x, Vec3* p_base = nullptr);

}  // namespace softid
