#include "softid/kinematics.hpp"

#include <cmath>
#include <sstream>

namespace softid {

JointModel JointModel::fixed(const Transform3& T) {
  JointModel j;
  j.kind = Kind::fixed;
  j.offset = T;
  return j;
}

JointModel JointModel::revolute(const Vec3& axis) {
  JointModel j;
  j.kind = Kind::revolute;
  j.axis = axis.normalized();
  return j;
}

JointModel JointModel::prismatic(const Vec3& axis) {
  JointModel j;
  j.kind = Kind::prismatic;
  j.axis = axis.normalized();
  return j;
}

JointModel JointModel::rotated_base(const Mat3& R) {
  if (!is_rotation(R, 1e-9)) throw std::invalid_argument("rotated_base: not a rotation");
  JointModel j;
  j.kind = Kind::rotated_base;
  j.offset.R = R;
  return j;
}

std::string to_string(JointModel::Kind k) {
  switch (k) {
    case JointModel::Kind::fixed: return "fixed";
    case JointModel::Kind::revolute: return "revolute";
    case JointModel::Kind::prismatic: return "prismatic";
    case JointModel::Kind::rotated_base: return "rotated_base";
  }
  return "?";
}

void ChainModel::finalize() {
  n_ = 0;
  for (size_t i = 0; i < links.size(); ++i) {
    Link& l = links[i];
    auto where = [&] { return "link " + std::to_string(i) + ": "; };
    if (!l.body.model) throw std::invalid_argument(where() + "missing body model");
    if (l.dof() > 10) throw std::invalid_argument(where() + "more than 10 coordinates per link");
    if (l.joint.kind == JointModel::Kind::revolute || l.joint.kind == JointModel::Kind::prismatic)
      if (l.joint.axis.norm() == 0.0) throw std::invalid_argument(where() + "joint axis is zero");
    const Vec3 da = l.body.x_a - l.body.x_J, db = l.body.x_b - l.body.x_J;
    if (da.norm() == 0.0 || db.norm() == 0.0)
      throw std::invalid_argument(where() + "anchors must differ from x_J (contact area assumption)");
    if (!l.body.free_tip && std::abs(da.dot(db)) > 1e-12 * std::max(1.0, da.norm() * db.norm()))
      throw std::invalid_argument(where() +
                                  "anchors x_a - x_J and x_b - x_J must be orthogonal (contact area assumption)");
    l.offset = n_;
    n_ += l.dof();
    l.body.nodes = volume_nodes(l.body.model->domain(), l.body.order);
  }
}

Transform3 contact_frame(const BodyLink& body, const VecX& qB) {
  return contact_frame<double>(body, qB);
}

Transform3 link_transform(const Link& link, const VecX& qi) {
  const int nJ = link.joint.dof();
  const Transform3 TJ = link.joint.transform<double>(qi.data());
  return compose(TJ, contact_frame(link.body, VecX(qi.tail(link.body.dof()))));
  (void)nJ;
}

std::vector<Transform3> forward_kinematics(const ChainModel& chain, const VecX& q) {
  std::vector<Transform3> out;
  out.reserve(chain.links.size());
  Transform3 T;
  for (const auto& l : chain.links) {
    T = compose(T, link_transform(l, q.segment(l.offset, l.dof())));
    out.push_back(T);
  }
  return out;
}

VecXT<DualJet> seed_coordinates(const VecX& q, const VecX& qd, int nd, int first) {
  VecXT<DualJet> s(q.size());
  for (int k = 0; k < q.size(); ++k) {
    DualJet x(Jet10::seed(q(k), first + k, nd));
    x.n = 1;
    x.v[0] = Jet10::with_dirs(qd(k), 0);
    s(k) = x;
  }
  return s;
}

void forward_pass(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                  const Vec3& base_accel, KinematicsCache& cache) {
  const int n = chain.dof();
  if (q.size() != n || qd.size() != n || qdd.size() != n)
    throw std::invalid_argument("forward_pass: state dimension mismatch");
  if (!q.allFinite() || !qd.allFinite() || !qdd.allFinite() || !base_accel.allFinite())
    throw std::invalid_argument("forward_pass: non-finite input");
  cache.bodies.resize(chain.links.size());
  cache.base_accel = base_accel;

  Vec3 v = Vec3::Zero(), w = Vec3::Zero(), a = base_accel, wd = Vec3::Zero();
  Transform3 Tb;
  for (size_t i = 0; i < chain.links.size(); ++i) {
    const Link& l = chain.links[i];
    BodyKinematics& bk = cache.bodies[i];
    const int nJ = l.joint.dof(), nB = l.body.dof(), ni = nJ + nB;
    const VecX qi = q.segment(l.offset, ni), qdi = qd.segment(l.offset, ni),
               qddi = qdd.segment(l.offset, ni);

    const VecXT<DualJet> qs = seed_coordinates(qi, qdi, ni, 0);
    bk.q_ad = qs.tail(nB);
    const TransformT<DualJet> TJ = l.joint.transform<DualJet>(qs.data());
    bk.contact_ad = contact_frame<DualJet>(l.body, bk.q_ad);
    const TransformT<DualJet> T = compose(TJ, bk.contact_ad);

    Mat3 R, Rd, Rdd;
    Vec3 t, td, tdd;
    bk.dt.resize(3, ni);
    Mat3X dR(3, 3 * ni);
    for (int r = 0; r < 3; ++r) {
      t(r) = val(T.t(r));
      td(r) = d_t(T.t(r));
      double acc = 0.0;
      for (int k = 0; k < ni; ++k) {
        bk.dt(r, k) = d_q(T.t(r), k);
        acc += d_tq(T.t(r), k) * qdi(k) + bk.dt(r, k) * qddi(k);
      }
      tdd(r) = acc;
      for (int c = 0; c < 3; ++c) {
        const DualJet& e = T.R(r, c);
        R(r, c) = val(e);
        Rd(r, c) = d_t(e);
        double accR = 0.0;
        for (int k = 0; k < ni; ++k) {
          dR(r, 3 * k + c) = d_q(e, k);
          accR += d_tq(e, k) * qdi(k) + d_q(e, k) * qddi(k);
        }
        Rdd(r, c) = accR;
      }
    }
    bk.body_to_joint.R = Mat3::NullaryExpr([&](Eigen::Index r, Eigen::Index c) { return val(bk.contact_ad.R(r, c)); });
    bk.body_to_joint.t = Vec3::NullaryExpr([&](Eigen::Index r) { return val(bk.contact_ad.t(r)); });
    bk.rel.R = R;
    bk.rel.t = t;
    Tb = compose(Tb, bk.rel);
    bk.base = Tb;

    bk.dw.resize(3, ni);
    for (int k = 0; k < ni; ++k) bk.dw.col(k) = vee(dR.middleCols(3 * k, 3) * R.transpose());
    bk.v_rel = td;
    bk.w_rel = vee(Rd * R.transpose());
    bk.vd_rel = tdd;
    bk.wd_rel = vee(Rdd * R.transpose());

    const Mat3 Rt = R.transpose();
    const Vec3 w_prev = w, wd_prev = wd;
    w = Rt * (w_prev + bk.w_rel);
    v = Rt * (v + w_prev.cross(t) + bk.v_rel);
    wd = Rt * (wd_prev + w_prev.cross(bk.w_rel) + bk.wd_rel);
    a = Rt * (a + wd_prev.cross(t) + w_prev.cross(w_prev.cross(t)) + 2.0 * w_prev.cross(bk.v_rel) +
              bk.vd_rel);
    bk.v = v;
    bk.w = w;
    bk.a = a;
    bk.wd = wd;
    bk.Pv = (Rt * bk.dt).transpose();
    bk.Pw = (Rt * bk.dw).transpose();
  }
}

KinematicsCache forward_pass(const ChainModel& chain, const VecX& q, const VecX& qd,
                             const VecX& qdd, const Vec3& base_accel) {
  KinematicsCache c;
  forward_pass(chain, q, qd, qdd, base_accel, c);
  return c;
}

Projection projection_matrices(const KinematicsCache& cache, int i) {
  return {cache.bodies.at(i).Pv, cache.bodies.at(i).Pw};
}

Mat3X point_jacobian(const ChainModel& chain, const KinematicsCache& cache, int body,
                     const Vec3& x, Vec3* p_base) {
  const Link& l = chain.links.at(body);
  const BodyKinematics& bk = cache.bodies.at(body);
  const Vec3T<DualJet> f = l.body.model->position(Vec3T<DualJet>(x.cast<DualJet>()), bk.q_ad);
  const Vec3T<DualJet> pa = bk.contact_ad.R.transpose() * (f - bk.contact_ad.t);
  Vec3 p;
  Mat3X Jp(3, l.dof());
  for (int r = 0; r < 3; ++r) {
    p(r) = val(pa(r));
    for (int k = 0; k < l.dof(); ++k) Jp(r, k) = d_q(pa(r), k);
  }
  const Vec3 p0 = bk.base.apply(p);
  Mat3X J = Mat3X::Zero(3, chain.dof());
  J.middleCols(l.offset, l.dof()) = bk.base.R * Jp;
  for (int j = body; j >= 0; --j) {
    const BodyKinematics& bj = cache.bodies[j];
    const Vec3 pj = inverse(bj.base).apply(p0);
    J.middleCols(chain.links[j].offset, chain.links[j].dof()) +=
        bj.base.R * (bj.Pv.transpose() - skew(pj) * bj.Pw.transpose());
  }
  if (p_base) *p_base = p0;
  return J;
}

}  // namespace softid
