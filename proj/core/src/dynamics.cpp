#include "softid/dynamics.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace softid {

namespace {

// Body-frame node position p = R_BJ' (f - t_BJ) with its coordinate and
// time derivatives.
struct NodeKin {
  Vec3 p, pd, d2;  // d2: second directional derivative along qd
  Mat3X J;
};

void node_kinematics(const BodyLink& body, const BodyKinematics& kin, const VecX& qd_i,
                     std::vector<NodeKin>& out) {
  const int ni = static_cast<int>(kin.Pv.rows());
  std::vector<Vec3> xs(body.nodes.size());
  for (size_t j = 0; j < xs.size(); ++j) xs[j] = body.nodes[j].x;
  std::vector<Vec3T<DualJet>> f;
  body.model->map_points(xs, kin.q_ad, f);
  const Mat3T<DualJet> Rt = kin.contact_ad.R.transpose();
  out.resize(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    const Vec3T<DualJet> p = Rt * (f[j] - kin.contact_ad.t);
    NodeKin& nk = out[j];
    nk.J.resize(3, ni);
    for (int r = 0; r < 3; ++r) {
      nk.p(r) = val(p(r));
      nk.pd(r) = d_t(p(r));
      double acc = 0.0;
      for (int k = 0; k < ni; ++k) {
        nk.J(r, k) = d_q(p(r), k);
        acc += d_tq(p(r), k) * qd_i(k);
      }
      nk.d2(r) = acc;
    }
  }
}

template <class F>
void for_each_body(int count, int jobs, F&& f) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  const int nw = std::min(jobs, count);
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += nw) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// Deformation gradient as a jet over body coordinates, read from a JetJet
// position whose outer directions are coordinates and inner directions x.
Mat3T<Jet10> gradient_over_q(const Vec3T<JetJet>& f, int nB) {
  Mat3T<Jet10> F;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      Jet10 e(c < f(r).a.n ? f(r).a.v[c] : 0.0);
      e.n = nB;
      for (int k = 0; k < nB; ++k) {
        const Jet10& d = k < f(r).n ? f(r).v[k] : Jet10(0.0);
        e.v[k] = c < d.n ? d.v[c] : 0.0;
      }
      F(r, c) = e;
    }
  return F;
}

struct WeakStress {
  VecX dU;   // dU/dq_B
  VecX dRd;  // dR/dqd_B
  double U = 0.0;
  double power = 0.0;
};

WeakStress weak_stress(const BodyLink& body, const VecX& qB, const VecX* qdB) {
  const int nB = body.dof();
  WeakStress ws;
  ws.dU = VecX::Zero(nB);
  ws.dRd = VecX::Zero(nB);
  const Material& mat = body.model->material();
  if (nB == 0 || (mat.C == 0.0)) return ws;
  VecXT<JetJet> qj(nB);
  for (int k = 0; k < nB; ++k) qj(k) = JetJet::seed(Jet10(qB(k)), k, nB);
  std::vector<Vec3> xs(body.nodes.size());
  for (size_t j = 0; j < xs.size(); ++j) xs[j] = body.nodes[j].x;
  std::vector<Vec3T<JetJet>> f;
  body.model->map_points(xs, qj, f);
  const bool damp = qdB && mat.eta != 0.0;
  for (size_t j = 0; j < xs.size(); ++j) {
    const Mat3T<Jet10> F = gradient_over_q(f[j], nB);
    const Jet10 J = F.determinant();
    if (!(J.a > 0.0))
      throw std::domain_error("stress: non-positive volume ratio at node " + std::to_string(j));
    const Jet10 s = pow(J, -2.0 / 3.0);
    const Mat3T<Jet10> Cb = (F.transpose() * F) * s;
    const Jet10 W = (Cb.trace() - 3.0) * mat.C;
    const double w = body.nodes[j].w;
    ws.U += w * W.a;
    for (int k = 0; k < nB; ++k) ws.dU(k) += w * (k < W.n ? W.v[k] : 0.0);
    if (damp) {
      Mat3 Cd = Mat3::Zero();
      for (int k = 0; k < nB; ++k)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) Cd(a, b) += (k < Cb(a, b).n ? Cb(a, b).v[k] : 0.0) * (*qdB)(k);
      const double ec = mat.eta * mat.C;
      ws.power += w * ec * Cd.squaredNorm();
      for (int k = 0; k < nB; ++k) {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) acc += Cd(a, b) * (k < Cb(a, b).n ? Cb(a, b).v[k] : 0.0);
        ws.dRd(k) += w * ec * acc;
      }
    }
  }
  return ws;
}

// B = F F' and its rate at a material point, joint-frame components.
void strain_and_rate(const BodyModel& m, const Vec3& x, const VecX& qB, const VecX& qdB, Mat3& B,
                     Mat3& Bd) {
  Vec3T<DualJet> xs;
  for (int i = 0; i < 3; ++i) xs(i) = DualJet(Jet10::seed(x(i), i, 3));
  VecXT<DualJet> qs(qB.size());
  for (int k = 0; k < qB.size(); ++k) {
    DualJet e{Jet10(qB(k))};
    e.n = 1;
    e.v[0] = Jet10(qdB(k));
    qs(k) = e;
  }
  const Vec3T<DualJet> f = m.position(xs, qs);
  Mat3 F, Fd;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      F(r, c) = c < f(r).a.n ? f(r).a.v[c] : 0.0;
      Fd(r, c) = (f(r).n && c < f(r).v[0].n) ? f(r).v[0].v[c] : 0.0;
    }
  B = F * F.transpose();
  Bd = Fd * F.transpose() + F * Fd.transpose();
}

// div_x B from exact second derivatives
Vec3 analytic_div_B(const BodyModel& m, const Vec3& x, const VecX& qB) {
  Vec3T<JetJet> xs;
  for (int i = 0; i < 3; ++i) {
    JetJet e = JetJet::seed(Jet10::seed(x(i), i, 3), i, 3);
    xs(i) = e;
  }
  VecXT<JetJet> qs(qB.size());
  for (int k = 0; k < qB.size(); ++k) qs(k) = JetJet(Jet10(qB(k)));
  const Vec3T<JetJet> f = m.position(xs, qs);
  // F(r, c) with derivatives along x as a Jet10
  Mat3T<Jet10> F;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) F(r, c) = c < f(r).n ? f(r).v[c] : Jet10(0.0);
  const Mat3T<Jet10> B = F * F.transpose();
  Vec3 div = Vec3::Zero();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) div(r) += c < B(r, c).n ? B(r, c).v[c] : 0.0;
  return div;
}

}  // namespace

BodyInertialData body_integrals(const BodyLink& body, const BodyKinematics& kin, const VecX& qd_i,
                                const VecX& qdd_i) {
  const int ni = static_cast<int>(kin.Pv.rows());
  std::vector<NodeKin> nodes;
  node_kinematics(body, kin, qd_i, nodes);
  const double rho = body.model->material().rho;

  BodyInertialData d;
  d.J_com = Mat3X::Zero(3, ni);
  for (size_t j = 0; j < nodes.size(); ++j) {
    const double w = rho * body.nodes[j].w;
    d.m += w;
    d.p_com += w * nodes[j].p;
    d.J_com += w * nodes[j].J;
    d.pd_com += w * nodes[j].pd;
    d.pdd_com += w * (nodes[j].J * qdd_i + nodes[j].d2);
  }
  if (!(d.m > 0.0)) throw std::domain_error("body_integrals: non-positive mass");
  d.p_com /= d.m;
  d.J_com /= d.m;
  d.pd_com /= d.m;
  d.pdd_com /= d.m;

  d.S = Mat3X::Zero(3, ni);
  d.dI = MatX::Zero(9, ni);
  d.X = Mat3X::Zero(3, ni);
  d.Jr_rdd = VecX::Zero(ni);
  d.Mrr = MatX::Zero(ni, ni);
  const Mat3 E = Mat3::Identity();
  for (size_t j = 0; j < nodes.size(); ++j) {
    const double w = rho * body.nodes[j].w;
    const Vec3 r = nodes[j].p - d.p_com;
    const Vec3 rd = nodes[j].pd - d.pd_com;
    const Vec3 rdd = nodes[j].J * qdd_i + nodes[j].d2 - d.pdd_com;
    const Mat3X Jr = nodes[j].J - d.J_com;
    d.I += w * (r.squaredNorm() * E - r * r.transpose());
    d.Id += w * (2.0 * r.dot(rd) * E - rd * r.transpose() - r * rd.transpose());
    d.h += w * r.cross(rd);
    d.h2 += w * r.cross(rdd);
    d.S += w * skew(r) * Jr;
    for (int k = 0; k < ni; ++k) {
      const Vec3 jk = Jr.col(k);
      const Mat3 dIk = 2.0 * r.dot(jk) * E - jk * r.transpose() - r * jk.transpose();
      d.dI.col(k) += w * Eigen::Map<const Eigen::Matrix<double, 9, 1>>(dIk.data());
      d.X.col(k) += w * rd.cross(jk);
    }
    d.Jr_rdd += w * Jr.transpose() * rdd;
    d.Mrr += w * Jr.transpose() * Jr;
    d.centroid_residual += w * r;
    d.centroid_rate_residual += w * rd;
  }
  return d;
}

InertialTerms inertial_terms(const BodyInertialData& d, const BodyKinematics& kin) {
  const Vec3& w = kin.w;
  const Vec3& wd = kin.wd;
  const Vec3 a_com = kin.a + wd.cross(d.p_com) + w.cross(w.cross(d.p_com)) +
                     2.0 * w.cross(d.pd_com) + d.pdd_com;
  InertialTerms t;
  t.w.F = -d.m * a_com;
  t.w.T = -d.I * wd - w.cross(d.I * w) - d.Id * w - w.cross(d.h) - d.h2;
  t.pi = d.J_com.transpose() * t.w.F - d.S.transpose() * wd + vec_kron_contract(w, d.dI) -
         2.0 * d.X.transpose() * w - d.Jr_rdd;
  return t;
}

GravityTerms gravity_terms(const BodyInertialData& d, const Mat3& R_i, const Vec3& g0) {
  GravityTerms t;
  t.F = d.m * (R_i.transpose() * g0);
  t.pi = d.J_com.transpose() * t.F;
  return t;
}

StressTerms stress_terms(const Link& link, const BodyKinematics& kin, const BodyInertialData& d,
                         const VecX& q_i, const VecX& qd_i, const StressOptions& opt) {
  const int nJ = link.joint.dof(), nB = link.body.dof(), ni = nJ + nB;
  StressTerms st;
  st.pi = VecX::Zero(ni);
  if (nB == 0 || opt.law == StressLaw::none) return st;
  const Material& mat = link.body.model->material();
  const VecX qB = q_i.tail(nB), qdB = qd_i.tail(nB);

  if (opt.law == StressLaw::neo_hookean_weak) {
    const WeakStress ws = weak_stress(link.body, qB, &qdB);
    st.pi.tail(nB) = -(ws.dU + ws.dRd);
    st.energy = ws.U;
    st.dissipation = ws.power;
    return st;
  }

  // body-force law: b = 2C div B + eta C div Bdot, rotated into the body frame
  if (mat.C == 0.0) return st;
  const BodyModel& m = *link.body.model;
  const double h = opt.fd_rel_step * m.domain().length_scale();
  std::vector<NodeKin> nodes;
  node_kinematics(link.body, kin, qd_i, nodes);
  const Mat3 RBt = kin.body_to_joint.R.transpose();
  for (size_t j = 0; j < nodes.size(); ++j) {
    const Vec3& x = link.body.nodes[j].x;
    Vec3 divB = Vec3::Zero(), divBd = Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
      Mat3 Bp, Bdp, Bm, Bdm;
      strain_and_rate(m, x + h * Vec3::Unit(c), qB, qdB, Bp, Bdp);
      strain_and_rate(m, x - h * Vec3::Unit(c), qB, qdB, Bm, Bdm);
      divB += (Bp.col(c) - Bm.col(c)) / (2.0 * h);
      divBd += (Bdp.col(c) - Bdm.col(c)) / (2.0 * h);
    }
    if (opt.analytic_divergence) divB = analytic_div_B(m, x, qB);
    const Vec3 b = RBt * (2.0 * mat.C * divB + mat.eta * mat.C * divBd);
    const double w = link.body.nodes[j].w;
    st.w.F += w * b;
    st.w.T += w * (nodes[j].p - d.p_com).cross(b);
    st.pi += w * nodes[j].J.transpose() * b;
  }
  return st;
}

double elastic_energy(const Link& link, const VecX& q_i) {
  const int nB = link.body.dof();
  if (nB == 0) return 0.0;
  return weak_stress(link.body, q_i.tail(nB), nullptr).U;
}

VecX backward_recursion(const ChainModel& chain, const KinematicsCache& kin,
                        const std::vector<BodyInertialData>& data, const std::vector<Wrench>& w) {
  VecX out = VecX::Zero(chain.dof());
  Vec3 F = Vec3::Zero(), T = Vec3::Zero();
  for (int i = chain.size() - 1; i >= 0; --i) {
    const Link& l = chain.links[i];
    Vec3 Fi = w[i].F, Ti = w[i].T + data[i].p_com.cross(w[i].F);
    if (i + 1 < chain.size()) {
      const Transform3& c = kin.bodies[i + 1].rel;
      const Vec3 RF = c.R * F;
      Fi += RF;
      Ti += c.R * T + c.t.cross(RF);
    }
    F = Fi;
    T = Ti;
    const BodyKinematics& bk = kin.bodies[i];
    out.segment(l.offset, l.dof()) = bk.Pv * F + bk.Pw * T;
  }
  return out;
}

std::vector<BodyTerms> body_terms(const ChainModel& chain, const VecX& q, const VecX& qd,
                                  const VecX& qdd, const DynamicsOptions& opt) {
  const Vec3 g0 = chain.base_gravity();
  const bool base_mode = opt.gravity && opt.gravity_mode == GravityMode::base_acceleration;
  const VecX zero = VecX::Zero(chain.dof());
  KinematicsCache kin;
  forward_pass(chain, q, opt.inertia ? qd : zero, opt.inertia ? qdd : zero,
               base_mode ? Vec3(-g0) : Vec3(Vec3::Zero()), kin);
  std::vector<BodyTerms> out(chain.size());
  for_each_body(chain.size(), opt.jobs, [&](int i) {
    const Link& l = chain.links[i];
    const int ni = l.dof();
    const VecX qi = q.segment(l.offset, ni);
    const VecX qdi = (opt.inertia ? qd : zero).segment(l.offset, ni);
    const VecX qddi = (opt.inertia ? qdd : zero).segment(l.offset, ni);
    BodyTerms& bt = out[i];
    bt.data = body_integrals(l.body, kin.bodies[i], qdi, qddi);
    if (opt.inertia || base_mode) {
      bt.inertial = inertial_terms(bt.data, kin.bodies[i]);
    } else {
      bt.inertial.pi = VecX::Zero(ni);
    }
    bt.gravity.pi = VecX::Zero(ni);
    if (opt.gravity && !base_mode) bt.gravity = gravity_terms(bt.data, kin.bodies[i].base.R, g0);
    bt.stress.pi = VecX::Zero(ni);
    if (opt.stress) {
      StressOptions so = opt.stress_opt;
      so.law = chain.stress_law;
      bt.stress = stress_terms(l, kin.bodies[i], bt.data, qi, qd.segment(l.offset, ni), so);
    }
  });
  return out;
}

DynamicsResult inverse_dynamics(const ChainModel& chain, const VecX& q, const VecX& qd,
                                const VecX& qdd, const DynamicsOptions& opt, bool with_mass) {
  const int n = chain.dof(), N = chain.size();
  const Vec3 g0 = chain.base_gravity();
  const bool base_mode = opt.gravity && opt.gravity_mode == GravityMode::base_acceleration;
  const VecX zero = VecX::Zero(n);
  const VecX& qk = opt.inertia ? qd : zero;
  const VecX& qddk = opt.inertia ? qdd : zero;

  KinematicsCache kin;
  forward_pass(chain, q, qk, qddk, base_mode ? Vec3(-g0) : Vec3(Vec3::Zero()), kin);

  std::vector<BodyInertialData> data(N);
  std::vector<Wrench> w(N);
  std::vector<VecX> pi(N);
  StressOptions so = opt.stress_opt;
  so.law = chain.stress_law;
  for_each_body(N, opt.jobs, [&](int i) {
    const Link& l = chain.links[i];
    const int ni = l.dof();
    data[i] = body_integrals(l.body, kin.bodies[i], qk.segment(l.offset, ni), qddk.segment(l.offset, ni));
    Wrench wi;
    VecX p = VecX::Zero(ni);
    if (opt.inertia || base_mode) {
      const InertialTerms it = inertial_terms(data[i], kin.bodies[i]);
      wi = it.w;
      p += it.pi;
    }
    if (opt.gravity && !base_mode) {
      const GravityTerms gt = gravity_terms(data[i], kin.bodies[i].base.R, g0);
      wi.F += gt.F;
      p += gt.pi;
    }
    if (opt.stress && l.body.dof() > 0) {
      const StressTerms st = stress_terms(l, kin.bodies[i], data[i], q.segment(l.offset, ni),
                                          qd.segment(l.offset, ni), so);
      wi.F += st.w.F;
      wi.T += st.w.T;
      p += st.pi;
    }
    w[i] = wi;
    pi[i] = p;
  });

  DynamicsResult res;
  res.nu = -backward_recursion(chain, kin, data, w);
  for (int i = 0; i < N; ++i) res.nu.segment(chain.links[i].offset, chain.links[i].dof()) -= pi[i];
  if (!with_mass) return res;

  // Mass matrix from zero-velocity Jacobians with respect to qdd.
  std::vector<Mat3X> dFs(N), dTs(N);
  std::vector<MatX> dPi(N);
  Mat3X dwd = Mat3X::Zero(3, n), da = Mat3X::Zero(3, n);
  for (int i = 0; i < N; ++i) {
    const Link& l = chain.links[i];
    const int o = l.offset, ni = l.dof();
    const BodyKinematics& bk = kin.bodies[i];
    const BodyInertialData& d = data[i];
    const Mat3 Rt = bk.rel.R.transpose();
    Mat3X na = da - skew(bk.rel.t) * dwd;
    na.middleCols(o, ni) += bk.dt;
    Mat3X nw = dwd;
    nw.middleCols(o, ni) += bk.dw;
    da = Rt * na;
    dwd = Rt * nw;
    Mat3X dacom = da - skew(d.p_com) * dwd;
    dacom.middleCols(o, ni) += d.J_com;
    dFs[i] = -d.m * dacom;
    dTs[i] = -d.I * dwd;
    dTs[i].middleCols(o, ni) -= d.S;
    dPi[i] = d.J_com.transpose() * dFs[i] - d.S.transpose() * dwd;
    dPi[i].middleCols(o, ni) -= d.Mrr;
  }
  res.M = MatX::Zero(n, n);
  Mat3X F = Mat3X::Zero(3, n), T = Mat3X::Zero(3, n);
  for (int i = N - 1; i >= 0; --i) {
    const Link& l = chain.links[i];
    Mat3X Fi = dFs[i], Ti = dTs[i] + skew(data[i].p_com) * dFs[i];
    if (i + 1 < N) {
      const Transform3& c = kin.bodies[i + 1].rel;
      const Mat3X RF = c.R * F;
      Fi += RF;
      Ti += c.R * T + skew(c.t) * RF;
    }
    F = Fi;
    T = Ti;
    const BodyKinematics& bk = kin.bodies[i];
    res.M.middleRows(l.offset, l.dof()) = -(dPi[i] + bk.Pv * F + bk.Pw * T);
  }
  return res;
}

VecX iid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd, int jobs) {
  DynamicsOptions o;
  o.gravity = o.stress = false;
  o.jobs = jobs;
  return inverse_dynamics(chain, q, qd, qdd, o, false).nu;
}

VecX id(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
        const DynamicsOptions& opt) {
  return inverse_dynamics(chain, q, qd, qdd, opt, false).nu;
}

DynamicsResult miid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                    int jobs) {
  DynamicsOptions o;
  o.gravity = o.stress = false;
  o.jobs = jobs;
  return inverse_dynamics(chain, q, qd, qdd, o, true);
}

DynamicsResult mid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                   const DynamicsOptions& opt) {
  return inverse_dynamics(chain, q, qd, qdd, opt, true);
}

double gravity_potential(const ChainModel& chain, const VecX& q) {
  const VecX z = VecX::Zero(chain.dof());
  const KinematicsCache kin = forward_pass(chain, q, z, z, Vec3::Zero());
  const Vec3 g0 = chain.base_gravity();
  double U = 0.0;
  for (int i = 0; i < chain.size(); ++i) {
    const Link& l = chain.links[i];
    const BodyInertialData d =
        body_integrals(l.body, kin.bodies[i], z.segment(l.offset, l.dof()), z.segment(l.offset, l.dof()));
    U -= d.m * g0.dot(kin.bodies[i].base.apply(d.p_com));
  }
  return U;
}

double chain_elastic_energy(const ChainModel& chain, const VecX& q) {
  double U = 0.0;
  if (chain.stress_law != StressLaw::neo_hookean_weak) return U;
  for (const auto& l : chain.links) U += elastic_energy(l, q.segment(l.offset, l.dof()));
  return U;
}

double chain_dissipation_power(const ChainModel& chain, const VecX& q, const VecX& qd) {
  double P = 0.0;
  if (chain.stress_law != StressLaw::neo_hookean_weak) return P;
  for (const auto& l : chain.links) {
    const int nB = l.body.dof();
    if (nB == 0) continue;
    const VecX qdB = qd.segment(l.offset + l.joint.dof(), nB);
    P += weak_stress(l.body, q.segment(l.offset + l.joint.dof(), nB), &qdB).power;
  }
  return P;
}

}  // namespace softid
