#include "softid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softid {

Stencil central_stencil(int derivative, int order) {
  Stencil s;
  if (derivative == 1) {
    switch (order) {
      case 2: s = {{-1, 1}, {-0.5, 0.5}}; break;
      case 4: s = {{-2, -1, 1, 2}, {1.0 / 12, -2.0 / 3, 2.0 / 3, -1.0 / 12}}; break;
      case 6:
        s = {{-3, -2, -1, 1, 2, 3}, {-1.0 / 60, 3.0 / 20, -3.0 / 4, 3.0 / 4, -3.0 / 20, 1.0 / 60}};
        break;
      default: throw std::invalid_argument("stencil order must be 2, 4 or 6");
    }
  } else if (derivative == 2) {
    switch (order) {
      case 2: s = {{-1, 0, 1}, {1.0, -2.0, 1.0}}; break;
      case 4: s = {{-2, -1, 0, 1, 2}, {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}}; break;
      case 6:
        s = {{-3, -2, -1, 0, 1, 2, 3},
             {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90}};
        break;
      default: throw std::invalid_argument("stencil order must be 2, 4 or 6");
    }
  } else {
    throw std::invalid_argument("stencil derivative must be 1 or 2");
  }
  return s;
}

namespace {

// Base-frame positions only (no masses), in node order.
void positions(const ChainModel& chain, const VecX& q, std::vector<Vec3>& out) {
  out.clear();
  Transform3 prev;
  std::vector<Vec3> xs, f;
  for (const auto& l : chain.links) {
    const VecX qi = q.segment(l.offset, l.dof());
    const Transform3 TJ = l.joint.transform<double>(qi.data());
    const Transform3 T = compose(prev, TJ);
    xs.resize(l.body.nodes.size());
    for (size_t j = 0; j < xs.size(); ++j) xs[j] = l.body.nodes[j].x;
    l.body.model->map_points(xs, VecX(qi.tail(l.body.dof())), f);
    for (const auto& p : f) out.push_back(T.apply(p));
    prev = compose(T, contact_frame(l.body, VecX(qi.tail(l.body.dof()))));
  }
}

double time_step(const VecX& qd, const VecX& qdd, const OracleOptions& opt) {
  if (opt.time_step > 0.0) return opt.time_step;
  const double s = std::max({1.0, qd.lpNorm<Eigen::Infinity>(), std::sqrt(qdd.lpNorm<Eigen::Infinity>())});
  return (opt.stencil == 2 ? 1e-4 : 1e-2) / s;
}

}  // namespace

ChainNodes chain_nodes(const ChainModel& chain, const VecX& q) {
  if (q.size() != chain.dof()) throw std::invalid_argument("oracle: configuration dimension mismatch");
  ChainNodes cn;
  positions(chain, q, cn.p);
  for (int i = 0; i < chain.size(); ++i) {
    const auto& b = chain.links[i].body;
    for (const auto& nd : b.nodes) {
      cn.dm.push_back(b.model->material().rho * nd.w);
      cn.body.push_back(i);
    }
  }
  return cn;
}

std::vector<Mat3X> full_chain_jacobian(const ChainModel& chain, const VecX& q,
                                       const OracleOptions& opt) {
  const int n = chain.dof();
  const Stencil st = central_stencil(1, opt.stencil);
  const double h = opt.config_step;
  std::vector<Vec3> p;
  positions(chain, q, p);
  std::vector<Mat3X> J(p.size(), Mat3X::Zero(3, n));
  for (int k = 0; k < n; ++k) {
    for (size_t s = 0; s < st.offsets.size(); ++s) {
      VecX qs = q;
      qs(k) += st.offsets[s] * h;
      positions(chain, qs, p);
      for (size_t j = 0; j < p.size(); ++j) J[j].col(k) += (st.w[s] / h) * p[j];
    }
  }
  return J;
}

MatX oracle_mass(const ChainModel& chain, const VecX& q, const OracleOptions& opt) {
  const ChainNodes cn = chain_nodes(chain, q);
  const auto J = full_chain_jacobian(chain, q, opt);
  MatX M = MatX::Zero(chain.dof(), chain.dof());
  for (size_t j = 0; j < J.size(); ++j) M += cn.dm[j] * J[j].transpose() * J[j];
  return 0.5 * (M + M.transpose());
}

VecX oracle_kane(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                 const OracleOptions& opt) {
  const int n = chain.dof();
  if (qd.size() != n || qdd.size() != n) throw std::invalid_argument("oracle: state dimension mismatch");
  const ChainNodes cn = chain_nodes(chain, q);
  const auto J = full_chain_jacobian(chain, q, opt);
  const Stencil st = central_stencil(2, opt.stencil);
  const double h = time_step(qd, qdd, opt);
  std::vector<Vec3> acc(cn.p.size(), Vec3::Zero()), p;
  for (size_t s = 0; s < st.offsets.size(); ++s) {
    const double t = st.offsets[s] * h;
    positions(chain, q + qd * t + 0.5 * t * t * qdd, p);
    for (size_t j = 0; j < p.size(); ++j) acc[j] += (st.w[s] / (h * h)) * p[j];
  }
  VecX out = VecX::Zero(n);
  for (size_t j = 0; j < J.size(); ++j) out += cn.dm[j] * J[j].transpose() * acc[j];
  return out;
}

PotentialResult oracle_potential(const ChainModel& chain, const VecX& q, const OracleOptions& opt) {
  const Vec3 g0 = chain.base_gravity();
  const ChainNodes cn = chain_nodes(chain, q);
  auto energy = [&](const VecX& qq) {
    std::vector<Vec3> p;
    positions(chain, qq, p);
    double U = 0.0;
    for (size_t j = 0; j < p.size(); ++j) U -= cn.dm[j] * g0.dot(p[j]);
    return U;
  };
  PotentialResult r;
  r.U = energy(q);
  r.g = VecX::Zero(chain.dof());
  const Stencil st = central_stencil(1, opt.stencil);
  for (int k = 0; k < chain.dof(); ++k)
    for (size_t s = 0; s < st.offsets.size(); ++s) {
      VecX qs = q;
      qs(k) += st.offsets[s] * opt.config_step;
      r.g(k) += st.w[s] / opt.config_step * energy(qs);
    }
  return r;
}

double oracle_elastic_energy(const ChainModel& chain, const VecX& q) {
  if (chain.stress_law == StressLaw::none) return 0.0;
  const Stencil st = central_stencil(1, 4);
  double U = 0.0;
  for (const auto& l : chain.links) {
    const int nB = l.body.dof();
    const Material& mat = l.body.model->material();
    if (nB == 0 || mat.C == 0.0) continue;
    const VecX qB = q.segment(l.offset + l.joint.dof(), nB);
    const double h = 1e-4 * l.body.model->domain().length_scale();
    for (const auto& nd : l.body.nodes) {
      Mat3 F = Mat3::Zero();
      for (int c = 0; c < 3; ++c)
        for (size_t s = 0; s < st.offsets.size(); ++s)
          F.col(c) += st.w[s] / h *
                      l.body.model->position(Vec3(nd.x + st.offsets[s] * h * Vec3::Unit(c)), qB);
      const double J = F.determinant();
      U += nd.w * mat.C * (std::pow(J, -2.0 / 3.0) * (F.transpose() * F).trace() - 3.0);
    }
  }
  return U;
}

VecX oracle_elastic_gradient(const ChainModel& chain, const VecX& q, const OracleOptions& opt) {
  const Stencil st = central_stencil(1, opt.stencil);
  VecX g = VecX::Zero(chain.dof());
  for (int k = 0; k < chain.dof(); ++k)
    for (size_t s = 0; s < st.offsets.size(); ++s) {
      VecX qs = q;
      qs(k) += st.offsets[s] * opt.config_step;
      g(k) += st.w[s] / opt.config_step * oracle_elastic_energy(chain, qs);
    }
  return g;
}

}  // namespace softid
