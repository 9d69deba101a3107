#pragma once

#include <random>
#include <string>

#include "softid/model_io.hpp"

namespace softid::test {

inline std::string fixture(const std::string& name) {
  return std::string(SOFTID_FIXTURE_DIR) + "/" + name;
}

inline ChainModel load_model(const std::string& name) {
  return build_chain(load_chain(fixture(name + ".json")));
}

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> u{-1.0, 1.0};
  explicit Sampler(unsigned seed = 7) : rng(seed) {}
  VecX operator()(int n, double scale = 1.0) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * u(rng);
    return v;
  }
};

inline double rel_err(const VecX& a, const VecX& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}
inline double rel_err(const MatX& a, const MatX& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Hand-derived Lagrangian of the planar two-link arm in rigid_2r.json:
// unit-length links of mass 1, centre of mass at the midpoint, box
// cross-section 0.1 x 0.1, gravity along -y.
struct TwoLink {
  double m = 1.0, l = 1.0, lc = 0.5, g = 9.81;
  double Izz = 1.0 * (1.0 + 0.01) / 12.0;
  MatX M(const VecX& q) const {
    const double c2 = std::cos(q(1));
    MatX Mq(2, 2);
    Mq(0, 0) = 2 * Izz + m * lc * lc + m * (l * l + lc * lc + 2 * l * lc * c2);
    Mq(0, 1) = Mq(1, 0) = Izz + m * (lc * lc + l * lc * c2);
    Mq(1, 1) = Izz + m * lc * lc;
    return Mq;
  }
  VecX c(const VecX& q, const VecX& qd) const {
    const double h = m * l * lc * std::sin(q(1));
    VecX v(2);
    v(0) = -h * (2 * qd(0) * qd(1) + qd(1) * qd(1));
    v(1) = h * qd(0) * qd(0);
    return v;
  }
  VecX gvec(const VecX& q) const {
    VecX v(2);
    v(1) = m * lc * g * std::cos(q(0) + q(1));
    v(0) = (m * lc + m * l) * g * std::cos(q(0)) + v(1);
    return v;
  }
};

}  // namespace softid::test

#include "softid/kinematics.hpp"

namespace softid::test {

// Base-frame Jacobians of the origin of frame i, assembled from the
// per-link projection matrices.
struct FrameJacobian {
  Mat3X Jv, Jw;
};
inline FrameJacobian frame_jacobian(const ChainModel& chain, const KinematicsCache& cache, int i) {
  FrameJacobian f{Mat3X::Zero(3, chain.dof()), Mat3X::Zero(3, chain.dof())};
  const Vec3 p0 = cache.bodies[i].base.t;
  for (int j = 0; j <= i; ++j) {
    const auto& bj = cache.bodies[j];
    const Projection P = projection_matrices(cache, j);
    const Vec3 pj = inverse(bj.base).apply(p0);
    const int o = chain.links[j].offset, d = chain.links[j].dof();
    f.Jv.middleCols(o, d) += bj.base.R * (P.Pv.transpose() - skew(pj) * P.Pw.transpose());
    f.Jw.middleCols(o, d) += bj.base.R * P.Pw.transpose();
  }
  return f;
}

}  // namespace softid::test
