#pragma once

// Brute-force baselines built only from forward kinematics in plain double
// arithmetic and finite differences. Slow on purpose.

#include <vector>

#include "softid/kinematics.hpp"

namespace softid {

struct OracleOptions {
  // Central stencil order for all finite differences: 2, 4 or 6.
  int stencil = 6;
  // Configuration step for Jacobians.
  double config_step = 1e-3;
  // Time step along q(t) = q + qd t + qdd t^2 / 2. Zero picks a step scaled
  // by the state magnitude.
  double time_step = 0.0;
};

// Every quadrature node of the chain, in the chain base frame.
struct ChainNodes {
  std::vector<Vec3> p;
  std::vector<double> dm;
  std::vector<int> body;
};

ChainNodes chain_nodes(const ChainModel& chain, const VecX& q);

// Per-node d p / d q (3 x n), base frame.
std::vector<Mat3X> full_chain_jacobian(const ChainModel& chain, const VecX& q,
                                       const OracleOptions& opt = {});

MatX oracle_mass(const ChainModel& chain, const VecX& q, const OracleOptions& opt = {});

// M(q) qdd + c(q, qd) by summing J' pddot dm over all nodes.
VecX oracle_kane(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                 const OracleOptions& opt = {});

struct PotentialResult {
  VecX g;  // dU/dq
  double U = 0.0;
};
PotentialResult oracle_potential(const ChainModel& chain, const VecX& q,
                                 const OracleOptions& opt = {});

// Weak-law elastic energy with deformation gradients from finite differences
// of positions, and its configuration gradient.
double oracle_elastic_energy(const ChainModel& chain, const VecX& q);
VecX oracle_elastic_gradient(const ChainModel& chain, const VecX& q, const OracleOptions& opt = {});

// Central difference weights for the first or second derivative.
struct Stencil {
  std::vector<int> offsets;
  std::vector<double> w;
};
Stencil central_stencil(int derivative, int order);

}  // namespace softid
