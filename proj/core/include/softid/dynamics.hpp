#pragma once

#include <vector>

#include "softid/kinematics.hpp"

namespace softid {

// Volume integrals of one body, in the body frame, for the current state.
// r = p - p_com; Jacobians are 3 x n_i with joint columns zero.
struct BodyInertialData {
  double m = 0.0;
  Vec3 p_com = Vec3::Zero();
  Mat3X J_com;
  Vec3 pd_com = Vec3::Zero();
  Vec3 pdd_com = Vec3::Zero();  // includes the qdd contribution
  Mat3 I = Mat3::Zero();        // about the centre of mass
  Mat3 Id = Mat3::Zero();       // time derivative of I
  Vec3 h = Vec3::Zero();        // int r x rdot dm
  Vec3 h2 = Vec3::Zero();       // int r x rddot dm
  Mat3X S;                      // int skew(r) J_r dm
  MatX dI;                      // 9 x n_i, column k = vec(dI/dq_k)
  Mat3X X;                      // int rdot x J_r dm, column-wise
  VecX Jr_rdd;                  // int J_r' rddot dm
  MatX Mrr;                     // int J_r' J_r dm
  Vec3 centroid_residual = Vec3::Zero();       // int r dm
  Vec3 centroid_rate_residual = Vec3::Zero();  // int rdot dm
};

BodyInertialData body_integrals(const BodyLink& body, const BodyKinematics& kin, const VecX& qd_i,
                                const VecX& qdd_i);

struct Wrench {
  Vec3 F = Vec3::Zero();
  Vec3 T = Vec3::Zero();  // about the centre of mass for per-body terms
};

struct InertialTerms {
  Wrench w;
  VecX pi;
};
InertialTerms inertial_terms(const BodyInertialData& d, const BodyKinematics& kin);

struct GravityTerms {
  Vec3 F = Vec3::Zero();
  VecX pi;
};
// g0 is gravity in the chain base frame, R_i the base-to-body rotation.
GravityTerms gravity_terms(const BodyInertialData& d, const Mat3& R_i, const Vec3& g0);

struct StressTerms {
  Wrench w;
  VecX pi;           // n_i entries, joint entries zero
  double energy = 0.0;   // stored elastic energy (weak law only)
  double dissipation = 0.0;  // Rayleigh power qd' dR/dqd (weak law only)
};

struct StressOptions {
  StressLaw law = StressLaw::neo_hookean_weak;  // overridden by the chain in inverse_dynamics
  // body-force law: analytic spatial second derivatives for div B
  bool analytic_divergence = true;
  double fd_rel_step = 1e-5;
};

StressTerms stress_terms(const Link& link, const BodyKinematics& kin, const BodyInertialData& d,
                         const VecX& q_i, const VecX& qd_i, const StressOptions& opt = {});

// Elastic energy of one body under the weak law.
double elastic_energy(const Link& link, const VecX& q_i);

// Backward sweep: per-body wrenches in, generalized projections out.
// Torques are about each body's centre of mass.
VecX backward_recursion(const ChainModel& chain, const KinematicsCache& kin,
                        const std::vector<BodyInertialData>& data, const std::vector<Wrench>& w);

enum class GravityMode { explicit_terms, base_acceleration };

struct DynamicsOptions {
  bool inertia = true;
  bool gravity = true;
  bool stress = true;
  GravityMode gravity_mode = GravityMode::explicit_terms;
  StressOptions stress_opt{};
  int jobs = 1;  // workers for per-body integrals
};

struct DynamicsResult {
  VecX nu;
  MatX M;  // empty unless requested
};

// M(q) qdd + c(q, qd)
VecX iid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd, int jobs = 1);
// M(q) qdd + c(q, qd) + g(q) + s(q, qd)
VecX id(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
        const DynamicsOptions& opt = {});
DynamicsResult miid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                    int jobs = 1);
DynamicsResult mid(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& qdd,
                   const DynamicsOptions& opt = {});

// General entry point used by the four algorithms above.
DynamicsResult inverse_dynamics(const ChainModel& chain, const VecX& q, const VecX& qd,
                                const VecX& qdd, const DynamicsOptions& opt, bool with_mass);

// Per-body decomposition for inspection and tests.
struct BodyTerms {
  BodyInertialData data;
  InertialTerms inertial;
  GravityTerms gravity;
  StressTerms stress;
};
std::vector<BodyTerms> body_terms(const ChainModel& chain, const VecX& q, const VecX& qd,
                                  const VecX& qdd, const DynamicsOptions& opt = {});

// Sum of elastic energies and Rayleigh dissipation power over the chain.
// Both are zero unless the chain uses the weak Neo-Hookean law.
// Gravitational potential -sum m g0' p_com over bodies, base frame.
double gravity_potential(const ChainModel& chain, const VecX& q);
double chain_elastic_energy(const ChainModel& chain, const VecX& q);
double chain_dissipation_power(const ChainModel& chain, const VecX& q, const VecX& qd);

}  // namespace softid
