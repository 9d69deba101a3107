#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "softid/dynamics.hpp"

namespace softid {

struct SingularMassError : std::runtime_error {
  SingularMassError(const std::string& what, double min_eig)
      : std::runtime_error(what), min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

// qdd = M^-1 (nu - c - g - s) with (c + g + s, M) from one MID call.
VecX forward_dynamics(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& nu,
                      const DynamicsOptions& opt = {});

// Generalized input as a function of time and state.
using Controller = std::function<VecX(double t, const VecX& q, const VecX& qd)>;

enum class Integrator { rk4, semi_implicit };
std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);

struct EnergySample {
  double kinetic = 0.0;
  double gravity = 0.0;
  double elastic = 0.0;
  double total = 0.0;       // kinetic + gravity + elastic
  double dissipated = 0.0;  // accumulated Kelvin-Voigt loss
  double input_work = 0.0;  // accumulated qd' nu
};

struct SimOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  Integrator integrator = Integrator::rk4;
  int record_every = 1;
  bool energy = true;
  DynamicsOptions dyn{};
  // stop early once |qd|_inf and |ID(q, 0, 0) - nu| fall below these (0 disables)
  double settle_velocity = 0.0;
  double settle_residual = 0.0;
  // a step that fails is retried as two half steps, at most this deep
  int max_step_halvings = 6;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<VecX> q, qd, nu;
  std::vector<EnergySample> energy;
  bool aborted = false;
  int last_valid = -1;  // index of the last finite sample
  std::string message;
};

Trajectory simulate(const ChainModel& chain, const VecX& q0, const VecX& qd0,
                    const Controller& controller, const SimOptions& opt);

EnergySample energy_sample(const ChainModel& chain, const VecX& q, const VecX& qd);

// Maps actuator inputs u to generalized forces nu = A(q) u by virtual work.
class ActuationMap {
 public:
  virtual ~ActuationMap() = default;
  virtual int inputs() const = 0;
  // Actuator lengths or volumes.
  virtual VecX measure(const ChainModel& chain, const VecX& q) const = 0;
  // n x m matrix A = (d measure / d q)'
  virtual MatX matrix(const ChainModel& chain, const VecX& q) const = 0;
  VecX project(const ChainModel& chain, const VecX& q, const VecX& u) const {
    return matrix(chain, q) * u;
  }
};

struct ViaPoint {
  int body = 0;
  Vec3 x = Vec3::Zero();  // material coordinates
};

// Straight tendon segments between via points fixed to body material points.
class TendonMap final : public ActuationMap {
 public:
  explicit TendonMap(std::vector<std::vector<ViaPoint>> tendons);
  int inputs() const override { return static_cast<int>(tendons_.size()); }
  VecX measure(const ChainModel& chain, const VecX& q) const override;
  MatX matrix(const ChainModel& chain, const VecX& q) const override;

 private:
  std::vector<std::vector<ViaPoint>> tendons_;
};

struct Chamber {
  int body = 0;
  ReferenceDomain region;  // material sub-domain
  QuadOrder order{4, 8, 8};
};

// Chamber volumes V = int det(df/dx) dV over material sub-domains.
class ChamberVolumeMap final : public ActuationMap {
 public:
  explicit ChamberVolumeMap(std::vector<Chamber> chambers);
  int inputs() const override { return static_cast<int>(chambers_.size()); }
  VecX measure(const ChainModel& chain, const VecX& q) const override;
  MatX matrix(const ChainModel& chain, const VecX& q) const override;

 private:
  std::vector<Chamber> chambers_;
  std::vector<std::vector<VolumeNode>> nodes_;
};

struct StaticsOptions {
  double tol = 1e-8;
  int max_iter = 100;
  double fd_step = 1e-7;
  DynamicsOptions dyn{};
};

struct StaticsResult {
  VecX q;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

// Extra generalized force added to the equilibrium, e.g. A(q) u or a regulator.
using StaticLoad = std::function<VecX(const VecX& q)>;

// Newton-Raphson on r(q) = ID(q, 0, 0) - load(q) with a finite difference
// Jacobian and backtracking.
StaticsResult solve_statics(const ChainModel& chain, const VecX& q_guess,
                            const StaticLoad& load = nullptr, const StaticsOptions& opt = {});
StaticsResult solve_statics(const ChainModel& chain, const VecX& q_guess, const ActuationMap& act,
                            const VecX& u, const StaticsOptions& opt = {});

// PD with compensation of the potential forces at the setpoint. The
// feedforward ID(q_d, 0, 0) is evaluated once per setpoint.
class PdPlus {
 public:
  PdPlus(const ChainModel& chain, VecX Kp, VecX Kd, const DynamicsOptions& opt = {});
  void set_target(const VecX& q_d);
  const VecX& target() const { return q_d_; }
  const VecX& feedforward() const { return ff_; }
  VecX operator()(const VecX& q, const VecX& qd) const;

 private:
  const ChainModel* chain_;
  VecX Kp_, Kd_, q_d_, ff_;
  DynamicsOptions opt_;
};

struct ScalingRow {
  int bodies = 0;
  int dof = 0;
  double iid_median_ns = 0.0, iid_std_ns = 0.0;
  double oracle_median_ns = 0.0, oracle_std_ns = 0.0;
  double rel_diff_mean = 0.0, rel_diff_std = 0.0;
  double build_ns = 0.0;  // chain construction, not comparable to symbolic toolchains
};

struct ScalingOptions {
  int trials = 10;
  bool run_oracle = true;
  int oracle_max_bodies = 1 << 30;
  unsigned seed = 1;
  int quadrature = 4;  // per direction, kept small so timing reflects the recursion
  int jobs = 1;
};

// Planar PCC chains of the given sizes; random states in q in [-pi, pi],
// qd in [-10, 10], qdd in [-100, 100].
ChainModel planar_pcc_chain(int bodies, int quadrature = 4);
// Timing and agreement of iid against oracle_kane on random states of one chain.
ScalingRow benchmark_chain(const ChainModel& chain, const ScalingOptions& opt = {});
std::vector<ScalingRow> benchmark_scaling(const std::vector<int>& body_counts,
                                          const ScalingOptions& opt = {});

// Least-squares line through (x, y); returns R^2.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace softid
