#include "softid/harness.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "softid/oracle.hpp"

namespace softid {

VecX forward_dynamics(const ChainModel& chain, const VecX& q, const VecX& qd, const VecX& nu,
                      const DynamicsOptions& opt) {
  const int n = chain.dof();
  if (nu.size() != n) throw std::invalid_argument("forward_dynamics: input dimension mismatch");
  const DynamicsResult r = mid(chain, q, qd, VecX::Zero(n), opt);
  Eigen::LLT<MatX> llt(r.M);
  if (llt.info() != Eigen::Success) {
    const double lmin = Eigen::SelfAdjointEigenSolver<MatX>(r.M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    throw SingularMassError("forward_dynamics: mass matrix not positive definite (smallest eigenvalue " +
                                std::to_string(lmin) + ")",
                            lmin);
  }
  return llt.solve(nu - r.nu);
}

std::string to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "semi_implicit"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "rk4") return Integrator::rk4;
  if (s == "semi_implicit") return Integrator::semi_implicit;
  throw std::invalid_argument("unknown integrator '" + s + "' (rk4 | semi_implicit)");
}

EnergySample energy_sample(const ChainModel& chain, const VecX& q, const VecX& qd) {
  const int n = chain.dof();
  EnergySample e;
  const MatX M = miid(chain, q, VecX::Zero(n), VecX::Zero(n)).M;
  e.kinetic = 0.5 * qd.dot(M * qd);
  e.gravity = gravity_potential(chain, q);
  e.elastic = chain_elastic_energy(chain, q);
  e.total = e.kinetic + e.gravity + e.elastic;
  return e;
}

namespace {

bool finite(const VecX& v) { return v.allFinite(); }

}  // namespace

Trajectory simulate(const ChainModel& chain, const VecX& q0, const VecX& qd0,
                    const Controller& controller, const SimOptions& opt) {
  const int n = chain.dof();
  if (!(opt.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  if (q0.size() != n || qd0.size() != n) throw std::invalid_argument("simulate: state dimension mismatch");
  if (!finite(q0) || !finite(qd0)) throw std::invalid_argument("simulate: non-finite initial state");

  auto input = [&](double t, const VecX& q, const VecX& qd) -> VecX {
    return controller ? controller(t, q, qd) : VecX::Zero(n);
  };
  // first-order system y = (q, qd)
  auto rhs = [&](double t, const VecX& y) -> VecX {
    VecX dy(2 * n);
    const VecX q = y.head(n), qd = y.tail(n);
    dy.head(n) = qd;
    dy.tail(n) = forward_dynamics(chain, q, qd, input(t, q, qd), opt.dyn);
    return dy;
  };

  Trajectory tr;
  VecX y(2 * n);
  y << q0, qd0;
  double t = 0.0;
  EnergySample acc;
  double p_diss = opt.energy ? chain_dissipation_power(chain, q0, qd0) : 0.0;
  VecX nu = input(0.0, q0, qd0);
  double p_in = qd0.dot(nu);
  auto record = [&]() {
    tr.t.push_back(t);
    tr.q.push_back(y.head(n));
    tr.qd.push_back(y.tail(n));
    tr.nu.push_back(nu);
    if (opt.energy) {
      EnergySample e = energy_sample(chain, y.head(n), y.tail(n));
      e.dissipated = acc.dissipated;
      e.input_work = acc.input_work;
      tr.energy.push_back(e);
    }
    tr.last_valid = static_cast<int>(tr.t.size()) - 1;
  };
  record();

  const long steps = std::lround(std::ceil(opt.t_end / opt.dt - 1e-9));
  const double h = opt.dt;
  auto step = [&](double t0, const VecX& y0, double dt) -> VecX {
    if (opt.integrator == Integrator::rk4) {
      const VecX k1 = rhs(t0, y0);
      const VecX k2 = rhs(t0 + 0.5 * dt, y0 + 0.5 * dt * k1);
      const VecX k3 = rhs(t0 + 0.5 * dt, y0 + 0.5 * dt * k2);
      const VecX k4 = rhs(t0 + dt, y0 + dt * k3);
      return y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // linearly implicit Euler with a finite-difference Jacobian
    const VecX k = rhs(t0, y0);
    MatX J(2 * n, 2 * n);
    for (int c = 0; c < 2 * n; ++c) {
      const double d = 1e-7 * std::max(1.0, std::abs(y0(c)));
      VecX yp = y0;
      yp(c) += d;
      J.col(c) = (rhs(t0, yp) - k) / d;
    }
    const Eigen::PartialPivLU<MatX> lu(MatX::Identity(2 * n, 2 * n) - dt * J);
    const VecX dy = dt * lu.solve(k);
    const VecX y1 = y0 + dy;
    if (!finite(y1)) return y1;
    // the linearization must explain the step: one Newton correction on the
    // implicit Euler equations has to be small next to the step itself
    const VecX corr = lu.solve(y0 + dt * rhs(t0, y1) - y1);
    if (corr.lpNorm<Eigen::Infinity>() > 0.5 * dy.lpNorm<Eigen::Infinity>() + 1e-12)
      throw std::domain_error("step rejected: linearization does not hold over dt");
    return y1;
  };
  // a failed step (inverted element, non-finite state) is retried as two half steps
  std::function<VecX(double, const VecX&, double, int)> advance = [&](double t0, const VecX& y0, double dt,
                                                                      int depth) -> VecX {
    try {
      VecX y1 = step(t0, y0, dt);
      if (finite(y1)) return y1;
      if (depth >= opt.max_step_halvings) return y1;
    } catch (const std::domain_error&) {
      if (depth >= opt.max_step_halvings) throw;
    }
    const VecX ym = advance(t0, y0, 0.5 * dt, depth + 1);
    if (!finite(ym)) return ym;
    return advance(t0 + 0.5 * dt, ym, 0.5 * dt, depth + 1);
  };
  for (long s = 1; s <= steps; ++s) {
    VecX yn;
    try {
      yn = advance(t, y, h, 0);
    } catch (const std::exception& e) {
      tr.aborted = true;
      tr.message = "step " + std::to_string(s) + ": " + e.what();
      return tr;
    }
    if (!finite(yn)) {
      tr.aborted = true;
      tr.message = "non-finite state at step " + std::to_string(s);
      return tr;
    }
    y = yn;
    t = s * h;
    nu = input(t, y.head(n), y.tail(n));
    if (opt.energy) {
      const double pd = chain_dissipation_power(chain, y.head(n), y.tail(n));
      const double pi = y.tail(n).dot(nu);
      acc.dissipated += 0.5 * h * (p_diss + pd);
      acc.input_work += 0.5 * h * (p_in + pi);
      p_diss = pd;
      p_in = pi;
    }
    bool settled = false;
    if (opt.settle_velocity > 0.0 && y.tail(n).lpNorm<Eigen::Infinity>() < opt.settle_velocity) {
      const VecX r = id(chain, y.head(n), VecX::Zero(n), VecX::Zero(n), opt.dyn) - nu;
      settled = r.norm() < opt.settle_residual;
    }
    if (s % std::max(1, opt.record_every) == 0 || s == steps || settled) record();
    if (settled) {
      tr.message = "settled at t = " + std::to_string(t);
      break;
    }
  }
  return tr;
}

// ---- actuation ----

TendonMap::TendonMap(std::vector<std::vector<ViaPoint>> tendons) : tendons_(std::move(tendons)) {
  for (const auto& t : tendons_)
    if (t.size() < 2) throw std::invalid_argument("tendon needs at least two via points");
}

namespace {

struct ViaState {
  Vec3 p;
  Mat3X J;
};

std::vector<std::vector<ViaState>> via_states(const ChainModel& chain, const VecX& q,
                                              const std::vector<std::vector<ViaPoint>>& tendons) {
  const VecX z = VecX::Zero(chain.dof());
  const KinematicsCache kin = forward_pass(chain, q, z, z, Vec3::Zero());
  std::vector<std::vector<ViaState>> out;
  for (const auto& t : tendons) {
    std::vector<ViaState> vs;
    for (const auto& v : t) {
      if (v.body < 0 || v.body >= chain.size()) throw std::invalid_argument("via point body out of range");
      ViaState s;
      s.J = point_jacobian(chain, kin, v.body, v.x, &s.p);
      vs.push_back(s);
    }
    out.push_back(vs);
  }
  return out;
}

}  // namespace

VecX TendonMap::measure(const ChainModel& chain, const VecX& q) const {
  const auto st = via_states(chain, q, tendons_);
  VecX l = VecX::Zero(inputs());
  for (int i = 0; i < inputs(); ++i)
    for (size_t k = 0; k + 1 < st[i].size(); ++k) l(i) += (st[i][k + 1].p - st[i][k].p).norm();
  return l;
}

MatX TendonMap::matrix(const ChainModel& chain, const VecX& q) const {
  const auto st = via_states(chain, q, tendons_);
  MatX A = MatX::Zero(chain.dof(), inputs());
  for (int i = 0; i < inputs(); ++i)
    for (size_t k = 0; k + 1 < st[i].size(); ++k) {
      const Vec3 d = st[i][k + 1].p - st[i][k].p;
      const double len = d.norm();
      if (len == 0.0) throw std::domain_error("tendon segment of zero length");
      A.col(i) += (st[i][k + 1].J - st[i][k].J).transpose() * (d / len);
    }
  return A;
}

ChamberVolumeMap::ChamberVolumeMap(std::vector<Chamber> chambers) : chambers_(std::move(chambers)) {
  for (const auto& c : chambers_) nodes_.push_back(volume_nodes(c.region, c.order));
}

VecX ChamberVolumeMap::measure(const ChainModel& chain, const VecX& q) const {
  VecX V = VecX::Zero(inputs());
  for (int i = 0; i < inputs(); ++i) {
    const Link& l = chain.links.at(chambers_[i].body);
    const VecX qB = q.segment(l.offset + l.joint.dof(), l.body.dof());
    for (const auto& nd : nodes_[i]) V(i) += nd.w * l.body.model->jacobian_x(nd.x, qB).determinant();
  }
  return V;
}

MatX ChamberVolumeMap::matrix(const ChainModel& chain, const VecX& q) const {
  MatX A = MatX::Zero(chain.dof(), inputs());
  for (int i = 0; i < inputs(); ++i) {
    const Link& l = chain.links.at(chambers_[i].body);
    const int nB = l.body.dof();
    if (nB == 0) continue;
    const VecX qB = q.segment(l.offset + l.joint.dof(), nB);
    VecXT<JetJet> qj(nB);
    for (int k = 0; k < nB; ++k) qj(k) = JetJet::seed(Jet10(qB(k)), k, nB);
    std::vector<Vec3> xs;
    for (const auto& nd : nodes_[i]) xs.push_back(nd.x);
    std::vector<Vec3T<JetJet>> f;
    l.body.model->map_points(xs, qj, f);
    VecX g = VecX::Zero(nB);
    for (size_t j = 0; j < xs.size(); ++j) {
      Mat3T<Jet10> F;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          Jet10 e(c < f[j](r).a.n ? f[j](r).a.v[c] : 0.0);
          e.n = nB;
          for (int k = 0; k < nB; ++k) {
            const Jet10 d = k < f[j](r).n ? f[j](r).v[k] : Jet10(0.0);
            e.v[k] = c < d.n ? d.v[c] : 0.0;
          }
          F(r, c) = e;
        }
      const Jet10 det = F.determinant();
      for (int k = 0; k < nB; ++k) g(k) += nodes_[i][j].w * (k < det.n ? det.v[k] : 0.0);
    }
    A.block(l.offset + l.joint.dof(), i, nB, 1) = g;
  }
  return A;
}

// ---- statics ----

StaticsResult solve_statics(const ChainModel& chain, const VecX& q_guess, const StaticLoad& load,
                            const StaticsOptions& opt) {
  const int n = chain.dof();
  if (q_guess.size() != n || !finite(q_guess))
    throw std::invalid_argument("solve_statics: initial guess must be finite with n entries");
  const VecX z = VecX::Zero(n);
  auto residual = [&](const VecX& q) -> VecX {
    VecX r = id(chain, q, z, z, opt.dyn);
    if (load) r -= load(q);
    return r;
  };
  StaticsResult res;
  res.q = q_guess;
  VecX r = residual(res.q);
  double rn = r.norm();
  res.history.push_back(rn);
  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (rn < opt.tol) {
      res.converged = true;
      break;
    }
    MatX J(n, n);
    for (int k = 0; k < n; ++k) {
      const double h = opt.fd_step * std::max(1.0, std::abs(res.q(k)));
      VecX qp = res.q, qm = res.q;
      qp(k) += h;
      qm(k) -= h;
      J.col(k) = (residual(qp) - residual(qm)) / (2.0 * h);
    }
    const VecX dq = -J.fullPivLu().solve(r);
    if (!finite(dq)) break;
    double alpha = 1.0;
    VecX qn, rnew;
    double nn = rn;
    bool accepted = false;
    while (alpha > 1e-8) {
      qn = res.q + alpha * dq;
      try {
        rnew = residual(qn);
        nn = rnew.norm();
        if (std::isfinite(nn) && nn < (1.0 - 1e-4 * alpha) * rn) {
          accepted = true;
          break;
        }
      } catch (const std::domain_error&) {
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    res.q = qn;
    r = rnew;
    rn = nn;
    res.history.push_back(rn);
  }
  res.residual = rn;
  if (rn < opt.tol) res.converged = true;
  return res;
}

StaticsResult solve_statics(const ChainModel& chain, const VecX& q_guess, const ActuationMap& act,
                            const VecX& u, const StaticsOptions& opt) {
  if (u.size() != act.inputs()) throw std::invalid_argument("solve_statics: input dimension mismatch");
  return solve_statics(chain, q_guess, [&](const VecX& q) { return act.project(chain, q, u); }, opt);
}

// ---- PD+ ----

PdPlus::PdPlus(const ChainModel& chain, VecX Kp, VecX Kd, const DynamicsOptions& opt)
    : chain_(&chain), Kp_(std::move(Kp)), Kd_(std::move(Kd)), opt_(opt) {
  const int n = chain.dof();
  if (Kp_.size() != n || Kd_.size() != n) throw std::invalid_argument("PD+: gain dimension mismatch");
  if ((Kp_.array() <= 0.0).any() || (Kd_.array() <= 0.0).any())
    throw std::invalid_argument("PD+: gains must be positive");
  set_target(VecX::Zero(n));
}

void PdPlus::set_target(const VecX& q_d) {
  const int n = chain_->dof();
  if (q_d.size() != n) throw std::invalid_argument("PD+: setpoint dimension mismatch");
  q_d_ = q_d;
  ff_ = id(*chain_, q_d, VecX::Zero(n), VecX::Zero(n), opt_);
}

VecX PdPlus::operator()(const VecX& q, const VecX& qd) const {
  return Kp_.cwiseProduct(q_d_ - q) - Kd_.cwiseProduct(qd) + ff_;
}

// ---- scaling benchmark ----

ChainModel planar_pcc_chain(int bodies, int quadrature) {
  if (bodies < 1) throw std::invalid_argument("planar_pcc_chain: need at least one body");
  ChainModel c;
  const double L0 = 0.3, R = 0.01;
  for (int i = 0; i < bodies; ++i) {
    Link l;
    l.body.model = make_cosserat_body(ReferenceDomain::cylinder(R, L0), Material{1070.0, 0.0, 0.0},
                                      StrainBasis::pcc_planar(L0));
    l.body.x_J = Vec3(0, 0, L0);
    l.body.x_a = Vec3(R, 0, L0);
    l.body.x_b = Vec3(0, R, L0);
    l.body.order = {quadrature, quadrature, quadrature};
    c.links.push_back(l);
  }
  c.stress_law = StressLaw::none;
  c.finalize();
  return c;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / (v.size() - 1));
}

template <class F>
double time_ns(F&& f, double min_ns = 2e5) {
  using clk = std::chrono::steady_clock;
  int reps = 1;
  for (;;) {
    const auto t0 = clk::now();
    for (int r = 0; r < reps; ++r) f();
    const double ns = std::chrono::duration<double, std::nano>(clk::now() - t0).count();
    if (ns >= min_ns || reps >= (1 << 20)) return ns / reps;
    reps *= 2;
  }
}

}  // namespace

ScalingRow benchmark_chain(const ChainModel& chain, const ScalingOptions& opt) {
  if (opt.trials < 10) throw std::invalid_argument("benchmark: trials must be at least 10");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalingRow row;
  row.bodies = chain.size();
  const int n = chain.dof();
  row.dof = n;
  const bool oracle = opt.run_oracle && chain.size() <= opt.oracle_max_bodies;
  std::vector<double> ti, to, rd;
  for (int k = 0; k < opt.trials; ++k) {
    VecX q(n), qd(n), qdd(n);
    for (int j = 0; j < n; ++j) q(j) = std::numbers::pi * u(rng);
    for (int j = 0; j < n; ++j) qd(j) = 10.0 * u(rng);
    for (int j = 0; j < n; ++j) qdd(j) = 100.0 * u(rng);
    VecX a, b;
    ti.push_back(time_ns([&] { a = iid(chain, q, qd, qdd, opt.jobs); }));
    if (oracle) {
      to.push_back(time_ns([&] { b = oracle_kane(chain, q, qd, qdd); }, 0.0));
      rd.push_back((a - b).norm() / std::max(b.norm(), 1e-12));
    }
  }
  row.iid_median_ns = median(ti);
  row.iid_std_ns = stddev(ti);
  if (!to.empty()) {
    row.oracle_median_ns = median(to);
    row.oracle_std_ns = stddev(to);
    double mu = 0.0;
    for (double x : rd) mu += x;
    row.rel_diff_mean = mu / rd.size();
    row.rel_diff_std = stddev(rd);
  }
  return row;
}

std::vector<ScalingRow> benchmark_scaling(const std::vector<int>& body_counts,
                                          const ScalingOptions& opt) {
  if (opt.trials < 10) throw std::invalid_argument("benchmark_scaling: trials must be at least 10");
  std::vector<ScalingRow> rows;
  for (int N : body_counts) {
    const auto t0 = std::chrono::steady_clock::now();
    const ChainModel chain = planar_pcc_chain(N, opt.quadrature);
    const double build = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
    ScalingOptions o = opt;
    o.seed = opt.seed + static_cast<unsigned>(N);
    ScalingRow row = benchmark_chain(chain, o);
    row.build_ns = build;
    rows.push_back(row);
  }
  return rows;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t m = x.size();
  if (m != y.size() || m < 2) throw std::invalid_argument("linear_fit_r2: need matching samples");
  double mx = 0, my = 0;
  for (size_t i = 0; i < m; ++i) mx += x[i], my += y[i];
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace softid
