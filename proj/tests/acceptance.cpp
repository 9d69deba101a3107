// One line per acceptance criterion. Exit status is the number of failures.

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "softid/dynamics.hpp"
#include "softid/harness.hpp"
#include "softid/oracle.hpp"
#include "support.hpp"

using namespace softid;
using Clock = std::chrono::steady_clock;

namespace {

const std::vector<std::string> kFixtures = {"rigid_2r", "pcc_sim6", "pcs_2body", "pac_1body", "lvp_1body"};

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& name : kFixtures) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(101);
    for (int k = 0; k < 50; ++k) {
      const VecX q = s(n, 0.5), qd = s(n), qdd = s(n);
      worst = std::max(worst, test::rel_err(iid(chain, q, qd, qdd), oracle_kane(chain, q, qd, qdd)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 60.0, fmt("max rel diff %.2e over 250 states in %.1f s", worst, secs)};
}

Outcome mass_matrix() {
  double cols = 0, orc = 0, sym = 0;
  bool chol = true;
  for (const auto& name : kFixtures) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(202);
    for (int k = 0; k < 20; ++k) {
      const VecX q = s(n, 0.5), z = VecX::Zero(n);
      const MatX M = miid(chain, q, z, z).M;
      MatX Mc(n, n);
      for (int j = 0; j < n; ++j) Mc.col(j) = iid(chain, q, z, VecX::Unit(n, j));
      cols = std::max(cols, test::rel_err(M, Mc));
      orc = std::max(orc, test::rel_err(M, oracle_mass(chain, q)));
      sym = std::max(sym, (M - M.transpose()).norm() / M.norm());
      chol = chol && Eigen::LLT<MatX>(M).info() == Eigen::Success;
    }
  }
  return {cols <= 1e-10 && orc <= 1e-8 && sym <= 1e-9 && chol,
          fmt("vs columns %.1e, vs oracle %.1e, asymmetry %.1e, cholesky ", cols, orc, sym) +
              (chol ? "ok" : "failed")};
}

Outcome two_link_closed_form() {
  const ChainModel chain = test::load_model("rigid_2r");
  const test::TwoLink ref;
  test::Sampler s(303);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const VecX q = s(2, 3.14), qd = s(2, 3.0), qdd = s(2, 3.0);
    const auto r = mid(chain, q, qd, qdd);
    worst = std::max(worst, test::rel_err(r.M, ref.M(q)));
    worst = std::max(worst, test::rel_err(r.nu, VecX(ref.M(q) * qdd + ref.c(q, qd) + ref.gvec(q))));
  }
  return {worst <= 1e-9, fmt("max rel diff %.2e over 100 states", worst)};
}

Outcome trivial_identities() {
  double worst = 0.0;
  for (const auto& name : kFixtures) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(404);
    for (int k = 0; k < 10; ++k) {
      const VecX q = s(n, 0.5), qd = s(n), qdd = s(n), z = VecX::Zero(n);
      const double scale = std::max(1.0, iid(chain, q, qd, qdd).norm());
      // nothing moves: no inertial force
      worst = std::max(worst, iid(chain, q, z, z).norm() / scale);
      // at rest only M qdd remains
      const auto r = miid(chain, q, z, qdd);
      worst = std::max(worst, (r.nu - r.M * qdd).norm() / scale);
    }
  }
  return {worst <= 1e-12, fmt("max residual %.2e", worst)};
}

Outcome scaling() {
  ScalingOptions o;
  o.trials = 10;
  o.seed = 5;
  const std::vector<int> Ns = {2, 4, 8, 16, 32};
  const auto rows = benchmark_scaling(Ns, o);
  std::vector<double> x, y;
  for (const auto& r : rows) x.push_back(r.bodies), y.push_back(r.iid_median_ns);
  const double r2 = linear_fit_r2(x, y);
  const double ratio = rows[4].iid_median_ns / rows[3].iid_median_ns;
  const double o1 = rows[3].oracle_median_ns / rows[2].oracle_median_ns;
  const double o2 = rows[4].oracle_median_ns / rows[3].oracle_median_ns;
  return {r2 >= 0.98 && ratio <= 2.6 && std::min(o1, o2) >= 3.0,
          fmt("R^2 %.4f, t32/t16 %.2f, oracle t16/t8 %.2f, t32/t16 %.2f", r2, ratio, o1, o2)};
}

Outcome round_trip() {
  double worst = 0.0;
  for (const auto& name : kFixtures) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(606);
    for (int k = 0; k < 10; ++k) {
      // small deformations keep soft bodies inside the stress law's domain
      const VecX q = s(n, name == "rigid_2r" ? 3.0 : 0.05), qd = s(n), nu = s(n);
      const VecX back = id(chain, q, qd, forward_dynamics(chain, q, qd, nu));
      worst = std::max(worst, (back - nu).norm() / std::max(1.0, nu.norm()));
    }
  }
  return {worst <= 1e-7, fmt("max rel residual %.2e", worst)};
}

Outcome energy() {
  std::string detail;
  bool ok = true;
  {
    const ChainModel chain = test::load_model("pendulum");
    SimOptions o;
    o.t_end = 10.0;
    o.dt = 1e-3;
    o.record_every = 10;
    const auto tr = simulate(chain, VecX::Constant(1, 0.5), VecX::Zero(1), nullptr, o);
    double drift = 0.0;
    const double E0 = tr.energy.front().total;
    for (const auto& e : tr.energy) drift = std::max(drift, std::abs(e.total - E0) / std::abs(E0));
    ok = ok && !tr.aborted && drift < 1e-5;
    detail += fmt("pendulum drift %.1e; ", drift);
  }
  {
    const ChainModel chain = test::load_model("pcc_sim6");
    const int n = chain.dof();
    const VecX q0 = parse_state(read_text_file(test::fixture("pcc_sim6_q0.json")), n).q;
    SimOptions o;
    o.t_end = 10.0;
    o.dt = 0.02;
    o.integrator = Integrator::semi_implicit;
    const auto tr = simulate(chain, q0, VecX::Zero(n), nullptr, o);
    const double E0 = std::abs(tr.energy.front().total);
    double rise = 0.0;
    for (size_t k = 1; k < tr.energy.size(); ++k)
      rise = std::max(rise, tr.energy[k].total - tr.energy[k - 1].total);
    const VecX qe = tr.q.back();
    const double res = id(chain, qe, VecX::Zero(n), VecX::Zero(n)).norm();
    const auto st = solve_statics(chain, q0);
    const double gap = st.converged ? (st.q - qe).lpNorm<Eigen::Infinity>() : INFINITY;
    ok = ok && !tr.aborted && rise <= 1e-9 * E0 && res < 1e-4 && gap < 1e-4;
    detail += fmt("damped max energy rise %.1e (E0 %.0f), |ID(q_end)| %.1e, statics gap %.1e", rise, E0,
                  res, gap);
  }
  return {ok, detail};
}

Outcome structure() {
  double sup = 0, jac = 0, det = 0, cen = 0;
  for (const auto& name : kFixtures) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(808);
    for (int k = 0; k < 5; ++k) {
      const VecX q = s(n, 0.05), qd = s(n), qdd = s(n);
      DynamicsOptions a, b, c;
      a.gravity = a.stress = false;
      b.inertia = b.stress = false;
      c.inertia = c.gravity = false;
      const VecX full = id(chain, q, qd, qdd);
      const VecX parts = id(chain, q, qd, qdd, a) + id(chain, q, qd, qdd, b) + id(chain, q, qd, qdd, c);
      sup = std::max(sup, (full - parts).norm() / std::max(1.0, full.norm()));

      const auto cache = forward_pass(chain, q, qd, qdd, Vec3::Zero());
      const auto cache0 = forward_pass(chain, q, qd, VecX::Zero(n), Vec3::Zero());
      for (int i = 0; i < chain.size(); ++i) {
        const auto& bk = cache.bodies[i];
        const auto J = test::frame_jacobian(chain, cache, i);
        const double sv = std::max(1.0, qd.norm()), sa = std::max(1.0, qdd.norm());
        jac = std::max(jac, (bk.base.R * bk.v - J.Jv * qd).norm() / sv);
        jac = std::max(jac, (bk.base.R * bk.w - J.Jw * qd).norm() / sv);
        jac = std::max(jac, (bk.base.R * (bk.a - cache0.bodies[i].a) - J.Jv * qdd).norm() / sa);
        jac = std::max(jac, (bk.base.R * (bk.wd - cache0.bodies[i].wd) - J.Jw * qdd).norm() / sa);
      }
      const auto terms = body_terms(chain, q, qd, qdd);
      for (int i = 0; i < chain.size(); ++i) {
        const auto& d = terms[i].data;
        const double L = chain.links[i].body.model->domain().length_scale();
        cen = std::max(cen, d.centroid_residual.norm() / (d.m * L));
      }
    }
    for (const auto& l : chain.links) {
      if (l.body.model->kind() != "lvp") continue;
      for (int k = 0; k < 20; ++k) {
        const VecX qb = s(l.body.dof(), 0.5);
        for (const auto& nd : l.body.nodes)
          det = std::max(det, std::abs(l.body.model->jacobian_x(nd.x, qb).determinant() - 1.0));
      }
    }
  }
  return {sup <= 1e-12 && jac <= 1e-10 && det <= 1e-6 && cen < 1e-6,
          fmt("superposition %.1e, jacobian identities %.1e, lvp |det-1| %.1e, centroid %.1e m L", sup, jac,
              det, cen)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"iid matches the brute-force oracle", oracle_equivalence},
      {"mass matrix consistency", mass_matrix},
      {"two-link arm matches its closed-form Lagrangian", two_link_closed_form},
      {"trivial identities", trivial_identities},
      {"linear scaling against the oracle", scaling},
      {"inverse/forward dynamics round trip", round_trip},
      {"energy behaviour in simulation", energy},
      {"structural identities", structure},
  };
  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
