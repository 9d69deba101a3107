#include <gtest/gtest.h>

#include <cmath>

#include "softid/dynamics.hpp"
#include "softid/oracle.hpp"
#include "support.hpp"

using namespace softid;

namespace {

DynamicsOptions only(bool inertia, bool gravity, bool stress) {
  DynamicsOptions o;
  o.inertia = inertia;
  o.gravity = gravity;
  o.stress = stress;
  return o;
}

}  // namespace

TEST(Dynamics, TwoLinkClosedForm) {
  const ChainModel chain = test::load_model("rigid_2r");
  const test::TwoLink ref;
  test::Sampler s(1);
  for (int t = 0; t < 20; ++t) {
    const VecX q = s(2, 3.0), qd = s(2, 2.0), qdd = s(2, 2.0);
    const auto r = mid(chain, q, qd, qdd);
    EXPECT_LT(test::rel_err(r.M, ref.M(q)), 1e-12);
    const VecX expect = ref.M(q) * qdd + ref.c(q, qd) + ref.gvec(q);
    EXPECT_LT(test::rel_err(r.nu, expect), 1e-12);
    EXPECT_LT(test::rel_err(iid(chain, q, qd, VecX::Zero(2)), ref.c(q, qd)), 1e-12);
  }
}

TEST(Dynamics, TrivialIdentities) {
  for (const char* name : {"rigid_2r", "pcc_sim6", "pcs_2body", "pac_1body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(2);
    const VecX q = s(n, 0.3), qd = s(n), qdd = s(n), z = VecX::Zero(n);
    const double scale = std::max(1.0, iid(chain, q, qd, qdd).norm());
    EXPECT_LT(iid(chain, q, z, z).norm(), 1e-12 * scale) << name;
    // c(q, 0) = 0 so iid at zero velocity is M qdd
    const auto r = miid(chain, q, z, qdd);
    EXPECT_LT((r.nu - r.M * qdd).norm(), 1e-12 * scale) << name;
    // linear in qdd
    const VecX a = iid(chain, q, qd, qdd), b = iid(chain, q, qd, z);
    EXPECT_LT((a - b - miid(chain, q, qd, z).M * qdd).norm(), 1e-10 * scale) << name;
  }
}

TEST(Dynamics, Superposition) {
  for (const char* name : {"pcc_sim6", "pcs_2body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(3);
    const VecX q = s(n, 0.05), qd = s(n), qdd = s(n);
    const VecX full = id(chain, q, qd, qdd);
    const VecX parts = id(chain, q, qd, qdd, only(true, false, false)) +
                       id(chain, q, qd, qdd, only(false, true, false)) +
                       id(chain, q, qd, qdd, only(false, false, true));
    EXPECT_LT((full - parts).norm(), 1e-12 * std::max(1.0, full.norm())) << name;
  }
}

TEST(Dynamics, GravityModesAgree) {
  for (const char* name : {"rigid_2r", "pcs_2body", "pac_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(4);
    const VecX q = s(n, 0.2), z = VecX::Zero(n);
    DynamicsOptions a = only(true, true, false), b = a;
    b.gravity_mode = GravityMode::base_acceleration;
    const VecX ga = id(chain, q, z, z, a), gb = id(chain, q, z, z, b);
    EXPECT_LT((ga - gb).norm(), 1e-10 * std::max(1.0, ga.norm())) << name;
  }
}

TEST(Dynamics, GravityIsPotentialGradient) {
  for (const char* name : {"rigid_2r", "pcs_2body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(5);
    const VecX q = s(n, 0.2), z = VecX::Zero(n);
    const VecX g = id(chain, q, z, z, only(false, true, false));
    const VecX go = oracle_potential(chain, q).g;
    EXPECT_LT(test::rel_err(g, go), 1e-8) << name;
  }
}

TEST(Dynamics, WeakStressIsEnergyGradient) {
  for (const char* name : {"pcc_sim6", "pcs_2body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(6);
    const VecX q = s(n, 0.05), z = VecX::Zero(n);
    const VecX st = id(chain, q, z, z, only(false, false, true));
    OracleOptions o;
    o.config_step = 1e-4;
    const VecX ref = oracle_elastic_gradient(chain, q, o);
    EXPECT_LT((st - ref).norm(), 1e-5 * std::max(1.0, ref.norm())) << name;
    EXPECT_NEAR(chain_elastic_energy(chain, q), oracle_elastic_energy(chain, q),
                1e-6 * std::max(1.0, std::abs(oracle_elastic_energy(chain, q))))
        << name;
  }
}

TEST(Dynamics, DissipationIsNonNegative) {
  const ChainModel chain = test::load_model("pcs_2body");
  const int n = chain.dof();
  test::Sampler s(7);
  for (int t = 0; t < 10; ++t) {
    const VecX q = s(n, 0.05), qd = s(n);
    EXPECT_GE(chain_dissipation_power(chain, q, qd), 0.0);
  }
}

TEST(Dynamics, BodyForceDivergenceAnalyticMatchesDifferences) {
  ChainDesc d = load_chain(test::fixture("pcs_2body.json"));
  d.stress_law = "body_force_divergence";
  const ChainModel chain = build_chain(d);
  const int n = chain.dof();
  test::Sampler s(8);
  const VecX q = s(n, 0.05), qd = s(n, 0.1), z = VecX::Zero(n);
  DynamicsOptions a = only(false, false, true), b = a;
  b.stress_opt.analytic_divergence = false;
  const VecX sa = id(chain, q, qd, z, a), sb = id(chain, q, qd, z, b);
  EXPECT_LT((sa - sb).norm(), 1e-4 * std::max(1.0, sa.norm()));
}

TEST(Dynamics, CentroidResiduals) {
  for (const char* name : {"pcc_sim6", "pcs_2body", "pac_1body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(9);
    const VecX q = s(n, 0.2), qd = s(n), qdd = s(n);
    const auto terms = body_terms(chain, q, qd, qdd);
    for (int i = 0; i < chain.size(); ++i) {
      const auto& d = terms[i].data;
      const double L = chain.links[i].body.model->domain().length_scale();
      EXPECT_LT(d.centroid_residual.norm(), 1e-6 * d.m * L) << name;
      EXPECT_LT(d.centroid_rate_residual.norm(), 1e-6 * d.m * L * std::max(1.0, qd.norm())) << name;
    }
  }
}

TEST(Dynamics, ParallelMatchesSerial) {
  const ChainModel chain = test::load_model("pcc_pdplus");
  const int n = chain.dof();
  test::Sampler s(10);
  const VecX q = s(n, 0.05), qd = s(n), qdd = s(n);
  DynamicsOptions a, b;
  b.jobs = 3;
  const auto ra = inverse_dynamics(chain, q, qd, qdd, a, true);
  const auto rb = inverse_dynamics(chain, q, qd, qdd, b, true);
  EXPECT_EQ((ra.nu - rb.nu).norm(), 0.0);
  EXPECT_EQ((ra.M - rb.M).norm(), 0.0);
}

TEST(Dynamics, MassIsSymmetricPositiveDefinite) {
  for (const char* name : {"rigid_2r", "pcc_sim6", "pcs_2body", "pac_1body", "lvp_1body"}) {
    const ChainModel chain = test::load_model(name);
    const int n = chain.dof();
    test::Sampler s(11);
    const VecX q = s(n, 0.3), z = VecX::Zero(n);
    const MatX M = miid(chain, q, z, z).M;
    EXPECT_LT((M - M.transpose()).norm(), 1e-9 * M.norm()) << name;
    EXPECT_EQ(Eigen::LLT<MatX>(M).info(), Eigen::Success) << name;
  }
}
