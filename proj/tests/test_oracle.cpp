#include <gtest/gtest.h>

#include <cmath>

#include "softid/dynamics.hpp"
#include "softid/oracle.hpp"
#include "support.hpp"

using namespace softid;

TEST(Oracle, StencilsDifferentiatePolynomials) {
  for (int order : {2, 4, 6}) {
    for (int der : {1, 2}) {
      const Stencil st = central_stencil(der, order);
      ASSERT_EQ(st.offsets.size(), st.w.size());
      // exact up to degree order + der - 1 with unit spacing
      for (int deg = 0; deg < order + der; ++deg) {
        double d = 0.0;
        for (size_t k = 0; k < st.w.size(); ++k) d += st.w[k] * std::pow(0.5 + st.offsets[k], deg);
        double ref = 0.0;
        if (deg >= der) ref = (der == 1 ? deg : deg * (deg - 1)) * std::pow(0.5, deg - der);
        EXPECT_NEAR(d, ref, 1e-9 * std::max(1.0, std::abs(ref))) << order << " " << der << " " << deg;
      }
    }
  }
  EXPECT_THROW(central_stencil(1, 3), std::invalid_argument);
}

TEST(Oracle, TwoLinkClosedForm) {
  const ChainModel chain = test::load_model("rigid_2r");
  const test::TwoLink ref;
  test::Sampler s(12);
  for (int t = 0; t < 5; ++t) {
    const VecX q = s(2, 3.0), qd = s(2), qdd = s(2);
    EXPECT_LT(test::rel_err(oracle_mass(chain, q), ref.M(q)), 1e-9);
    EXPECT_LT(test::rel_err(oracle_kane(chain, q, qd, qdd), ref.M(q) * qdd + ref.c(q, qd)), 1e-8);
    EXPECT_LT(test::rel_err(oracle_potential(chain, q).g, ref.gvec(q)), 1e-9);
  }
}

TEST(Oracle, NodesCarryTotalMass) {
  const ChainModel chain = test::load_model("pcs_2body");
  const auto nodes = chain_nodes(chain, VecX::Zero(chain.dof()));
  double m = 0.0;
  for (double dm : nodes.dm) m += dm;
  double ref = 0.0;
  for (const auto& l : chain.links)
    ref += l.body.model->material().rho * l.body.model->domain().volume();
  EXPECT_NEAR(m, ref, 1e-9 * ref);
}

TEST(Oracle, PendulumPotential) {
  const ChainModel chain = test::load_model("pendulum");
  VecX q(1);
  q << 0.3;
  // centre of mass at distance 0.5 on a 1 kg link, gravity along -y
  EXPECT_NEAR(oracle_potential(chain, q).U, 9.81 * 0.5 * std::sin(0.3), 1e-10);
  EXPECT_NEAR(gravity_potential(chain, q), 9.81 * 0.5 * std::sin(0.3), 1e-10);
}
