#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "softid/quadrature.hpp"

using namespace softid;
using std::numbers::pi;

TEST(GaussLegendre, WeightsAndExactness) {
  for (int n = 1; n <= 12; ++n) {
    const auto& r = gauss_legendre(n);
    ASSERT_EQ(static_cast<int>(r.nodes.size()), n);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    EXPECT_NEAR(sum, 2.0, 1e-14);
    // exact for degree 2n - 1
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double I = 0.0;
      for (int k = 0; k < n; ++k) I += r.weights[k] * std::pow(r.nodes[k], deg);
      const double ref = (deg % 2) ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(I, ref, 1e-13) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(Domains, Volumes) {
  const auto box = ReferenceDomain::box(Vec3(0, -0.1, -0.2), Vec3(1, 0.1, 0.2));
  const auto cyl = ReferenceDomain::cylinder(0.02, 0.3);
  const auto hollow = ReferenceDomain::cylinder(0.02, 0.3, 0.5);
  const auto cone = ReferenceDomain::cone(0.01, 0.005, 0.2);
  EXPECT_NEAR(box.volume(), 0.08, 1e-15);
  EXPECT_NEAR(cyl.volume(), pi * 0.0004 * 0.3, 1e-15);
  EXPECT_NEAR(hollow.volume(), 0.75 * pi * 0.0004 * 0.3, 1e-15);
  EXPECT_NEAR(cone.volume(), pi * 0.2 / 3 * (1e-4 + 5e-5 + 2.5e-5), 1e-15);
  const auto one = [](const Vec3&) { return VecX::Ones(1); };
  for (const auto* d : {&box, &cyl, &hollow, &cone})
    EXPECT_NEAR(integrate_volume(*d, one, 4)(0), d->volume(), 1e-12 * d->volume());
}

TEST(Domains, SecondMomentsOfCylinder) {
  const double R = 0.02, L = 0.3;
  const auto cyl = ReferenceDomain::cylinder(R, L);
  const auto f = [](const Vec3& x) {
    VecX v(3);
    v << x(0) * x(0), x(2), x(2) * x(2);
    return v;
  };
  const VecX I = integrate_volume(cyl, f, QuadOrder{3, 16, 3});
  const double V = pi * R * R * L;
  EXPECT_NEAR(I(0), V * R * R / 4, 1e-10 * V * R * R);
  EXPECT_NEAR(I(1), V * L / 2, 1e-12 * V);
  EXPECT_NEAR(I(2), V * L * L / 3, 1e-12 * V);
}

TEST(Domains, Containment) {
  const auto cone = ReferenceDomain::cone(0.01, 0.005, 0.2);
  EXPECT_TRUE(cone.contains(Vec3(0, 0, 0.1)));
  EXPECT_TRUE(cone.contains(Vec3(0.0075, 0, 0.1)));
  EXPECT_FALSE(cone.contains(Vec3(0.008, 0, 0.1)));
  EXPECT_FALSE(cone.contains(Vec3(0, 0, 0.21)));
  EXPECT_NEAR(cone.radius_at(0.2), 0.005, 1e-15);
}

TEST(Domains, NodesLieInside) {
  const auto hollow = ReferenceDomain::cone(0.02, 0.01, 0.4, 0.3);
  for (const auto& nd : volume_nodes(hollow, QuadOrder{3, 5, 4})) {
    EXPECT_TRUE(hollow.contains(nd.x));
    EXPECT_GT(nd.w, 0.0);
  }
}
