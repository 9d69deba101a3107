#pragma once

#include <array>
#include <functional>
#include <vector>

#include "softid/spatial.hpp"

namespace softid {

struct QuadratureRule1D {
  int order = 0;
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
};

// Gauss-Legendre rule, 1 <= order <= 64. Rules are computed once and cached.
const QuadratureRule1D& gauss_legendre(int order);

enum class DomainKind { box, cylinder, truncated_cone, mapped_box };

// Material-coordinate domain of a body. Cylinders and cones are aligned with
// x3 and span x3 in [0, length]; hollow ones keep the same inner/outer radius
// ratio along the axis.
struct ReferenceDomain {
  DomainKind kind = DomainKind::box;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  double r_base = 0.0;
  double r_tip = 0.0;
  double hollow = 0.0;  // inner/outer radius ratio in [0, 1)
  double length = 0.0;
  // mapped_box: map from the box [lo, hi] and its Jacobian determinant
  std::function<Vec3(const Vec3&)> map;
  std::function<double(const Vec3&)> map_det;

  static ReferenceDomain box(const Vec3& lo, const Vec3& hi);
  static ReferenceDomain cylinder(double radius, double length, double hollow = 0.0);
  static ReferenceDomain cone(double r_base, double r_tip, double length, double hollow = 0.0);

  double volume() const;  // analytic, except mapped_box
  double length_scale() const;
  double radius_at(double x3) const;
  bool contains(const Vec3& x, double tol = 1e-9) const;
};

// Quadrature point with its weight (Jacobian of the coordinate map included).
struct VolumeNode {
  Vec3 x;
  double w;
};

using QuadOrder = std::array<int, 3>;  // (r, phi, x3) for round domains, (x1, x2, x3) for boxes

std::vector<VolumeNode> volume_nodes(const ReferenceDomain& d, const QuadOrder& order);

// Tensor-product estimate of the integral of a vector-valued function.
VecX integrate_volume(const ReferenceDomain& d, const std::function<VecX(const Vec3&)>& f,
                      const QuadOrder& order);
VecX integrate_volume(const ReferenceDomain& d, const std::function<VecX(const Vec3&)>& f,
                      int order);

}  // namespace softid
