#include "softid/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace softid {

namespace {

QuadratureRule1D build_rule(int n) {
  QuadratureRule1D rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule1D& gauss_legendre(int order) {
  static const std::vector<QuadratureRule1D> rules = [] {
    std::vector<QuadratureRule1D> r;
    r.reserve(64);
    for (int n = 1; n <= 64; ++n) r.push_back(build_rule(n));
    return r;
  }();
  if (order < 1 || order > 64)
    throw std::invalid_argument("gauss_legendre: order must be in [1, 64], got " +
                                std::to_string(order));
  return rules[order - 1];
}

ReferenceDomain ReferenceDomain::box(const Vec3& lo, const Vec3& hi) {
  ReferenceDomain d;
  d.kind = DomainKind::box;
  d.lo = lo;
  d.hi = hi;
  if ((hi - lo).minCoeff() <= 0.0) throw std::invalid_argument("box: hi must exceed lo");
  return d;
}

ReferenceDomain ReferenceDomain::cylinder(double radius, double length, double hollow) {
  ReferenceDomain d = cone(radius, radius, length, hollow);
  d.kind = DomainKind::cylinder;
  return d;
}

ReferenceDomain ReferenceDomain::cone(double r_base, double r_tip, double length, double hollow) {
  if (r_base <= 0.0 || r_tip <= 0.0 || length <= 0.0)
    throw std::invalid_argument("cone: radii and length must be positive");
  if (hollow < 0.0 || hollow >= 1.0) throw std::invalid_argument("cone: hollow ratio must be in [0, 1)");
  ReferenceDomain d;
  d.kind = DomainKind::truncated_cone;
  d.r_base = r_base;
  d.r_tip = r_tip;
  d.length = length;
  d.hollow = hollow;
  d.lo = Vec3(-std::max(r_base, r_tip), -std::max(r_base, r_tip), 0.0);
  d.hi = Vec3(std::max(r_base, r_tip), std::max(r_base, r_tip), length);
  return d;
}

double ReferenceDomain::radius_at(double x3) const {
  return r_base + (r_tip - r_base) * x3 / length;
}

double ReferenceDomain::volume() const {
  switch (kind) {
    case DomainKind::box:
      return (hi - lo).prod();
    case DomainKind::cylinder:
    case DomainKind::truncated_cone:
      return std::numbers::pi * length / 3.0 *
             (r_base * r_base + r_base * r_tip + r_tip * r_tip) * (1.0 - hollow * hollow);
    case DomainKind::mapped_box: {
      auto one = [](const Vec3&) { return VecX::Ones(1); };
      return integrate_volume(*this, one, 8)(0);
    }
  }
  return 0.0;
}

double ReferenceDomain::length_scale() const {
  if (kind == DomainKind::cylinder || kind == DomainKind::truncated_cone) return length;
  return (hi - lo).maxCoeff();
}

bool ReferenceDomain::contains(const Vec3& x, double tol) const {
  switch (kind) {
    case DomainKind::box:
    case DomainKind::mapped_box:
      return (x - lo).minCoeff() >= -tol && (hi - x).minCoeff() >= -tol;
    case DomainKind::cylinder:
    case DomainKind::truncated_cone: {
      if (x(2) < -tol || x(2) > length + tol) return false;
      const double r = std::hypot(x(0), x(1));
      const double R = radius_at(std::clamp(x(2), 0.0, length));
      return r <= R + tol && r >= hollow * R - tol;
    }
  }
  return false;
}

std::vector<VolumeNode> volume_nodes(const ReferenceDomain& d, const QuadOrder& order) {
  const auto& g0 = gauss_legendre(order[0]);
  const auto& g1 = gauss_legendre(order[1]);
  const auto& g2 = gauss_legendre(order[2]);
  std::vector<VolumeNode> out;
  out.reserve(static_cast<size_t>(order[0]) * order[1] * order[2]);
  if (d.kind == DomainKind::box || d.kind == DomainKind::mapped_box) {
    const Vec3 c = 0.5 * (d.hi + d.lo), h = 0.5 * (d.hi - d.lo);
    const double jac = h.prod();
    for (int k = 0; k < order[2]; ++k)
      for (int j = 0; j < order[1]; ++j)
        for (int i = 0; i < order[0]; ++i) {
          Vec3 u = c + h.cwiseProduct(Vec3(g0.nodes[i], g1.nodes[j], g2.nodes[k]));
          double w = g0.weights[i] * g1.weights[j] * g2.weights[k] * jac;
          if (d.kind == DomainKind::mapped_box) {
            w *= d.map_det(u);
            u = d.map(u);
          }
          out.push_back({u, w});
        }
    return out;
  }
  // (r, phi, x3) with Jacobian r; phi mapped onto [0, 2 pi)
  for (int k = 0; k < order[2]; ++k) {
    const double z = 0.5 * d.length * (1.0 + g2.nodes[k]);
    const double R = d.radius_at(z), r0 = d.hollow * R;
    for (int j = 0; j < order[1]; ++j) {
      const double phi = std::numbers::pi * (1.0 + g1.nodes[j]);
      for (int i = 0; i < order[0]; ++i) {
        const double r = r0 + 0.5 * (R - r0) * (1.0 + g0.nodes[i]);
        const double w = g0.weights[i] * g1.weights[j] * g2.weights[k] * r * 0.5 * (R - r0) *
                         std::numbers::pi * 0.5 * d.length;
        out.push_back({Vec3(r * std::cos(phi), r * std::sin(phi), z), w});
      }
    }
  }
  return out;
}

VecX integrate_volume(const ReferenceDomain& d, const std::function<VecX(const Vec3&)>& f,
                      const QuadOrder& order) {
  VecX acc;
  for (const auto& nd : volume_nodes(d, order)) {
    const VecX v = f(nd.x);
    if (!v.allFinite()) {
      std::ostringstream os;
      os << "integrate_volume: non-finite integrand at node (" << nd.x.transpose() << ")";
      throw std::runtime_error(os.str());
    }
    if (acc.size() == 0) acc = VecX::Zero(v.size());
    acc += nd.w * v;
  }
  return acc;
}

VecX integrate_volume(const ReferenceDomain& d, const std::function<VecX(const Vec3&)>& f,
                      int order) {
  return integrate_volume(d, f, QuadOrder{order, order, order});
}

}  // namespace softid
