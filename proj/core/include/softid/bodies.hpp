#pragma once

#include <memory>
#include <string>
#include <vector>

#include "softid/jet.hpp"
#include "softid/quadrature.hpp"
#include "softid/spatial.hpp"

namespace softid {

struct Material {
  double rho = 1000.0;  // kg/m^3
  double C = 0.0;       // Pa
  double eta = 0.0;     // s
};

// Kinematic map f(x, q) of one body, expressed in the joint frame that
// precedes it. x are material coordinates in the reference domain.
class BodyModel {
 public:
  BodyModel(ReferenceDomain domain, Material material)
      : domain_(std::move(domain)), material_(material) {}
  virtual ~BodyModel() = default;

  virtual std::string kind() const = 0;
  virtual int dof() const = 0;

  const ReferenceDomain& domain() const { return domain_; }
  const Material& material() const { return material_; }

  virtual Vec3 position(const Vec3& x, const VecX& q) const = 0;
  virtual Vec3T<DualJet> position(const Vec3T<DualJet>& x, const VecXT<DualJet>& q) const = 0;
  virtual Vec3T<JetJet> position(const Vec3T<JetJet>& x, const VecXT<JetJet>& q) const = 0;

  // Batched evaluation; models share work between points on the same cross section.
  virtual void map_points(const std::vector<Vec3>& xs, const VecX& q,
                          std::vector<Vec3>& out) const = 0;
  virtual void map_points(const std::vector<Vec3>& xs, const VecXT<DualJet>& q,
                          std::vector<Vec3T<DualJet>>& out) const = 0;
  // Points are lifted with unit seeds on the inner directions 0..2, so the
  // inner parts of the result hold the deformation gradient.
  virtual void map_points(const std::vector<Vec3>& xs, const VecXT<JetJet>& q,
                          std::vector<Vec3T<JetJet>>& out) const = 0;

  Mat3 jacobian_x(const Vec3& x, const VecX& q) const;
  Mat3X jacobian_q(const Vec3& x, const VecX& q) const;

 private:
  ReferenceDomain domain_;
  Material material_;
};

using BodyModelPtr = std::shared_ptr<const BodyModel>;

BodyModelPtr make_rigid_body(ReferenceDomain domain, Material material);

// Strain components: 0..2 angular (kx, ky, kz), 3..5 linear (nx, ny, nz),
// all per unit rest length. The offset holds the stress-free strain.
enum class StrainShape { constant, linear, gaussian };

struct StrainTerm {
  int component = 0;
  double coef = 0.0;
  StrainShape shape = StrainShape::constant;
  bool operator==(const StrainTerm&) const = default;
};

struct StrainBasis {
  double L0 = 1.0;
  double gauss_width = 1.0;
  std::vector<std::vector<StrainTerm>> columns;
  Eigen::Matrix<double, 6, 1> offset = (Eigen::Matrix<double, 6, 1>() << 0, 0, 0, 0, 0, 1).finished();

  int dof() const { return static_cast<int>(columns.size()); }
  bool is_constant() const;

  // q = (kx L0, ky L0, dL)
  static StrainBasis pcc(double L0);
  // q = (kx L0, dL)
  static StrainBasis pcc_planar(double L0);
  // q = L0 * (kx, ky, kz, nx, ny, nz - 1)
  static StrainBasis pcs(double L0);
  static StrainBasis pac(double L0);
  static StrainBasis pgc(double L0);

  template <class S>
  void eval(const S& s, const VecXT<S>& q, Vec3T<S>& kappa, Vec3T<S>& nu) const {
    using std::exp;
    Eigen::Matrix<S, 6, 1> xi;
    for (int c = 0; c < 6; ++c) xi(c) = S(offset(c));
    for (int j = 0; j < dof(); ++j)
      for (const auto& t : columns[j]) {
        S g(t.coef);
        if (t.shape == StrainShape::linear) {
          g = g * (s / L0);
        } else if (t.shape == StrainShape::gaussian) {
          const S d = (s - 0.5 * L0) / gauss_width;
          g = g * exp(-(d * d));
        }
        xi(t.component) = xi(t.component) + g * q(j);
      }
    kappa = xi.template head<3>();
    nu = xi.template tail<3>();
  }
};

struct CosseratOptions {
  int cells = 64;             // integration cells for non-constant strain
  bool variable_radius = false;  // two extra radial coordinates
};

// Rod with rigid cross sections mapped by the backbone frame.
BodyModelPtr make_cosserat_body(ReferenceDomain domain, Material material, StrainBasis basis,
                                CosseratOptions opt = {});

// Bump used by the variable radius model; zero outside its open support.
double radial_bump(double s, double phi, double L0);

enum class LvpKind {
  stretch_compression,
  planar_bending_x1,
  planar_bending_x2,
  twist,
  shear_x1,
  shear_x2,
  source
};

struct LvpPrimitive {
  LvpKind kind = LvpKind::stretch_compression;
  std::vector<int> q_index;  // configuration entries consumed by this primitive
  bool operator==(const LvpPrimitive&) const = default;
};

int lvp_arity(LvpKind k);
std::string to_string(LvpKind k);
LvpKind lvp_kind_from_string(const std::string& s);

// Composition h_P(... h_1(x, q) ..., q), each primitive volume preserving.
BodyModelPtr make_lvp_body(ReferenceDomain domain, Material material, int dof,
                           std::vector<LvpPrimitive> primitives);

}  // namespace softid
