#pragma once

// Chain description files (JSON, schema_version 1). All quantities in SI units.

#include <stdexcept>
#include <string>
#include <vector>

#include "softid/bodies.hpp"
#include "softid/kinematics.hpp"

namespace softid {

// Parse or validation failure; `field` is a JSON path such as links[1].body.anchors.x_a.
struct ModelError : std::runtime_error {
  ModelError(std::string field_, const std::string& msg)
      : std::runtime_error(field_.empty() ? msg : field_ + ": " + msg), field(std::move(field_)) {}
  std::string field;
};

// Rotation kept in the form it was written in, so files round-trip exactly.
struct RotationDesc {
  enum class Form { identity, axis_angle, quaternion };
  Form form = Form::identity;
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
  Eigen::Vector4d quaternion = Eigen::Vector4d(1, 0, 0, 0);  // w, x, y, z
  Mat3 matrix() const;
  bool operator==(const RotationDesc&) const = default;
};

struct GeometryDesc {
  std::string shape = "cylinder";  // box | cylinder | cone
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
  double radius = 0.0, base_radius = 0.0, tip_radius = 0.0, length = 0.0, hollow = 0.0;
  bool operator==(const GeometryDesc&) const = default;
};

struct JointDesc {
  std::string kind = "fixed";  // fixed | revolute | prismatic | rotated_base
  Vec3 axis = Vec3::UnitZ();
  RotationDesc rotation;
  Vec3 translation = Vec3::Zero();
  bool operator==(const JointDesc&) const = default;
};

struct BodyDesc {
  // rigid | pcc | pcc_planar | pcs | pac | pgc | strain | variable_radius_pcc | lvp
  std::string kind = "rigid";
  GeometryDesc geometry;
  double rho = 0.0, C = 0.0, eta = 0.0;
  // kind == strain
  std::vector<std::vector<StrainTerm>> columns;
  Eigen::Matrix<double, 6, 1> strain_offset = (Eigen::Matrix<double, 6, 1>() << 0, 0, 0, 0, 0, 1).finished();
  double gauss_width = 1.0;
  int cells = 64;
  // kind == lvp
  int dof = 0;
  std::vector<LvpPrimitive> lvp;
  Vec3 x_J = Vec3::Zero(), x_a = Vec3::Zero(), x_b = Vec3::Zero();
  QuadOrder order{0, 0, 0};  // zero: chain default
  bool free_tip = false;
  bool operator==(const BodyDesc&) const = default;
};

struct LinkDesc {
  JointDesc joint;
  BodyDesc body;
  bool operator==(const LinkDesc&) const = default;
};

struct ChainDesc {
  int schema_version = 1;
  RotationDesc base_rotation;
  Vec3 base_translation = Vec3::Zero();
  Vec3 gravity = Vec3(0, 0, -9.81);
  std::string stress_law = "neo_hookean_weak";  // neo_hookean_weak | body_force_divergence | none
  QuadOrder quadrature_order{8, 8, 8};
  std::vector<LinkDesc> links;
  bool operator==(const ChainDesc&) const = default;
};

ChainDesc parse_chain(const std::string& json_text);
ChainDesc load_chain(const std::string& path);
std::string serialize_chain(const ChainDesc& d);

// Builds and finalizes the chain; invariant failures raise ModelError.
ChainModel build_chain(const ChainDesc& d);

BodyModelPtr build_body(const BodyDesc& b, const std::string& where = "body");
ReferenceDomain build_domain(const GeometryDesc& g, const std::string& where = "geometry");

std::string to_string(StressLaw s);
StressLaw stress_law_from_string(const std::string& s);

struct StateDesc {
  VecX q, qd, qdd;
};
// {"q": [...], "qd": [...], "qdd": [...]}; missing rate entries default to zero.
StateDesc parse_state(const std::string& json_text, int n);

std::string read_text_file(const std::string& path);

}  // namespace softid
