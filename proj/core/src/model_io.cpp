#include "softid/model_io.hpp"

#include <Eigen/Geometry>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace softid {

using json = nlohmann::json;

namespace {

std::string at(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
std::string idx(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const json& o, const std::string& path, std::initializer_list<const char*> keys) {
  if (!o.is_object()) throw ModelError(path, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = o.begin(); it != o.end(); ++it)
    if (!ok.count(it.key())) throw ModelError(at(path, it.key()), "unknown field");
}

const json& req(const json& o, const std::string& key, const std::string& path) {
  auto it = o.find(key);
  if (it == o.end()) throw ModelError(at(path, key), "missing required field");
  return *it;
}

double num(const json& v, const std::string& path) {
  if (!v.is_number()) throw ModelError(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ModelError(path, "expected an integer");
  return v.get<int>();
}

std::string str(const json& v, const std::string& path) {
  if (!v.is_string()) throw ModelError(path, "expected a string");
  return v.get<std::string>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != N)
    throw ModelError(path, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> r;
  for (int i = 0; i < N; ++i) r(i) = num(v[i], idx(path, i));
  return r;
}

QuadOrder qorder(const json& v, const std::string& path) {
  QuadOrder q;
  if (v.is_number_integer()) {
    q = {v.get<int>(), v.get<int>(), v.get<int>()};
  } else if (v.is_array() && v.size() == 3) {
    for (int i = 0; i < 3; ++i) q[i] = integer(v[i], idx(path, i));
  } else {
    throw ModelError(path, "expected an integer or an array of three integers");
  }
  for (int o : q)
    if (o < 1 || o > 64) throw ModelError(path, "quadrature order must be in [1, 64]");
  return q;
}

json qorder_json(const QuadOrder& q) {
  if (q[0] == q[1] && q[1] == q[2]) return q[0];
  return json::array({q[0], q[1], q[2]});
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

// reads "rotation" {axis, angle} or "quaternion" [w, x, y, z] from an object
RotationDesc rotation(const json& o, const std::string& path) {
  RotationDesc r;
  const bool has_r = o.contains("rotation"), has_q = o.contains("quaternion");
  if (has_r && has_q) throw ModelError(path, "give either rotation or quaternion, not both");
  if (has_r) {
    const std::string p = at(path, "rotation");
    const json& j = o["rotation"];
    only_keys(j, p, {"axis", "angle"});
    r.form = RotationDesc::Form::axis_angle;
    r.axis = vec<3>(req(j, "axis", p), at(p, "axis"));
    if (r.axis.norm() == 0.0) throw ModelError(at(p, "axis"), "axis must be non-zero");
    r.angle = num(req(j, "angle", p), at(p, "angle"));
  } else if (has_q) {
    r.form = RotationDesc::Form::quaternion;
    r.quaternion = vec<4>(o["quaternion"], at(path, "quaternion"));
    if (r.quaternion.norm() == 0.0) throw ModelError(at(path, "quaternion"), "quaternion must be non-zero");
  }
  return r;
}

void rotation_json(json& o, const RotationDesc& r) {
  if (r.form == RotationDesc::Form::axis_angle) {
    o["rotation"] = {{"axis", vec_json(r.axis)}, {"angle", r.angle}};
  } else if (r.form == RotationDesc::Form::quaternion) {
    o["quaternion"] = json::array({r.quaternion(0), r.quaternion(1), r.quaternion(2), r.quaternion(3)});
  }
}

const std::map<std::string, int>& component_names() {
  static const std::map<std::string, int> m{{"kx", 0}, {"ky", 1}, {"kz", 2},
                                            {"nx", 3}, {"ny", 4}, {"nz", 5}};
  return m;
}

StrainShape shape_from_string(const std::string& s, const std::string& path) {
  if (s == "constant") return StrainShape::constant;
  if (s == "linear") return StrainShape::linear;
  if (s == "gaussian") return StrainShape::gaussian;
  throw ModelError(path, "unknown strain shape '" + s + "' (constant | linear | gaussian)");
}

std::string to_string(StrainShape s) {
  switch (s) {
    case StrainShape::constant: return "constant";
    case StrainShape::linear: return "linear";
    case StrainShape::gaussian: return "gaussian";
  }
  return "?";
}

const std::set<std::string> body_kinds{"rigid", "pcc", "pcc_planar", "pcs", "pac", "pgc",
                                       "strain", "variable_radius_pcc", "lvp"};

bool uses_cells(const std::string& k) { return k == "pac" || k == "pgc" || k == "strain"; }
bool uses_width(const std::string& k) { return k == "pgc" || k == "strain"; }

GeometryDesc parse_geometry(const json& j, const std::string& p) {
  GeometryDesc g;
  g.shape = str(req(j, "shape", p), at(p, "shape"));
  if (g.shape == "box") {
    only_keys(j, p, {"shape", "lo", "hi"});
    g.lo = vec<3>(req(j, "lo", p), at(p, "lo"));
    g.hi = vec<3>(req(j, "hi", p), at(p, "hi"));
  } else if (g.shape == "cylinder") {
    only_keys(j, p, {"shape", "radius", "length", "hollow"});
    g.radius = num(req(j, "radius", p), at(p, "radius"));
    g.length = num(req(j, "length", p), at(p, "length"));
    if (j.contains("hollow")) g.hollow = num(j["hollow"], at(p, "hollow"));
  } else if (g.shape == "cone") {
    only_keys(j, p, {"shape", "base_radius", "tip_radius", "length", "hollow"});
    g.base_radius = num(req(j, "base_radius", p), at(p, "base_radius"));
    g.tip_radius = num(req(j, "tip_radius", p), at(p, "tip_radius"));
    g.length = num(req(j, "length", p), at(p, "length"));
    if (j.contains("hollow")) g.hollow = num(j["hollow"], at(p, "hollow"));
  } else {
    throw ModelError(at(p, "shape"), "unknown shape '" + g.shape + "' (box | cylinder | cone)");
  }
  return g;
}

json geometry_json(const GeometryDesc& g) {
  json j{{"shape", g.shape}};
  if (g.shape == "box") {
    j["lo"] = vec_json(g.lo);
    j["hi"] = vec_json(g.hi);
  } else if (g.shape == "cylinder") {
    j["radius"] = g.radius;
    j["length"] = g.length;
    if (g.hollow != 0.0) j["hollow"] = g.hollow;
  } else {
    j["base_radius"] = g.base_radius;
    j["tip_radius"] = g.tip_radius;
    j["length"] = g.length;
    if (g.hollow != 0.0) j["hollow"] = g.hollow;
  }
  return j;
}

BodyDesc parse_body(const json& j, const std::string& p) {
  only_keys(j, p, {"kind", "geometry", "rho", "C", "eta", "basis", "anchors", "quadrature_order",
                   "free_tip", "lvp_primitives", "dof", "cells", "gauss_width"});
  BodyDesc b;
  b.kind = str(req(j, "kind", p), at(p, "kind"));
  if (!body_kinds.count(b.kind)) throw ModelError(at(p, "kind"), "unknown body kind '" + b.kind + "'");
  b.geometry = parse_geometry(req(j, "geometry", p), at(p, "geometry"));
  b.rho = num(req(j, "rho", p), at(p, "rho"));
  if (j.contains("C")) b.C = num(j["C"], at(p, "C"));
  if (j.contains("eta")) b.eta = num(j["eta"], at(p, "eta"));
  const std::string pa = at(p, "anchors");
  const json& a = req(j, "anchors", p);
  only_keys(a, pa, {"x_J", "x_a", "x_b"});
  b.x_J = vec<3>(req(a, "x_J", pa), at(pa, "x_J"));
  b.x_a = vec<3>(req(a, "x_a", pa), at(pa, "x_a"));
  b.x_b = vec<3>(req(a, "x_b", pa), at(pa, "x_b"));
  if (j.contains("quadrature_order")) b.order = qorder(j["quadrature_order"], at(p, "quadrature_order"));
  if (j.contains("free_tip")) {
    if (!j["free_tip"].is_boolean()) throw ModelError(at(p, "free_tip"), "expected a boolean");
    b.free_tip = j["free_tip"].get<bool>();
  }
  auto forbid = [&](const char* key, bool allowed) {
    if (j.contains(key) && !allowed)
      throw ModelError(at(p, key), std::string("not used by body kind '") + b.kind + "'");
  };
  forbid("basis", b.kind == "strain");
  forbid("lvp_primitives", b.kind == "lvp");
  forbid("dof", b.kind == "lvp");
  forbid("cells", uses_cells(b.kind));
  forbid("gauss_width", uses_width(b.kind));
  if (j.contains("cells")) b.cells = integer(j["cells"], at(p, "cells"));
  if (j.contains("gauss_width")) b.gauss_width = num(j["gauss_width"], at(p, "gauss_width"));
  if (b.kind == "strain") {
    const std::string pb = at(p, "basis");
    const json& bj = req(j, "basis", p);
    only_keys(bj, pb, {"columns", "offset"});
    const json& cols = req(bj, "columns", pb);
    if (!cols.is_array()) throw ModelError(at(pb, "columns"), "expected an array");
    for (size_t c = 0; c < cols.size(); ++c) {
      const std::string pc = idx(at(pb, "columns"), c);
      if (!cols[c].is_array()) throw ModelError(pc, "expected an array of terms");
      std::vector<StrainTerm> col;
      for (size_t t = 0; t < cols[c].size(); ++t) {
        const std::string pt = idx(pc, t);
        const json& tj = cols[c][t];
        only_keys(tj, pt, {"component", "coef", "shape"});
        StrainTerm term;
        const json& comp = req(tj, "component", pt);
        if (comp.is_string()) {
          auto it = component_names().find(comp.get<std::string>());
          if (it == component_names().end())
            throw ModelError(at(pt, "component"), "unknown component (kx ky kz nx ny nz)");
          term.component = it->second;
        } else {
          term.component = integer(comp, at(pt, "component"));
          if (term.component < 0 || term.component > 5)
            throw ModelError(at(pt, "component"), "component index must be in [0, 5]");
        }
        term.coef = num(req(tj, "coef", pt), at(pt, "coef"));
        if (tj.contains("shape")) term.shape = shape_from_string(str(tj["shape"], at(pt, "shape")), at(pt, "shape"));
        col.push_back(term);
      }
      b.columns.push_back(col);
    }
    if (bj.contains("offset")) b.strain_offset = vec<6>(bj["offset"], at(pb, "offset"));
  }
  if (b.kind == "lvp") {
    b.dof = integer(req(j, "dof", p), at(p, "dof"));
    const json& pr = req(j, "lvp_primitives", p);
    const std::string pp = at(p, "lvp_primitives");
    if (!pr.is_array()) throw ModelError(pp, "expected an array");
    for (size_t i = 0; i < pr.size(); ++i) {
      const std::string pi = idx(pp, i);
      only_keys(pr[i], pi, {"kind", "q_index"});
      LvpPrimitive prim;
      try {
        prim.kind = lvp_kind_from_string(str(req(pr[i], "kind", pi), at(pi, "kind")));
      } catch (const std::invalid_argument& e) {
        throw ModelError(at(pi, "kind"), e.what());
      }
      const json& qi = req(pr[i], "q_index", pi);
      if (qi.is_number_integer()) {
        prim.q_index.push_back(qi.get<int>());
      } else if (qi.is_array()) {
        for (size_t k = 0; k < qi.size(); ++k) prim.q_index.push_back(integer(qi[k], idx(at(pi, "q_index"), k)));
      } else {
        throw ModelError(at(pi, "q_index"), "expected an integer or an array of integers");
      }
      b.lvp.push_back(prim);
    }
  }
  return b;
}

json body_json(const BodyDesc& b) {
  json j{{"kind", b.kind}, {"geometry", geometry_json(b.geometry)}, {"rho", b.rho}, {"C", b.C}, {"eta", b.eta}};
  j["anchors"] = {{"x_J", vec_json(b.x_J)}, {"x_a", vec_json(b.x_a)}, {"x_b", vec_json(b.x_b)}};
  if (b.order[0] != 0) j["quadrature_order"] = qorder_json(b.order);
  if (b.free_tip) j["free_tip"] = true;
  if (uses_cells(b.kind)) j["cells"] = b.cells;
  if (uses_width(b.kind)) j["gauss_width"] = b.gauss_width;
  if (b.kind == "strain") {
    static const char* names[] = {"kx", "ky", "kz", "nx", "ny", "nz"};
    json cols = json::array();
    for (const auto& c : b.columns) {
      json col = json::array();
      for (const auto& t : c)
        col.push_back({{"component", names[t.component]}, {"coef", t.coef}, {"shape", to_string(t.shape)}});
      cols.push_back(col);
    }
    json off = json::array();
    for (int i = 0; i < 6; ++i) off.push_back(b.strain_offset(i));
    j["basis"] = {{"columns", cols}, {"offset", off}};
  }
  if (b.kind == "lvp") {
    j["dof"] = b.dof;
    json pr = json::array();
    for (const auto& p : b.lvp) pr.push_back({{"kind", to_string(p.kind)}, {"q_index", p.q_index}});
    j["lvp_primitives"] = pr;
  }
  return j;
}

JointDesc parse_joint(const json& j, const std::string& p) {
  only_keys(j, p, {"kind", "axis", "rotation", "quaternion", "translation"});
  JointDesc d;
  d.kind = str(req(j, "kind", p), at(p, "kind"));
  if (d.kind == "revolute" || d.kind == "prismatic") {
    d.axis = vec<3>(req(j, "axis", p), at(p, "axis"));
    if (d.axis.norm() == 0.0) throw ModelError(at(p, "axis"), "axis must be non-zero");
    if (j.contains("rotation") || j.contains("quaternion") || j.contains("translation"))
      throw ModelError(p, "moving joints take only an axis");
  } else if (d.kind == "fixed" || d.kind == "rotated_base") {
    if (j.contains("axis")) throw ModelError(at(p, "axis"), "not used by " + d.kind + " joints");
    d.rotation = rotation(j, p);
    if (j.contains("translation")) {
      if (d.kind == "rotated_base") throw ModelError(at(p, "translation"), "not used by rotated_base joints");
      d.translation = vec<3>(j["translation"], at(p, "translation"));
    }
  } else {
    throw ModelError(at(p, "kind"), "unknown joint kind '" + d.kind + "' (fixed | revolute | prismatic | rotated_base)");
  }
  return d;
}

json joint_json(const JointDesc& d) {
  json j{{"kind", d.kind}};
  if (d.kind == "revolute" || d.kind == "prismatic") {
    j["axis"] = vec_json(d.axis);
  } else {
    rotation_json(j, d.rotation);
    if (d.kind == "fixed" && d.translation != Vec3::Zero()) j["translation"] = vec_json(d.translation);
  }
  return j;
}

}  // namespace

Mat3 RotationDesc::matrix() const {
  switch (form) {
    case Form::identity: return Mat3::Identity();
    case Form::axis_angle: return axis_angle<double>(axis, angle);
    case Form::quaternion:
      return rotation_from_quaternion(quaternion(0), quaternion(1), quaternion(2), quaternion(3));
  }
  return Mat3::Identity();
}

std::string to_string(StressLaw s) {
  switch (s) {
    case StressLaw::neo_hookean_weak: return "neo_hookean_weak";
    case StressLaw::body_force_divergence: return "body_force_divergence";
    case StressLaw::none: return "none";
  }
  return "?";
}

StressLaw stress_law_from_string(const std::string& s) {
  if (s == "neo_hookean_weak") return StressLaw::neo_hookean_weak;
  if (s == "body_force_divergence") return StressLaw::body_force_divergence;
  if (s == "none") return StressLaw::none;
  throw std::invalid_argument("unknown stress law '" + s + "' (neo_hookean_weak | body_force_divergence | none)");
}

ChainDesc parse_chain(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ModelError("", "JSON syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what());
  }
  only_keys(root, "", {"schema_version", "base", "gravity", "stress_law", "quadrature_order", "links"});
  ChainDesc d;
  d.schema_version = integer(req(root, "schema_version", ""), "schema_version");
  if (d.schema_version != 1)
    throw ModelError("schema_version", "unsupported schema version " + std::to_string(d.schema_version) + " (expected 1)");
  if (root.contains("base")) {
    only_keys(root["base"], "base", {"rotation", "quaternion", "translation"});
    d.base_rotation = rotation(root["base"], "base");
    if (root["base"].contains("translation")) d.base_translation = vec<3>(root["base"]["translation"], "base.translation");
  }
  if (root.contains("gravity")) d.gravity = vec<3>(root["gravity"], "gravity");
  if (root.contains("stress_law")) {
    d.stress_law = str(root["stress_law"], "stress_law");
    try {
      stress_law_from_string(d.stress_law);
    } catch (const std::invalid_argument& e) {
      throw ModelError("stress_law", e.what());
    }
  }
  if (root.contains("quadrature_order")) d.quadrature_order = qorder(root["quadrature_order"], "quadrature_order");
  const json& links = req(root, "links", "");
  if (!links.is_array() || links.empty()) throw ModelError("links", "expected a non-empty array");
  for (size_t i = 0; i < links.size(); ++i) {
    const std::string p = idx("links", i);
    only_keys(links[i], p, {"joint", "body"});
    LinkDesc l;
    if (links[i].contains("joint")) l.joint = parse_joint(links[i]["joint"], at(p, "joint"));
    l.body = parse_body(req(links[i], "body", p), at(p, "body"));
    d.links.push_back(l);
  }
  return d;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ChainDesc load_chain(const std::string& path) { return parse_chain(read_text_file(path)); }

std::string serialize_chain(const ChainDesc& d) {
  json root;
  root["schema_version"] = d.schema_version;
  json base = json::object();
  rotation_json(base, d.base_rotation);
  base["translation"] = vec_json(d.base_translation);
  root["base"] = base;
  root["gravity"] = vec_json(d.gravity);
  root["stress_law"] = d.stress_law;
  root["quadrature_order"] = qorder_json(d.quadrature_order);
  json links = json::array();
  for (const auto& l : d.links) links.push_back({{"joint", joint_json(l.joint)}, {"body", body_json(l.body)}});
  root["links"] = links;
  return root.dump(2) + "\n";
}

ReferenceDomain build_domain(const GeometryDesc& g, const std::string& p) {
  if (g.shape == "box") {
    if (!((g.hi - g.lo).minCoeff() > 0.0)) throw ModelError(at(p, "hi"), "box needs hi > lo in every direction");
    return ReferenceDomain::box(g.lo, g.hi);
  }
  if (!(g.length > 0.0)) throw ModelError(at(p, "length"), "length must be positive");
  if (!(g.hollow >= 0.0 && g.hollow < 1.0)) throw ModelError(at(p, "hollow"), "hollow ratio must be in [0, 1)");
  if (g.shape == "cylinder") {
    if (!(g.radius > 0.0)) throw ModelError(at(p, "radius"), "radius must be positive");
    return ReferenceDomain::cylinder(g.radius, g.length, g.hollow);
  }
  if (!(g.base_radius > 0.0)) throw ModelError(at(p, "base_radius"), "base radius must be positive");
  if (!(g.tip_radius >= 0.0)) throw ModelError(at(p, "tip_radius"), "tip radius must be non-negative");
  return ReferenceDomain::cone(g.base_radius, g.tip_radius, g.length, g.hollow);
}

BodyModelPtr build_body(const BodyDesc& b, const std::string& p) {
  if (!(b.rho > 0.0)) throw ModelError(at(p, "rho"), "density must be positive");
  if (!(b.C >= 0.0)) throw ModelError(at(p, "C"), "elastic coefficient must be non-negative");
  if (!(b.eta >= 0.0)) throw ModelError(at(p, "eta"), "viscosity must be non-negative");
  const ReferenceDomain dom = build_domain(b.geometry, at(p, "geometry"));
  const Material mat{b.rho, b.C, b.eta};
  if (b.kind == "rigid") return make_rigid_body(dom, mat);
  if (b.kind == "lvp") {
    if (b.dof < 1 || b.dof > 10) throw ModelError(at(p, "dof"), "lvp bodies take 1 to 10 coordinates");
    try {
      return make_lvp_body(dom, mat, b.dof, b.lvp);
    } catch (const std::invalid_argument& e) {
      throw ModelError(at(p, "lvp_primitives"), e.what());
    }
  }
  // Cosserat family: s = x3 in [0, L0]
  double L0 = b.geometry.length;
  if (b.geometry.shape == "box") {
    if (b.geometry.lo(2) != 0.0) throw ModelError(at(p, "geometry.lo"), "rod bodies need x3 starting at 0");
    L0 = b.geometry.hi(2);
  }
  StrainBasis basis;
  CosseratOptions opt;
  opt.cells = b.cells;
  if (b.cells < 1) throw ModelError(at(p, "cells"), "cells must be positive");
  if (b.kind == "pcc") basis = StrainBasis::pcc(L0);
  else if (b.kind == "pcc_planar") basis = StrainBasis::pcc_planar(L0);
  else if (b.kind == "pcs") basis = StrainBasis::pcs(L0);
  else if (b.kind == "pac") basis = StrainBasis::pac(L0);
  else if (b.kind == "pgc") basis = StrainBasis::pgc(L0);
  else if (b.kind == "variable_radius_pcc") {
    if (b.geometry.shape != "cylinder" || b.geometry.hollow != 0.0)
      throw ModelError(at(p, "geometry.shape"), "variable radius bodies need a solid cylinder");
    basis = StrainBasis::pcc_planar(L0);
    opt.variable_radius = true;
  } else {
    basis.L0 = L0;
    basis.columns = b.columns;
    basis.offset = b.strain_offset;
    if (basis.columns.empty()) throw ModelError(at(p, "basis.columns"), "strain basis needs at least one column");
  }
  if (uses_width(b.kind)) {
    if (!(b.gauss_width > 0.0)) throw ModelError(at(p, "gauss_width"), "gaussian width must be positive");
    basis.gauss_width = b.gauss_width;
  }
  if (basis.dof() + (opt.variable_radius ? 2 : 0) > 10)
    throw ModelError(p, "more than 10 coordinates per body");
  return make_cosserat_body(dom, mat, basis, opt);
}

ChainModel build_chain(const ChainDesc& d) {
  ChainModel c;
  c.base.R = d.base_rotation.matrix();
  c.base.t = d.base_translation;
  c.gravity = d.gravity;
  try {
    c.stress_law = stress_law_from_string(d.stress_law);
  } catch (const std::invalid_argument& e) {
    throw ModelError("stress_law", e.what());
  }
  for (size_t i = 0; i < d.links.size(); ++i) {
    const std::string p = idx("links", i);
    const LinkDesc& ld = d.links[i];
    Link l;
    const JointDesc& jd = ld.joint;
    if (jd.kind == "revolute") l.joint = JointModel::revolute(jd.axis);
    else if (jd.kind == "prismatic") l.joint = JointModel::prismatic(jd.axis);
    else if (jd.kind == "rotated_base") l.joint = JointModel::rotated_base(jd.rotation.matrix());
    else if (jd.kind == "fixed") l.joint = JointModel::fixed(Transform3{jd.rotation.matrix(), jd.translation});
    else throw ModelError(at(p, "joint.kind"), "unknown joint kind '" + jd.kind + "'");
    const std::string pb = at(p, "body");
    l.body.model = build_body(ld.body, pb);
    l.body.x_J = ld.body.x_J;
    l.body.x_a = ld.body.x_a;
    l.body.x_b = ld.body.x_b;
    l.body.free_tip = ld.body.free_tip;
    l.body.order = ld.body.order[0] == 0 ? d.quadrature_order : ld.body.order;
    if (l.dof() > 10) throw ModelError(p, "more than 10 coordinates per link");
    const ReferenceDomain& dom = l.body.model->domain();
    const double tol = 1e-9 * dom.length_scale();
    // points off a rigid body are still rigidly attached to it
    const bool check_inside = ld.body.kind != "rigid";
    for (auto [name, x] : {std::pair<const char*, Vec3>{"x_J", l.body.x_J}, {"x_a", l.body.x_a}, {"x_b", l.body.x_b}})
      if (check_inside && !dom.contains(x, tol))
        throw ModelError(at(pb, std::string("anchors.") + name), "anchor lies outside the body (contact area assumption)");
    const Vec3 da = l.body.x_a - l.body.x_J, db = l.body.x_b - l.body.x_J;
    if (da.norm() == 0.0 || db.norm() == 0.0)
      throw ModelError(at(pb, "anchors"), "x_a and x_b must differ from x_J (contact area assumption)");
    if (!l.body.free_tip && std::abs(da.dot(db)) > 1e-12 * std::max(1.0, da.norm() * db.norm()))
      throw ModelError(at(pb, "anchors"),
                       "x_a - x_J and x_b - x_J must be orthogonal (contact area assumption)");
    c.links.push_back(l);
  }
  try {
    c.finalize();
  } catch (const std::invalid_argument& e) {
    throw ModelError("links", e.what());
  }
  return c;
}

StateDesc parse_state(const std::string& text, int n) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError("state", std::string("JSON syntax error: ") + e.what());
  }
  only_keys(j, "state", {"q", "qd", "qdd"});
  auto read = [&](const char* key, bool required) -> VecX {
    if (!j.contains(key)) {
      if (required) throw ModelError(at("state", key), "missing required field");
      return VecX::Zero(n);
    }
    const json& a = j[key];
    if (!a.is_array() || static_cast<int>(a.size()) != n)
      throw ModelError(at("state", key), "expected an array of " + std::to_string(n) + " numbers");
    VecX v(n);
    for (int i = 0; i < n; ++i) v(i) = num(a[i], idx(at("state", key), i));
    return v;
  };
  StateDesc s;
  s.q = read("q", true);
  s.qd = read("qd", false);
  s.qdd = read("qdd", false);
  return s;
}

}  // namespace softid
