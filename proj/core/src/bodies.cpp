#include "softid/bodies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace softid {

namespace {

// Material coordinate as scalar type S; JetJet coordinates get an inner seed.
template <class S>
S lift(double v, int dir) {
  if constexpr (std::is_same_v<S, JetJet>) {
    return JetJet(Jet10::seed(v, dir, 3));
  } else {
    (void)dir;
    return S(v);
  }
}
template <class S>
Vec3T<S> lift(const Vec3& x) {
  return Vec3T<S>(lift<S>(x(0), 0), lift<S>(x(1), 1), lift<S>(x(2), 2));
}

template <class D>
class BodyBase : public BodyModel {
 public:
  using BodyModel::BodyModel;

  Vec3 position(const Vec3& x, const VecX& q) const override {
    return self().template eval<double>(x, q);
  }
  Vec3T<DualJet> position(const Vec3T<DualJet>& x, const VecXT<DualJet>& q) const override {
    return self().template eval<DualJet>(x, q);
  }
  Vec3T<JetJet> position(const Vec3T<JetJet>& x, const VecXT<JetJet>& q) const override {
    return self().template eval<JetJet>(x, q);
  }
  void map_points(const std::vector<Vec3>& xs, const VecX& q,
                  std::vector<Vec3>& out) const override {
    self().template map<double>(xs, q, out);
  }
  void map_points(const std::vector<Vec3>& xs, const VecXT<DualJet>& q,
                  std::vector<Vec3T<DualJet>>& out) const override {
    self().template map<DualJet>(xs, q, out);
  }
  void map_points(const std::vector<Vec3>& xs, const VecXT<JetJet>& q,
                  std::vector<Vec3T<JetJet>>& out) const override {
    self().template map<JetJet>(xs, q, out);
  }

  template <class S>
  void map(const std::vector<Vec3>& xs, const VecXT<S>& q, std::vector<Vec3T<S>>& out) const {
    out.resize(xs.size());
    for (size_t i = 0; i < xs.size(); ++i)
      out[i] = self().template eval<S>(lift<S>(xs[i]), q);
  }

 private:
  const D& self() const { return static_cast<const D&>(*this); }
};

class RigidBody final : public BodyBase<RigidBody> {
 public:
  using BodyBase::BodyBase;
  std::string kind() const override { return "rigid"; }
  int dof() const override { return 0; }
  template <class S>
  Vec3T<S> eval(const Vec3T<S>& x, const VecXT<S>&) const {
    return x;
  }
};

// sin(p)/p, (1 - cos p)/p^2, (p - sin p)/p^3 as functions of y = p^2
template <class S>
void exp_coeffs(const S& y, S& A, S& B, S& C) {
  using std::cos, std::sin, std::sqrt;
  if (value(y) < 1.0) {
    // alternating series in y, truncated well below double precision for y < 1
    static const auto tab = [] {
      std::array<std::array<double, 10>, 3> t{};
      double fact[24];
      fact[0] = 1.0;
      for (int k = 1; k < 24; ++k) fact[k] = fact[k - 1] * k;
      for (int k = 0; k < 10; ++k) {
        const double sg = k % 2 ? -1.0 : 1.0;
        t[0][k] = sg / fact[2 * k + 1];
        t[1][k] = sg / fact[2 * k + 2];
        t[2][k] = sg / fact[2 * k + 3];
      }
      return t;
    }();
    const auto& fa = tab[0];
    const auto& fb = tab[1];
    const auto& fc = tab[2];
    A = S(fa[9]);
    B = S(fb[9]);
    C = S(fc[9]);
    for (int k = 8; k >= 0; --k) {
      A = A * y + fa[k];
      B = B * y + fb[k];
      C = C * y + fc[k];
    }
    return;
  }
  const S p = sqrt(y);
  const S sp = sin(p);
  A = sp / p;
  B = (S(1.0) - cos(p)) / y;
  C = (p - sp) / (y * p);
}

template <class S>
struct Frame {
  Mat3T<S> R = Mat3T<S>::Identity();
  Vec3T<S> c = Vec3T<S>::Zero();
};

// exponential of the twist (th, u) on SE(3)
template <class S>
Frame<S> se3_exp(const Vec3T<S>& th, const Vec3T<S>& u) {
  S A, B, C;
  exp_coeffs(th.dot(th), A, B, C);
  const Mat3T<S> K = skew(th);
  const Mat3T<S> K2 = K * K;
  Frame<S> f;
  f.R = Mat3T<S>::Identity() + K * A + K2 * B;
  f.c = u + K * u * B + K2 * u * C;
  return f;
}

template <class S>
S bump(const S& s, const S& phi, double L0) {
  using std::exp;
  const S ds = 0.25 * L0 * L0 - (s - 0.5 * L0) * (s - 0.5 * L0);
  const S dp = 0.25 * std::numbers::pi * std::numbers::pi -
               (phi - 0.5 * std::numbers::pi) * (phi - 0.5 * std::numbers::pi);
  if (value(ds) <= 0.0 || value(dp) <= 0.0) return S(0.0);
  return exp(-(S(L0) / ds)) * exp(-(S(1.0) / dp));
}

class CosseratBody final : public BodyBase<CosseratBody> {
 public:
  CosseratBody(ReferenceDomain d, Material m, StrainBasis b, CosseratOptions o)
      : BodyBase(std::move(d), m), basis_(std::move(b)), opt_(o) {
    if (opt_.cells < 1) throw std::invalid_argument("cosserat body: cells must be positive");
    if (opt_.variable_radius && domain().kind != DomainKind::cylinder)
      throw std::invalid_argument("variable radius model needs a cylinder domain");
  }

  std::string kind() const override { return opt_.variable_radius ? "variable_radius_pcc" : "cosserat"; }
  int dof() const override { return basis_.dof() + (opt_.variable_radius ? 2 : 0); }

  template <class S>
  Vec3T<S> eval(const Vec3T<S>& x, const VecXT<S>& q) const {
    std::vector<S> st{x(2)};
    std::vector<Frame<S>> fr;
    backbone(st, q, fr);
    return section(fr[0], x, q);
  }

  template <class S>
  void map(const std::vector<Vec3>& xs, const VecXT<S>& q, std::vector<Vec3T<S>>& out) const {
    std::vector<double> sv(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) sv[i] = xs[i](2);
    std::sort(sv.begin(), sv.end());
    sv.erase(std::unique(sv.begin(), sv.end()), sv.end());
    std::vector<S> st;
    st.reserve(sv.size());
    for (double v : sv) st.push_back(lift<S>(v, 2));
    std::vector<Frame<S>> fr;
    backbone(st, q, fr);
    out.resize(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
      const size_t k = std::lower_bound(sv.begin(), sv.end(), xs[i](2)) - sv.begin();
      out[i] = section(fr[k], lift<S>(xs[i]), q);
    }
  }

 private:
  template <class S>
  Frame<S> magnus_step(const S& s0, const S& h, const VecXT<S>& qs) const {
    static const double r3 = std::sqrt(3.0);
    const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
    Vec3T<S> k1, n1, k2, n2;
    basis_.eval(S(s0 + h * c1), qs, k1, n1);
    basis_.eval(S(s0 + h * c2), qs, k2, n2);
    const S hh = h * 0.5;
    const S hc = h * h * (r3 / 12.0);
    const Vec3T<S> th = (k1 + k2) * hh + k1.cross(k2) * hc;
    const Vec3T<S> u = (n1 + n2) * hh + (k1.cross(n2) - k2.cross(n1)) * hc;
    return se3_exp(th, u);
  }

  // frames at stations sorted by value
  template <class S>
  void backbone(const std::vector<S>& st, const VecXT<S>& q, std::vector<Frame<S>>& out) const {
    const VecXT<S> qs = q.head(basis_.dof());
    out.resize(st.size());
    if (basis_.is_constant()) {
      Vec3T<S> k, n;
      basis_.eval(S(0.0), qs, k, n);
      for (size_t i = 0; i < st.size(); ++i) out[i] = se3_exp(Vec3T<S>(k * st[i]), Vec3T<S>(n * st[i]));
      return;
    }
    const double h = basis_.L0 / opt_.cells;
    Frame<S> g;
    int cell = 0;
    for (size_t i = 0; i < st.size(); ++i) {
      const double sv = value(st[i]);
      while ((cell + 1) * h <= sv * (1.0 + 1e-14)) {
        const Frame<S> e = magnus_step(S(cell * h), S(h), qs);
        g.c = g.c + g.R * e.c;
        g.R = g.R * e.R;
        ++cell;
      }
      const S rest = st[i] - cell * h;
      const Frame<S> e = magnus_step(S(cell * h), rest, qs);
      out[i].c = g.c + g.R * e.c;
      out[i].R = g.R * e.R;
    }
  }

  template <class S>
  Vec3T<S> section(const Frame<S>& f, const Vec3T<S>& x, const VecXT<S>& q) const {
    Vec3T<S> xs(x(0), x(1), S(0.0));
    if (opt_.variable_radius) {
      using std::atan2;
      const int nb = basis_.dof();
      const S r2 = x(0) * x(0) + x(1) * x(1);
      if (value(r2) > 0.0) {
        S phi = atan2(x(1), x(0));
        if (value(phi) < 0.0) phi = phi + 2.0 * std::numbers::pi;
        const double L0 = domain().length, R0 = domain().r_base;
        S dR = value(phi) < std::numbers::pi ? bump(x(2), phi, L0) * q(nb)
                                             : bump(x(2), S(phi - std::numbers::pi), L0) * q(nb + 1);
        xs = xs * (S(1.0) + dR / R0);
      }
    }
    return f.c + f.R * xs;
  }

  StrainBasis basis_;
  CosseratOptions opt_;
};

// ---- LVP primitives ----

template <class S, class F>
S unit_integral(F&& g) {
  const auto& gl = gauss_legendre(16);
  S acc(0.0);
  for (int i = 0; i < 16; ++i) acc = acc + g(S(0.5 * (1.0 + gl.nodes[i]))) * (0.5 * gl.weights[i]);
  return acc;
}

class LvpBody final : public BodyBase<LvpBody> {
 public:
  LvpBody(ReferenceDomain d, Material m, int n, std::vector<LvpPrimitive> p)
      : BodyBase(std::move(d), m), n_(n), prims_(std::move(p)) {
    L_ = domain().length_scale();
    R0_ = domain().kind == DomainKind::box ? 0.5 * (domain().hi - domain().lo).head<2>().minCoeff()
                                           : domain().r_base;
    for (const auto& pr : prims_) {
      if (static_cast<int>(pr.q_index.size()) != lvp_arity(pr.kind))
        throw std::invalid_argument("lvp primitive " + to_string(pr.kind) + " expects " +
                                    std::to_string(lvp_arity(pr.kind)) + " coordinates");
      for (int k : pr.q_index)
        if (k < 0 || k >= n_) throw std::invalid_argument("lvp primitive coordinate index out of range");
    }
  }

  std::string kind() const override { return "lvp"; }
  int dof() const override { return n_; }

  template <class S>
  Vec3T<S> eval(const Vec3T<S>& x, const VecXT<S>& q) const {
    Vec3T<S> y = x;
    for (const auto& pr : prims_) y = apply(pr, y, q);
    return y;
  }

 private:
  template <class S>
  Vec3T<S> apply(const LvpPrimitive& pr, const Vec3T<S>& x, const VecXT<S>& q) const {
    using std::cos, std::exp, std::sin, std::sqrt;
    const double L = L_;
    const S z = x(2);
    switch (pr.kind) {
      case LvpKind::stretch_compression: {
        const S a = q(pr.q_index[0]);
        auto lam = [&](const S& zz) { return exp(a * (zz / L) * (S(1.0) - zz / L)); };
        const S g = z * unit_integral<S>([&](const S& t) { return lam(z * t); });
        const S sl = S(1.0) / sqrt(lam(z));
        return Vec3T<S>(x(0) * sl, x(1) * sl, g);
      }
      case LvpKind::planar_bending_x1:
      case LvpKind::planar_bending_x2: {
        const bool b1 = pr.kind == LvpKind::planar_bending_x1;
        const S a = q(pr.q_index[0]), b = q(pr.q_index[1]);
        auto theta = [&](const S& zz) { return (a * zz + b * zz * zz * 0.5) / L; };
        const S kap = (a + z * b) / L;
        const S u = b1 ? x(0) : x(1);
        const S disc = S(1.0) - kap * u * 2.0;
        if (value(disc) <= 0.0)
          throw std::domain_error("lvp bending: curvature too large for the cross section");
        const S psi = u * 2.0 / (S(1.0) + sqrt(disc));
        const S th = theta(z);
        const S cs = z * unit_integral<S>([&](const S& t) { return sin(theta(S(z * t))); });
        const S cc = z * unit_integral<S>([&](const S& t) { return cos(theta(S(z * t))); });
        const S ct = cos(th), st = sin(th);
        if (b1) return Vec3T<S>(cs + psi * ct, x(1), cc - psi * st);
        return Vec3T<S>(x(0), cs + psi * ct, cc - psi * st);
      }
      case LvpKind::twist: {
        const S tau = q(pr.q_index[0]) * (z / L);
        const S c = cos(tau), s = sin(tau);
        return Vec3T<S>(c * x(0) - s * x(1), s * x(0) + c * x(1), z);
      }
      case LvpKind::shear_x1:
        return Vec3T<S>(x(0) + q(pr.q_index[0]) * (z / L), x(1), z);
      case LvpKind::shear_x2:
        return Vec3T<S>(x(0), x(1) + q(pr.q_index[0]) * (z / L), z);
      case LvpKind::source: {
        // cross-section area source r'^2 = r^2 + s(z), vanishing at both ends
        const S src = q(pr.q_index[0]) * (z / L) * (S(1.0) - z / L) * (4.0 * R0_ * R0_);
        const S r2 = x(0) * x(0) + x(1) * x(1);
        const S arg = S(1.0) + src / r2;
        if (value(arg) <= 0.0) throw std::domain_error("lvp source: cavity collapsed");
        const S sc = sqrt(arg);
        return Vec3T<S>(x(0) * sc, x(1) * sc, z);
      }
    }
    return x;
  }

  int n_;
  std::vector<LvpPrimitive> prims_;
  double L_ = 1.0, R0_ = 1.0;
};

}  // namespace

Mat3 BodyModel::jacobian_x(const Vec3& x, const VecX& q) const {
  Vec3T<DualJet> xs;
  for (int i = 0; i < 3; ++i) xs(i) = DualJet(Jet10::seed(x(i), i, 3));
  VecXT<DualJet> qs(q.size());
  for (int k = 0; k < q.size(); ++k) qs(k) = DualJet(q(k));
  const Vec3T<DualJet> p = position(xs, qs);
  Mat3 F;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) F(r, c) = p(r).a.n ? p(r).a.v[c] : 0.0;
  return F;
}

Mat3X BodyModel::jacobian_q(const Vec3& x, const VecX& q) const {
  const int n = static_cast<int>(q.size());
  Vec3T<DualJet> xs = x.cast<DualJet>();
  VecXT<DualJet> qs(n);
  for (int k = 0; k < n; ++k) qs(k) = DualJet(Jet10::seed(q(k), k, n));
  const Vec3T<DualJet> p = position(xs, qs);
  Mat3X J = Mat3X::Zero(3, n);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < p(r).a.n; ++c) J(r, c) = p(r).a.v[c];
  return J;
}

BodyModelPtr make_rigid_body(ReferenceDomain domain, Material material) {
  return std::make_shared<RigidBody>(std::move(domain), material);
}

bool StrainBasis::is_constant() const {
  for (const auto& c : columns)
    for (const auto& t : c)
      if (t.shape != StrainShape::constant) return false;
  return true;
}

StrainBasis StrainBasis::pcc(double L0) {
  StrainBasis b;
  b.L0 = L0;
  b.columns = {{{0, 1.0 / L0, StrainShape::constant}},
               {{1, 1.0 / L0, StrainShape::constant}},
               {{5, 1.0 / L0, StrainShape::constant}}};
  return b;
}

StrainBasis StrainBasis::pcc_planar(double L0) {
  StrainBasis b;
  b.L0 = L0;
  b.columns = {{{0, 1.0 / L0, StrainShape::constant}}, {{5, 1.0 / L0, StrainShape::constant}}};
  return b;
}

StrainBasis StrainBasis::pcs(double L0) {
  StrainBasis b;
  b.L0 = L0;
  for (int c = 0; c < 6; ++c) b.columns.push_back({{c, 1.0 / L0, StrainShape::constant}});
  return b;
}

StrainBasis StrainBasis::pac(double L0) {
  StrainBasis b;
  b.L0 = L0;
  b.columns = {{{1, 1.0 / L0, StrainShape::constant}},
               {{1, 1.0 / L0, StrainShape::linear}},
               {{0, -1.0 / L0, StrainShape::constant}},
               {{0, -1.0 / L0, StrainShape::linear}}};
  return b;
}

StrainBasis StrainBasis::pgc(double L0) {
  StrainBasis b;
  b.L0 = L0;
  b.columns = {{{1, 1.0 / L0, StrainShape::constant}},
               {{1, 1.0 / L0, StrainShape::gaussian}},
               {{0, -1.0 / L0, StrainShape::constant}},
               {{0, -1.0 / L0, StrainShape::gaussian}},
               {{5, 1.0 / L0, StrainShape::constant}}};
  return b;
}

BodyModelPtr make_cosserat_body(ReferenceDomain domain, Material material, StrainBasis basis,
                                CosseratOptions opt) {
  if (domain.kind != DomainKind::cylinder && domain.kind != DomainKind::truncated_cone)
    throw std::invalid_argument("cosserat body needs a cylinder or cone domain");
  return std::make_shared<CosseratBody>(std::move(domain), material, std::move(basis), opt);
}

double radial_bump(double s, double phi, double L0) { return bump(s, phi, L0); }

int lvp_arity(LvpKind k) {
  return (k == LvpKind::planar_bending_x1 || k == LvpKind::planar_bending_x2) ? 2 : 1;
}

std::string to_string(LvpKind k) {
  switch (k) {
    case LvpKind::stretch_compression: return "stretch_compression";
    case LvpKind::planar_bending_x1: return "planar_bending_x1";
    case LvpKind::planar_bending_x2: return "planar_bending_x2";
    case LvpKind::twist: return "twist";
    case LvpKind::shear_x1: return "shear_x1";
    case LvpKind::shear_x2: return "shear_x2";
    case LvpKind::source: return "source";
  }
  return "?";
}

LvpKind lvp_kind_from_string(const std::string& s) {
  for (auto k : {LvpKind::stretch_compression, LvpKind::planar_bending_x1, LvpKind::planar_bending_x2,
                 LvpKind::twist, LvpKind::shear_x1, LvpKind::shear_x2, LvpKind::source})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown lvp primitive '" + s + "'");
}

BodyModelPtr make_lvp_body(ReferenceDomain domain, Material material, int dof,
                           std::vector<LvpPrimitive> primitives) {
  return std::make_shared<LvpBody>(std::move(domain), material, dof, std::move(primitives));
}

}  // namespace softid
