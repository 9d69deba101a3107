#pragma once

// Forward-mode dual numbers with a runtime number of directions.
// Jet<T, Cap> carries a value and up to Cap directional parts; nesting
// (Jet<Jet<double, K>, 1>) gives mixed second derivatives.

#include <Eigen/Core>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <type_traits>

namespace softid {

template <class T, int Cap>
struct Jet {
  T a{};
  std::array<T, Cap> v;
  int n = 0;

  Jet() = default;
  Jet(double c) : a(c) {}
  Jet(const T& x) requires(!std::is_same_v<T, double>) : a(x) {}

  // value x with unit seed on direction i out of nd
  static Jet seed(const T& x, int i, int nd) {
    Jet r(x);
    r.n = nd;
    for (int k = 0; k < nd; ++k) r.v[k] = T(0.0);
    r.v[i] = T(1.0);
    return r;
  }
  static Jet with_dirs(const T& x, int nd) {
    Jet r(x);
    r.n = nd;
    for (int k = 0; k < nd; ++k) r.v[k] = T(0.0);
    return r;
  }

  Jet& operator+=(const Jet& y) { return *this = *this + y; }
  Jet& operator-=(const Jet& y) { return *this = *this - y; }
  Jet& operator*=(const Jet& y) { return *this = *this * y; }
  Jet& operator/=(const Jet& y) { return *this = *this / y; }

  friend Jet operator-(const Jet& x) {
    Jet r(-x.a);
    r.n = x.n;
    for (int i = 0; i < x.n; ++i) r.v[i] = -x.v[i];
    return r;
  }
  friend Jet operator+(const Jet& x) { return x; }

  friend Jet operator+(const Jet& x, const Jet& y) {
    Jet r(x.a + y.a);
    if (x.n == y.n) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i] + y.v[i];
    } else if (y.n == 0) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i];
    } else {
      assert(x.n == 0);
      r.n = y.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = y.v[i];
    }
    return r;
  }
  friend Jet operator-(const Jet& x, const Jet& y) {
    Jet r(x.a - y.a);
    if (x.n == y.n) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i] - y.v[i];
    } else if (y.n == 0) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i];
    } else {
      assert(x.n == 0);
      r.n = y.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = -y.v[i];
    }
    return r;
  }
  friend Jet operator*(const Jet& x, const Jet& y) {
    Jet r(x.a * y.a);
    if (x.n == y.n) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.a * y.v[i] + x.v[i] * y.a;
    } else if (y.n == 0) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i] * y.a;
    } else {
      assert(x.n == 0);
      r.n = y.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.a * y.v[i];
    }
    return r;
  }
  friend Jet operator/(const Jet& x, const Jet& y) {
    const T inv = T(1.0) / y.a;
    Jet r(x.a * inv);
    if (x.n == y.n) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = (x.v[i] - r.a * y.v[i]) * inv;
    } else if (y.n == 0) {
      r.n = x.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = x.v[i] * inv;
    } else {
      assert(x.n == 0);
      r.n = y.n;
      for (int i = 0; i < r.n; ++i) r.v[i] = -(r.a * y.v[i]) * inv;
    }
    return r;
  }

  friend Jet operator*(const Jet& x, double c) {
    Jet r(x.a * c);
    r.n = x.n;
    for (int i = 0; i < x.n; ++i) r.v[i] = x.v[i] * c;
    return r;
  }
  friend Jet operator*(double c, const Jet& x) { return x * c; }
  friend Jet operator/(const Jet& x, double c) { return x * (1.0 / c); }
  friend Jet operator+(const Jet& x, double c) {
    Jet r = x;
    r.a = r.a + c;
    return r;
  }
  friend Jet operator+(double c, const Jet& x) { return x + c; }
  friend Jet operator-(const Jet& x, double c) { return x + (-c); }
  friend Jet operator-(double c, const Jet& x) { return (-x) + c; }

  friend bool operator==(const Jet& x, const Jet& y) { return x.a == y.a; }
  friend bool operator!=(const Jet& x, const Jet& y) { return !(x.a == y.a); }
  friend bool operator<(const Jet& x, const Jet& y) { return x.a < y.a; }
  friend bool operator>(const Jet& x, const Jet& y) { return x.a > y.a; }
  friend bool operator<=(const Jet& x, const Jet& y) { return x.a <= y.a; }
  friend bool operator>=(const Jet& x, const Jet& y) { return x.a >= y.a; }
};

inline double value(double x) { return x; }
template <class T, int C>
double value(const Jet<T, C>& x) {
  return value(x.a);
}

namespace detail {
// r = f(x) with f'(x) = d
template <class T, int C>
Jet<T, C> chain(const Jet<T, C>& x, const T& fx, const T& d) {
  Jet<T, C> r(fx);
  r.n = x.n;
  for (int i = 0; i < x.n; ++i) r.v[i] = d * x.v[i];
  return r;
}
}  // namespace detail

template <class T, int C>
Jet<T, C> sin(const Jet<T, C>& x) {
  using std::cos, std::sin;
  return detail::chain(x, T(sin(x.a)), T(cos(x.a)));
}
template <class T, int C>
Jet<T, C> cos(const Jet<T, C>& x) {
  using std::cos, std::sin;
  return detail::chain(x, T(cos(x.a)), T(-sin(x.a)));
}
template <class T, int C>
Jet<T, C> exp(const Jet<T, C>& x) {
  using std::exp;
  const T e = exp(x.a);
  return detail::chain(x, e, e);
}
template <class T, int C>
Jet<T, C> log(const Jet<T, C>& x) {
  using std::log;
  return detail::chain(x, T(log(x.a)), T(T(1.0) / x.a));
}
template <class T, int C>
Jet<T, C> sqrt(const Jet<T, C>& x) {
  using std::sqrt;
  const T s = sqrt(x.a);
  return detail::chain(x, s, T(T(0.5) / s));
}
template <class T, int C>
Jet<T, C> pow(const Jet<T, C>& x, double p) {
  using std::pow;
  return detail::chain(x, T(pow(x.a, p)), T(p * pow(x.a, p - 1.0)));
}
template <class T, int C>
Jet<T, C> abs(const Jet<T, C>& x) {
  return value(x) < 0.0 ? -x : x;
}
template <class T, int C>
Jet<T, C> atan2(const Jet<T, C>& y, const Jet<T, C>& x) {
  using std::atan2;
  const T r2 = x.a * x.a + y.a * y.a;
  Jet<T, C> r(T(atan2(y.a, x.a)));
  const int n = x.n > y.n ? x.n : y.n;
  r.n = n;
  for (int i = 0; i < n; ++i) {
    const T dy = i < y.n ? y.v[i] : T(0.0);
    const T dx = i < x.n ? x.v[i] : T(0.0);
    r.v[i] = (x.a * dy - y.a * dx) / r2;
  }
  return r;
}

template <class T, int C>
bool isfinite(const Jet<T, C>& x) {
  using std::isfinite;
  if (!isfinite(x.a)) return false;
  for (int i = 0; i < x.n; ++i)
    if (!isfinite(x.v[i])) return false;
  return true;
}

using Jet10 = Jet<double, 10>;
// outer single direction (time), inner over coordinates
using DualJet = Jet<Jet10, 1>;
// outer over coordinates, inner over material coordinates
using JetJet = Jet<Jet10, 10>;

// Accessors for DualJet: value, coordinate derivative k, time derivative and
// the coordinate derivative of the time derivative.
inline double val(const DualJet& s) { return s.a.a; }
inline double d_q(const DualJet& s, int k) { return k < s.a.n ? s.a.v[k] : 0.0; }
inline double d_t(const DualJet& s) { return s.n ? s.v[0].a : 0.0; }
inline double d_tq(const DualJet& s, int k) { return (s.n && k < s.v[0].n) ? s.v[0].v[k] : 0.0; }

}  // namespace softid

namespace Eigen {

template <class T, int C>
struct NumTraits<softid::Jet<T, C>> : GenericNumTraits<softid::Jet<T, C>> {
  typedef softid::Jet<T, C> Real;
  typedef softid::Jet<T, C> NonInteger;
  typedef softid::Jet<T, C> Nested;
  typedef softid::Jet<T, C> Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2,
    MulCost = 4
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

}  // namespace Eigen
