#pragma once

#include <cmath>
#include <type_traits>

namespace pinnbench::ad {

// Forward-mode dual number, nestable: Dual<Dual<double>> carries second
// derivatives, and the scalar type may itself be a tape Var, which is how
// derivative-of-gradient quantities are formed. Nesting beyond depth 4 is
// unsupported by the derivative helpers (nothing in the case registry needs
// more than fourth order).
// zero carrying the same tape/nesting shape as x
template <class T>
T zero_like(const T& x) { return x - x; }
inline double zero_like(double) { return 0.0; }

template <class T>
struct Dual {
  T v{};  // value
  T t{};  // tangent

  Dual() = default;
  Dual(T value) : v(value), t(zero_like(value)) {}
  Dual(T value, T tangent) : v(value), t(tangent) {}
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.t + b.t}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.t - b.t}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.t}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.t * b.v + a.v * b.t};
}
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.v / b.v;
  return {q, (a.t - q * b.t) / b.v};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double c) { return {a.v + c, a.t}; }
template <class T> Dual<T> operator+(double c, const Dual<T>& a) { return a + c; }
template <class T> Dual<T> operator-(const Dual<T>& a, double c) { return {a.v - c, a.t}; }
template <class T> Dual<T> operator-(double c, const Dual<T>& a) { return {c - a.v, -a.t}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double c) { return {a.v * c, a.t * c}; }
template <class T> Dual<T> operator*(double c, const Dual<T>& a) { return a * c; }
template <class T> Dual<T> operator/(const Dual<T>& a, double c) { return {a.v / c, a.t / c}; }
template <class T> Dual<T> operator/(double c, const Dual<T>& a) {
  return Dual<T>{c + zero_like(a.v), zero_like(a.v)} / a;
}

// Mixed Dual<T> op S where S is a plain scalar living at some deeper nesting
// level (e.g. Dual<Dual<Var>> * Var). The constant has no tangent at any
// wrapping level, so it distributes onto both components recursively.
template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

template <class S, class Host>
concept DeepScalarOf = !std::is_same_v<S, double> && !is_dual<S>::value &&
                       requires(Host h, S s) { h = h * s; h = h + s; };

template <class T, DeepScalarOf<T> S> Dual<T> operator*(const Dual<T>& a, const S& c) { return {a.v * c, a.t * c}; }
template <class T, DeepScalarOf<T> S> Dual<T> operator*(const S& c, const Dual<T>& a) { return a * c; }
template <class T, DeepScalarOf<T> S> Dual<T> operator+(const Dual<T>& a, const S& c) { return {a.v + c, a.t}; }
template <class T, DeepScalarOf<T> S> Dual<T> operator+(const S& c, const Dual<T>& a) { return a + c; }
template <class T, DeepScalarOf<T> S> Dual<T> operator-(const Dual<T>& a, const S& c) { return {a.v - c, a.t}; }
template <class T, DeepScalarOf<T> S> Dual<T> operator-(const S& c, const Dual<T>& a) { return {c - a.v, -a.t}; }
template <class T, DeepScalarOf<T> S> Dual<T> operator/(const Dual<T>& a, const S& c) { return {a.v / c, a.t / c}; }

template <class T> Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T w = tanh(a.v);
  return {w, (1.0 - w * w) * a.t};
}
template <class T> Dual<T> sin(const Dual<T>& a) {
  using std::cos; using std::sin;
  return {sin(a.v), cos(a.v) * a.t};
}
template <class T> Dual<T> cos(const Dual<T>& a) {
  using std::cos; using std::sin;
  return {cos(a.v), -(sin(a.v) * a.t)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T w = exp(a.v);
  return {w, w * a.t};
}
template <class T> Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.t / a.v};
}
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T w = sqrt(a.v);
  return {w, a.t / (2.0 * w)};
}
template <class T> Dual<T> sinh(const Dual<T>& a) {
  using std::cosh; using std::sinh;
  return {sinh(a.v), cosh(a.v) * a.t};
}
template <class T> Dual<T> cosh(const Dual<T>& a) {
  using std::cosh; using std::sinh;
  return {cosh(a.v), sinh(a.v) * a.t};
}
template <class T> Dual<T> pow(const Dual<T>& a, double e) {
  using std::pow;
  return {pow(a.v, e), e * pow(a.v, e - 1.0) * a.t};
}

}  // namespace pinnbench::ad
