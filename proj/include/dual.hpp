#ifndef DUAL_HPP
#define DUAL_HPP

#include <cmath>

// Forward-mode dual numbers, a + b*eps with eps^2 = 0, for exact first
// derivatives of analytically supplied evaluators.  A small complex-over-T
// template is provided as well, since holomorphic evaluators have to be run
// on complex numbers whose components are dual (std::complex over a
// user-defined scalar is not guaranteed to work).
struct Dual {
  double v = 0;  // value
  double d = 0;  // derivative along the seeded direction

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }
inline Dual& operator/=(Dual& a, Dual b) { a = a / b; return a; }
inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }

inline Dual sqrt(Dual a) {
  double r = std::sqrt(a.v);
  return {r, a.d / (2 * r)};
}
inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, a.d * e};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual atan2(Dual y, Dual x) {
  double den = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / den};
}
inline double value(double x) { return x; }
inline double value(Dual x) { return x.v; }

// Complex numbers over an arbitrary real scalar T (double or Dual).
template <class T>
struct Cpx {
  T re{}, im{};

  Cpx() = default;
  Cpx(T r) : re(r) {}
  Cpx(T r, T i) : re(r), im(i) {}
};

template <class T> Cpx<T> operator+(Cpx<T> a, Cpx<T> b) { return {a.re + b.re, a.im + b.im}; }
template <class T> Cpx<T> operator-(Cpx<T> a, Cpx<T> b) { return {a.re - b.re, a.im - b.im}; }
template <class T> Cpx<T> operator-(Cpx<T> a) { return {-a.re, -a.im}; }
template <class T> Cpx<T> operator*(Cpx<T> a, Cpx<T> b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cpx<T> operator*(T s, Cpx<T> a) { return {s * a.re, s * a.im}; }
template <class T> Cpx<T> operator*(Cpx<T> a, T s) { return {a.re * s, a.im * s}; }
template <class T> Cpx<T> operator/(Cpx<T> a, Cpx<T> b) {
  T den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
template <class T> Cpx<T> operator/(Cpx<T> a, T s) { return {a.re / s, a.im / s}; }
template <class T> Cpx<T>& operator+=(Cpx<T>& a, Cpx<T> b) { a = a + b; return a; }
template <class T> Cpx<T>& operator-=(Cpx<T>& a, Cpx<T> b) { a = a - b; return a; }
template <class T> Cpx<T>& operator*=(Cpx<T>& a, Cpx<T> b) { a = a * b; return a; }

template <class T> Cpx<T> conj(Cpx<T> a) { return {a.re, -a.im}; }
template <class T> T norm2(Cpx<T> a) { return a.re * a.re + a.im * a.im; }

// integer power, negative exponents allowed
template <class T>
Cpx<T> ipow(Cpx<T> a, int n) {
  if (n < 0) return Cpx<T>(T(1)) / ipow(a, -n);
  Cpx<T> r(T(1));
  for (int k = 0; k < n; ++k) r = r * a;
  return r;
}

#endif
