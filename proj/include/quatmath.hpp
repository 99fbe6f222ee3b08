#ifndef QUATMATH_HPP
#define QUATMATH_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

// Exact quaternion algebra, the adjoint representation q^{-1} u_a q = R_ab(q) u_b,
// and Cartan-Maurer 1-form evaluation.  Everything here is analytic: these are
// the kernels all finite-difference residuals elsewhere are measured against.
namespace quatmath {

struct Quaternion {
  double w = 0, x = 0, y = 0, z = 0;  // components along u0=1, u1=i, u2=j, u3=k

  Quaternion() = default;
  Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  double operator[](int a) const { return a == 0 ? w : a == 1 ? x : a == 2 ? y : z; }
  double& operator[](int a) { return a == 0 ? w : a == 1 ? x : a == 2 ? y : z; }
};

// Im H = R^3; doubles as a plain 3-vector.
struct ImQuaternion {
  double x = 0, y = 0, z = 0;

  ImQuaternion() = default;
  ImQuaternion(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit ImQuaternion(const Eigen::Vector3d& v) : x(v[0]), y(v[1]), z(v[2]) {}

  Eigen::Vector3d vec() const { return {x, y, z}; }
  double operator[](int i) const { return i == 0 ? x : i == 1 ? y : z; }
  double& operator[](int i) { return i == 0 ? x : i == 1 ? y : z; }
};

using AdjointMatrix = Eigen::Matrix4d;

inline Quaternion embed(const ImQuaternion& v) { return {0, v.x, v.y, v.z}; }
inline ImQuaternion impart(const Quaternion& q) { return {q.x, q.y, q.z}; }

inline Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Quaternion operator*(double s, const Quaternion& a) {
  return {s * a.w, s * a.x, s * a.y, s * a.z};
}
inline ImQuaternion operator+(const ImQuaternion& a, const ImQuaternion& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline ImQuaternion operator-(const ImQuaternion& a, const ImQuaternion& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline ImQuaternion operator*(double s, const ImQuaternion& a) {
  return {s * a.x, s * a.y, s * a.z};
}

inline Quaternion qmul(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quaternion qconj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline double norm2(const Quaternion& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}
inline double norm(const Quaternion& q) { return std::sqrt(norm2(q)); }

inline Quaternion qinv(const Quaternion& q) {
  double n2 = norm2(q);
  if (n2 == 0) throw std::domain_error("qinv: zero quaternion");
  return (1.0 / n2) * qconj(q);
}

inline double dot(const ImQuaternion& a, const ImQuaternion& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline ImQuaternion cross(const ImQuaternion& a, const ImQuaternion& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const ImQuaternion& v) { return std::sqrt(dot(v, v)); }

// <p, q> = Re(p conj(q)): the Euclidean inner product on H.
inline double qdot(const Quaternion& a, const Quaternion& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

// R_ab(q) defined by q^{-1} u_a q = R_ab(q) u_b; orthogonal, R(lambda q) = R(q),
// R(q^{-1}) = R(q)^T, block diagonal with R_00 = 1.
inline AdjointMatrix adjoint(const Quaternion& q) {
  if (norm2(q) == 0) throw std::domain_error("adjoint: zero quaternion");
  Quaternion qi = qinv(q);
  AdjointMatrix R;
  for (int a = 0; a < 4; ++a) {
    Quaternion ua;
    ua[a] = 1;
    Quaternion s = qmul(qmul(qi, ua), q);
    for (int b = 0; b < 4; ++b) R(a, b) = s[b];
  }
  return R;
}

// the 3x3 rotation block of adjoint(q); for a vector v, q v q^{-1} = rot3(q) v
inline Eigen::Matrix3d rot3(const Quaternion& q) {
  return adjoint(q).block<3, 3>(1, 1);
}

// conj(q) v q: scales by |q|^2 and rotates; the homogeneous -> inhomogeneous map.
inline ImQuaternion sandwich(const Quaternion& q, const ImQuaternion& v) {
  Quaternion r = qmul(qmul(qconj(q), embed(v)), q);
  return impart(r);
}

// (sigma_L, sigma_R) = (q^{-1} dq, q d(q^{-1})) evaluated on the increment dq;
// q d(q^{-1}) = -dq q^{-1} since d(q q^{-1}) = 0.
inline std::pair<Quaternion, Quaternion> cartan_maurer(const Quaternion& q, const Quaternion& dq) {
  if (norm2(q) == 0) throw std::domain_error("cartan_maurer: zero quaternion");
  Quaternion qi = qinv(q);
  return {qmul(qi, dq), -1.0 * qmul(dq, qi)};
}

// Z2 representative: q ~ -q resolved by making the first nonzero component positive.
inline Quaternion z2rep(const Quaternion& q) {
  for (int a = 0; a < 4; ++a) {
    if (q[a] > 0) return q;
    if (q[a] < 0) return -1.0 * q;
  }
  return q;
}

// Unit quaternion u with rot3(u) = M for a proper rotation M (Shepperd's method).
inline Quaternion from_rot3(const Eigen::Matrix3d& M) {
  double t = M.trace();
  Quaternion q;
  if (t > 0) {
    double r = std::sqrt(1 + t);
    q.w = 0.5 * r;
    q.x = 0.5 * (M(2, 1) - M(1, 2)) / r;
    q.y = 0.5 * (M(0, 2) - M(2, 0)) / r;
    q.z = 0.5 * (M(1, 0) - M(0, 1)) / r;
  } else {
    int i = 0;
    if (M(1, 1) > M(0, 0)) i = 1;
    if (M(2, 2) > M(i, i)) i = 2;
    int j = (i + 1) % 3, k = (i + 2) % 3;
    double r = std::sqrt(1 + M(i, i) - M(j, j) - M(k, k));
    double v[3];
    v[i] = 0.5 * r;
    v[j] = 0.5 * (M(j, i) + M(i, j)) / r;
    v[k] = 0.5 * (M(k, i) + M(i, k)) / r;
    q.w = 0.5 * (M(k, j) - M(j, k)) / r;
    q.x = v[0];
    q.y = v[1];
    q.z = v[2];
  }
  return z2rep(q);
}

}  // namespace quatmath

#endif
