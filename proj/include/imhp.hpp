#ifndef IMHP_HPP
#define IMHP_HPP

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "excalc.hpp"
#include "quatmath.hpp"

// Chart machinery on the quotient of non-degenerate (n+1)-point configurations
// in R^3 by simultaneous rotations and scalings.  Only the canonical chart is
// implemented: the slice rho^0 = i, rho^1 = rho^1_1 i + rho^1_2 j with
// rho^1_2 > 0, and rho^I free for I >= 2.  Inhomogeneous coordinates are
// ordered (rho^1_1, rho^1_2, rho^2_1, rho^2_2, rho^2_3, ...), dimension 3n-1.
namespace imhp {

using excalc::DerivScheme;
using excalc::Idx;
using excalc::Mat;
using excalc::Vec;
using quatmath::ImQuaternion;
using quatmath::Quaternion;

inline int chart_dim(int n) { return 3 * n - 1; }

inline int eps(int i, int j, int k) {
  return (3 + j - i) % 3 == 1 && (3 + k - j) % 3 == 1 ? 1
         : (3 + i - j) % 3 == 1 && (3 + j - k) % 3 == 1 ? -1
                                                        : 0;
}

// all index tuples in {0,1,2}^rank
inline std::vector<Idx> multi_indices(int rank) {
  std::vector<Idx> out = {Idx{}};
  for (int f = 0; f < rank; ++f) {
    std::vector<Idx> next;
    for (const Idx& idx : out)
      for (int i = 0; i < 3; ++i) {
        Idx j = idx;
        j.push_back(i);
        next.push_back(j);
      }
    out = std::move(next);
  }
  return out;
}

// the four frozen components of the canonical slice: all of rho^0, and rho^1_3
inline bool frozen(int I, int i) { return I == 0 || (I == 1 && i == 2); }

inline int coord_index(int I, int i) {
  if (frozen(I, i)) throw std::logic_error("coord_index: frozen slice component");
  return I == 1 ? i : 3 * I - 4 + i;
}

// position vectors of the restricted configuration at a chart point
inline std::vector<ImQuaternion> config(int n, const Vec& rho) {
  std::vector<ImQuaternion> r(n + 1);
  r[0] = {1, 0, 0};
  r[1] = {rho[0], rho[1], 0};
  for (int I = 2; I <= n; ++I) r[I] = {rho[3 * I - 4], rho[3 * I - 3], rho[3 * I - 2]};
  return r;
}

// x^I = conj(q) rho^I q
inline std::vector<ImQuaternion> embed(int n, const Vec& rho, const Quaternion& q) {
  std::vector<ImQuaternion> r = config(n, rho);
  for (ImQuaternion& v : r) v = quatmath::sandwich(q, v);
  return r;
}

struct Projection {
  Vec rho;
  Quaternion q;
};

// invert x^I = conj(q) rho^I q on the chart where x^0 and x^1 span a plane:
// the chart components are rotation and scaling invariants of the configuration,
// and q is recovered from |x^0| and the frame (x^0, x^0 x x^1)
inline Projection project(const std::vector<ImQuaternion>& x) {
  int n = int(x.size()) - 1;
  Eigen::Vector3d x0 = x[0].vec(), x1 = x[1].vec();
  double r0 = x0.norm();
  Eigen::Vector3d c = x0.cross(x1);
  if (r0 < 1e-12 || c.norm() < 1e-12 * std::max(1.0, r0 * x1.norm()))
    throw std::domain_error("project: degenerate configuration for this chart");
  double cn = c.norm();
  Projection out;
  out.rho = Vec(chart_dim(n));
  for (int I = 1; I <= n; ++I) {
    Eigen::Vector3d xI = x[I].vec();
    Eigen::Vector3d cI = x0.cross(xI);
    double r1 = x0.dot(xI) / (r0 * r0);
    double r2 = c.dot(cI) / (cn * r0 * r0);
    double r3 = x0.dot(c.cross(cI)) / (cn * r0 * r0 * r0);
    if (I == 1) {
      out.rho[0] = r1;
      out.rho[1] = r2;
    } else {
      out.rho[3 * I - 4] = r1;
      out.rho[3 * I - 3] = r2;
      out.rho[3 * I - 2] = r3;
    }
  }
  // frame taking (i, j, k) to (x0, c x x0, c) directions, i.e. x^I = r0 M rho^I
  Eigen::Matrix3d M;
  M.col(0) = x0 / r0;
  M.col(2) = c / cn;
  M.col(1) = M.col(2).cross(Eigen::Vector3d(M.col(0)));
  Quaternion u = quatmath::from_rot3(M.transpose());
  out.q = std::sqrt(r0) * u;
  return out;
}

// L_{a,j}^I = <u_a u_j, rho^I>  (j = 0..2 labels the imaginary units)
inline double ell(const std::vector<ImQuaternion>& r, int a, int j, int I) {
  Quaternion ua, uj;
  ua[a] = 1;
  uj[j + 1] = 1;
  Quaternion p = quatmath::qmul(ua, uj);
  return p.x * r[I].x + p.y * r[I].y + p.z * r[I].z;
}

// connection data of the flat derivative in inhomogeneous coordinates: the
// quaternion-valued coefficients A[I][i] (supported on the frozen components)
// and the horizontal operators D[I][i], stored as coefficient vectors over the
// chart coordinates
struct ConnCoeffs {
  int n = 1;
  std::vector<std::array<Quaternion, 3>> A;
  std::vector<std::array<Vec, 3>> D;
};

inline ConnCoeffs conn_coeffs(int n, const Vec& rho) {
  if (rho[1] <= 0) throw std::domain_error("conn_coeffs: rho^1_2 must be positive");
  std::vector<ImQuaternion> r = config(n, rho);
  // the 16 unknown coefficients sit on the frozen components and are fixed by
  // the contraction conditions L_{a,i}^I A_{Ii,b} = delta_ab
  static const std::array<std::pair<int, int>, 4> frz = {{{0, 0}, {0, 1}, {0, 2}, {1, 2}}};
  Mat M(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int p = 0; p < 4; ++p) M(a, p) = ell(r, a, frz[p].second, frz[p].first);
  Eigen::FullPivLU<Mat> lu(M);
  if (!lu.isInvertible()) throw std::domain_error("conn_coeffs: singular contraction system");
  Mat sol = lu.inverse();  // sol(p, b) = A_{frz[p], b}
  ConnCoeffs cc;
  cc.n = n;
  cc.A.assign(n + 1, {});
  for (int p = 0; p < 4; ++p)
    for (int b = 0; b < 4; ++b) cc.A[frz[p].first][frz[p].second][b] = sol(p, b);
  int d = chart_dim(n);
  cc.D.assign(n + 1, {Vec::Zero(d), Vec::Zero(d), Vec::Zero(d)});
  for (int I = 0; I <= n; ++I)
    for (int i = 0; i < 3; ++i) {
      Vec v = Vec::Zero(d);
      if (!frozen(I, i)) v[coord_index(I, i)] = 1;
      for (int a = 0; a < 4; ++a) {
        double Aa = cc.A[I][i][a];
        if (Aa == 0) continue;
        for (int J = 0; J <= n; ++J)
          for (int j = 0; j < 3; ++j)
            if (!frozen(J, j)) v[coord_index(J, j)] -= Aa * ell(r, a, j, J);
      }
      cc.D[I][i] = v;
    }
  return cc;
}

// immutable memo keyed by rounded coordinates (insert-only, value-idempotent)
inline const ConnCoeffs& conn_coeffs_cached(int n, const Vec& rho) {
  static std::map<std::vector<long long>, ConnCoeffs> cache;
  static std::mutex mtx;
  std::vector<long long> key(rho.size());
  for (int i = 0; i < rho.size(); ++i) key[i] = llround(rho[i] * 1e12);
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(std::move(key), conn_coeffs(n, rho)).first;
  return it->second;
}

// residual of the four defining contraction conditions on a ConnCoeffs table
inline double defining_residual(const ConnCoeffs& cc, const Vec& rho) {
  int n = cc.n, d = chart_dim(n);
  std::vector<ImQuaternion> r = config(n, rho);
  double worst = 0;
  // drho A = 0 and drho D = d: coefficients on non-frozen components
  for (int I = 0; I <= n; ++I)
    for (int i = 0; i < 3; ++i) {
      if (frozen(I, i)) continue;
      for (int a = 0; a < 4; ++a) worst = std::max(worst, std::abs(cc.A[I][i][a]));
      Vec e = Vec::Zero(d);
      e[coord_index(I, i)] = 1;
      worst = std::max(worst, (cc.D[I][i] - e).cwiseAbs().maxCoeff());
    }
  // L A = delta and L D = 0
  for (int a = 0; a < 4; ++a) {
    Vec ld = Vec::Zero(d);
    for (int b = 0; b < 4; ++b) {
      double la = b == a ? -1.0 : 0.0;
      for (int I = 0; I <= n; ++I)
        for (int i = 0; i < 3; ++i) la += ell(r, a, i, I) * cc.A[I][i][b];
      worst = std::max(worst, std::abs(la));
    }
    for (int I = 0; I <= n; ++I)
      for (int i = 0; i < 3; ++i) ld += ell(r, a, i, I) * cc.D[I][i];
    worst = std::max(worst, ld.cwiseAbs().maxCoeff());
  }
  return worst;
}

inline double completeness_check(int n, const Vec& rho) {
  return defining_residual(conn_coeffs_cached(n, rho), rho);
}

// section of a bundle associated to the quotient action: scaling weight w and
// `rank` vector factors of the rotation group (0 = scalar, 1 = vector, ...)
struct Section {
  int n = 1;
  int w = 0;
  int rank = 0;
  std::function<double(const Vec&, const Idx&)> comp;  // idx.size() == rank
  DerivScheme scheme;
};

// component (I, i) of the induced covariant derivative of s, evaluated on the
// section's own indices:
//   scalar factor: D_{Ii} F + w A_{Ii,0} F
//   each vector factor j: - eps_{jkl} A_{Ii,k} F|_{j -> l}
inline double cov_deriv(const Section& s, const Vec& rho, int I, int i, const Idx& idx) {
  if (s.rank < 0 || int(idx.size()) != s.rank)
    throw std::invalid_argument("cov_deriv: representation mismatch");
  const ConnCoeffs& cc = conn_coeffs_cached(s.n, rho);
  double acc = 0;
  const Vec& dir = cc.D[I][i];
  for (int c = 0; c < dir.size(); ++c)
    if (dir[c] != 0)
      acc += dir[c] *
             excalc::partial([&](const Vec& p) { return s.comp(p, idx); }, rho, c, s.scheme.h);
  const Quaternion& A = cc.A[I][i];
  if (s.w != 0 && A[0] != 0) acc += s.w * A[0] * s.comp(rho, idx);
  for (int f = 0; f < s.rank; ++f)
    for (int k = 0; k < 3; ++k) {
      if (A[k + 1] == 0) continue;
      for (int l = 0; l < 3; ++l) {
        int e = eps(idx[f], k, l);
        if (!e) continue;
        Idx jdx = idx;
        jdx[f] = l;
        acc -= e * A[k + 1] * s.comp(rho, jdx);
      }
    }
  return acc;
}

// reduction of the equivariance of the lift: rotation constraint
//   -(rho^I x nabla_I)_i F_{j...} = sum_f eps_{i j_f k} F_{...k...}
// and scaling constraint rho^I . nabla_I F = w F
inline double section_constraints_residual(const Section& s, const Vec& rho) {
  std::vector<ImQuaternion> r = config(s.n, rho);
  double worst = 0;
  for (const Idx& idx : multi_indices(s.rank)) {
    double scl = -s.w * s.comp(rho, idx);
    for (int I = 0; I <= s.n; ++I)
      for (int i = 0; i < 3; ++i) scl += r[I][i] * cov_deriv(s, rho, I, i, idx);
    worst = std::max(worst, std::abs(scl));
    for (int i = 0; i < 3; ++i) {
      double rot = 0;
      for (int I = 0; I <= s.n; ++I)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            int e = eps(i, a, b);
            if (e) rot -= e * r[I][a] * cov_deriv(s, rho, I, b, idx);
          }
      for (size_t f = 0; f < idx.size(); ++f)
        for (int k = 0; k < 3; ++k) {
          int e = eps(i, idx[f], k);
          if (!e) continue;
          Idx jdx = idx;
          jdx[f] = k;
          rot -= e * s.comp(rho, jdx);
        }
      worst = std::max(worst, std::abs(rot));
    }
  }
  return worst;
}

// one covariant derivative of s, packaged as a section again (weight drops by
// one, the new vector index comes first, the configuration index I is a
// spectator); `outer_h` lets a second derivative step over the noise floor of
// the first
inline Section derived_section(const Section& s, int I, double outer_h) {
  Section t;
  t.n = s.n;
  t.w = s.w - 1;
  t.rank = s.rank + 1;
  t.scheme = s.scheme;
  t.scheme.h = outer_h;
  t.comp = [s, I](const Vec& p, const Idx& idx) {
    Idx rest(idx.begin() + 1, idx.end());
    return cov_deriv(s, p, I, idx[0], rest);
  };
  return t;
}

// the induced connection is flat: [nabla_{Ii}, nabla_{Jj}] s = 0
inline double flatness_residual(const Section& s, const Vec& rho) {
  double outer_h = std::pow(s.scheme.h, 2.0 / 3);
  std::vector<Idx> tuples = multi_indices(s.rank);
  double worst = 0;
  for (int I = 0; I <= s.n; ++I)
    for (int J = 0; J <= s.n; ++J) {
      Section dI = derived_section(s, I, outer_h);
      Section dJ = derived_section(s, J, outer_h);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (const Idx& idx : tuples) {
            Idx ii = idx, jj = idx;
            ii.insert(ii.begin(), i);
            jj.insert(jj.begin(), j);
            double v = cov_deriv(dJ, rho, I, i, jj) - cov_deriv(dI, rho, J, j, ii);
            worst = std::max(worst, std::abs(v));
          }
    }
  return worst;
}

}  // namespace imhp

#endif
