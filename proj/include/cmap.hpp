#ifndef CMAP_HPP
#define CMAP_HPP

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cone.hpp"
#include "excalc.hpp"
#include "gh.hpp"
#include "imhp.hpp"
#include "json.hpp"
#include "legendre.hpp"
#include "qk.hpp"
#include "quatmath.hpp"

// From a degree-two homogeneous prepotential F to the Ferrara-Sabharwal
// quaternionic Kahler metric: twistor roots and the chi variables, the
// contour-integral potential L and its closed form, the Legendre transform
// data (Higgs field, connection, shifts), the graded Heisenberg symmetry
// algebra, dualization, the reduction to the canonical chart, and the final
// closed-form metric cross-checked against the generic pipeline.
namespace cmap {

using excalc::DerivScheme;
using excalc::Mat;
using excalc::Vec;
using excalc::VectorField;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// ----- prepotentials -------------------------------------------------------------

struct Prepotential {
  int n = 1;  // number of eta^A variables, A = 1..n
  std::function<cplx(const CVec&)> F;
  std::function<CVec(const CVec&)> FA;   // gradient, holomorphic
  std::function<CMat(const CVec&)> FAB;  // Hessian, holomorphic
  DerivScheme scheme;
};

inline Prepotential quadratic_prepotential(const CMat& C, DerivScheme scheme = {}) {
  Prepotential P;
  P.n = int(C.rows());
  P.scheme = scheme;
  P.F = [C](const CVec& e) { return cplx(0.5) * cplx(e.transpose() * (C * e)); };
  P.FA = [C](const CVec& e) { return CVec(C * e); };
  P.FAB = [C](const CVec&) { return C; };
  return P;
}

// c * prod_A eta_A^{p_A} with sum p_A = 2
inline Prepotential monomial_prepotential(cplx c, const Vec& powers, DerivScheme scheme = {}) {
  Prepotential P;
  P.n = int(powers.size());
  P.scheme = scheme;
  int n = P.n;
  P.F = [c, powers, n](const CVec& e) {
    cplx v = c;
    for (int A = 0; A < n; ++A) v *= std::pow(e[A], powers[A]);
    return v;
  };
  // gradient and Hessian by logarithmic differentiation
  P.FA = [c, powers, n](const CVec& e) {
    cplx f = c;
    for (int A = 0; A < n; ++A) f *= std::pow(e[A], powers[A]);
    CVec g(n);
    for (int A = 0; A < n; ++A) g[A] = powers[A] * f / e[A];
    return g;
  };
  P.FAB = [c, powers, n](const CVec& e) {
    cplx f = c;
    for (int A = 0; A < n; ++A) f *= std::pow(e[A], powers[A]);
    CMat h(n, n);
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B)
        h(A, B) = f * powers[A] * (powers[B] - (A == B ? 1.0 : 0.0)) / (e[A] * e[B]);
    return h;
  };
  return P;
}

// black-box holomorphic F: derivatives by central differences along each
// variable (valid for holomorphic functions with real steps)
inline Prepotential plugin_prepotential(int n, std::function<cplx(const CVec&)> F,
                                        DerivScheme scheme = {}) {
  Prepotential P;
  P.n = n;
  P.scheme = scheme;
  P.F = std::move(F);
  auto f = P.F;
  double h0 = scheme.h;
  P.FA = [f, n, h0](const CVec& e) {
    CVec g(n);
    for (int A = 0; A < n; ++A) {
      double h = h0 * std::max(1.0, std::abs(e[A]));
      CVec ep = e, em = e;
      ep[A] += h;
      em[A] -= h;
      g[A] = (f(ep) - f(em)) / (2 * h);
    }
    return g;
  };
  P.FAB = [f, n, h0](const CVec& e) {
    double hh = std::pow(h0, 0.7);
    CMat m(n, n);
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B) {
        double hA = hh * std::max(1.0, std::abs(e[A]));
        double hB = hh * std::max(1.0, std::abs(e[B]));
        if (A == B) {
          CVec ep = e, em = e;
          ep[A] += hA;
          em[A] -= hA;
          m(A, A) = (f(ep) - 2.0 * f(e) + f(em)) / (hA * hA);
        } else {
          cplx acc = 0;
          for (int s : {1, -1})
            for (int t : {1, -1}) {
              CVec ee = e;
              ee[A] += s * hA;
              ee[B] += t * hB;
              acc += double(s * t) * f(ee);
            }
          m(A, B) = acc / (4 * hA * hB);
        }
      }
    return m;
  };
  return P;
}

// degree-two homogeneity: F_A eta^A = 2F and F_AB eta^B = F_A
inline double homogeneity_residual(const Prepotential& P, const CVec& eta) {
  CVec g = P.FA(eta);
  double worst = std::abs(cplx(g.transpose() * eta) - 2.0 * P.F(eta));
  CVec h = P.FAB(eta) * eta;
  worst = std::max(worst, (h - g).cwiseAbs().maxCoeff());
  return worst;
}

// ----- twistor sections and the chi variables --------------------------------------

// a base point of the R^{n+1}-fibration, I = 0..n; the vectorial picture is
// x3(I) = (x^I, 2 Re z^I, 2 Im z^I)
struct CPoint {
  CVec z;
  Vec x;
};

inline CPoint from_stack(int m, const Vec& xs) {
  CPoint pt;
  pt.z.resize(m);
  pt.x.resize(m);
  for (int I = 0; I < m; ++I) {
    pt.x[I] = xs[3 * I];
    pt.z[I] = 0.5 * cplx(xs[3 * I + 1], xs[3 * I + 2]);
  }
  return pt;
}

inline Eigen::Vector3d x3(const CPoint& pt, int I) {
  return {pt.x[I], 2 * pt.z[I].real(), 2 * pt.z[I].imag()};
}

inline double r0(const CPoint& pt) { return x3(pt, 0).norm(); }

inline cplx eta(const CPoint& pt, int I, cplx zeta) {
  return pt.z[I] / zeta + pt.x[I] - std::conj(pt.z[I]) * zeta;
}

// the two roots of eta^0, antipodal on the twistor sphere; zeta_+ carries the
// "+r0" sign in the form -2z^0/(x^0 + r0)
inline std::pair<cplx, cplx> roots_zeta0(const CPoint& pt) {
  double r = r0(pt);
  if (r == 0) throw std::domain_error("cmap: degenerate configuration, x3(0) = 0");
  cplx z0 = pt.z[0];
  double x0 = pt.x[0];
  auto root = [&](double sgn) {  // sgn = +1 for zeta_+
    // pick whichever of the two displayed forms has the larger denominator
    if (std::abs(2.0 * std::conj(z0)) >= std::abs(x0 + sgn * r))
      return (x0 - sgn * r) / (2.0 * std::conj(z0));
    return -2.0 * z0 / (x0 + sgn * r);
  };
  return {root(1.0), root(-1.0)};
}

inline Vec psit(const CPoint& pt) {
  int n = int(pt.x.size()) - 1;
  Eigen::Vector3d v0 = x3(pt, 0);
  Vec t(n);
  for (int A = 1; A <= n; ++A) t[A - 1] = v0.dot(x3(pt, A)) / v0.squaredNorm();
  return t;
}

inline CVec chi(const CPoint& pt) {
  if (std::abs(pt.z[0]) == 0)
    throw std::domain_error("cmap: degenerate chart, z^0 = 0");
  auto [zp, zm] = roots_zeta0(pt);
  (void)zm;
  double r = r0(pt);
  int n = int(pt.x.size()) - 1;
  CVec c(n);
  for (int A = 1; A <= n; ++A) c[A - 1] = eta(pt, A, zp) / r;
  return c;
}

// the explicit display chi^A = x^A/r0 - (x^0/r0) Re(z^A/z^0) - i Im(z^A/z^0)
inline CVec chi_explicit(const CPoint& pt) {
  if (std::abs(pt.z[0]) == 0)
    throw std::domain_error("cmap: degenerate chart, z^0 = 0");
  double r = r0(pt);
  int n = int(pt.x.size()) - 1;
  CVec c(n);
  for (int A = 1; A <= n; ++A) {
    cplx ratio = pt.z[A] / pt.z[0];
    c[A - 1] = pt.x[A] / r - (pt.x[0] / r) * ratio.real() - cplx(0, 1) * ratio.imag();
  }
  return c;
}

// coefficient rows of d(chi^A) over the base slots (x^I, 2Re z^I, 2Im z^I),
// assembled from the differentiation formula in the complex spherical basis
// eta_{+1} = z, eta_0 = x, eta_{-1} = -zbar
inline CMat dchi_rows(const CPoint& pt) {
  int n = int(pt.x.size()) - 1;
  auto [zp, zm] = roots_zeta0(pt);
  (void)zm;
  double r = r0(pt);
  CVec c = chi(pt);
  Vec pt_ = psit(pt);
  CMat rows = CMat::Zero(n, 3 * (n + 1));
  // coefficient of d eta_m^I in the differential of chart slot 3I+i
  auto cm = [](int m, int i) -> cplx {
    if (m == 0) return i == 0 ? 1.0 : 0.0;
    if (m == 1) return i == 1 ? cplx(0.5) : (i == 2 ? cplx(0, 0.5) : cplx(0));
    return i == 1 ? cplx(-0.5) : (i == 2 ? cplx(0, 0.5) : cplx(0));
  };
  for (int B = 1; B <= n; ++B)
    for (int I = 0; I <= n; ++I)
      for (int i = 0; i < 3; ++i) {
        cplx acc = 0;
        for (int m : {1, 0, -1}) {
          cplx coef = cm(m, i);
          if (coef == cplx(0)) continue;
          cplx w = std::pow(zp, -m) * coef;
          if (I == B) acc += w;
          if (I == 0) acc += w * (double(m) * c[B - 1] - pt_[B - 1]);
        }
        rows(B - 1, 3 * I + i) = acc / r;
      }
  return rows;
}

// ----- the L-potential: contour integral and closed form ----------------------------

inline double L_closed(const Prepotential& P, const CPoint& pt) {
  return 2 * r0(pt) * P.F(chi(pt)).imag();
}

namespace detail {

// all finite roots of eta^I(zeta) = 0 for every I: candidate singularities of
// the integrand that the quadrature circles must avoid
inline std::vector<cplx> eta_roots(const CPoint& pt) {
  std::vector<cplx> roots;
  int m = int(pt.x.size());
  for (int I = 0; I < m; ++I) {
    cplx a = -std::conj(pt.z[I]), b = pt.x[I], c = pt.z[I];
    if (std::abs(a) < 1e-300) {
      if (std::abs(b) > 1e-300) roots.push_back(-c / b);
      continue;
    }
    cplx disc = std::sqrt(b * b - 4.0 * a * c);
    roots.push_back((-b + disc) / (2.0 * a));
    roots.push_back((-b - disc) / (2.0 * a));
  }
  return roots;
}

// residue of g at z0 by trapezoid quadrature on a circle (spectrally accurate)
inline cplx residue(const std::function<cplx(cplx)>& g, cplx z0, double rad, int npts) {
  cplx acc = 0;
  for (int k = 0; k < npts; ++k) {
    double th = 2 * M_PI * k / npts;
    cplx w = std::polar(rad, th);
    acc += g(z0 + w) * w;
  }
  return acc / double(npts);
}

}  // namespace detail

inline double L_contour(const Prepotential& P, const CPoint& pt, int npts = 2048) {
  auto [zp, zm] = roots_zeta0(pt);
  int n = P.n;
  auto etaA = [&](cplx zeta) {
    CVec e(n);
    for (int A = 1; A <= n; ++A) e[A - 1] = eta(pt, A, zeta);
    return e;
  };
  auto g = [&](cplx zeta) { return P.F(etaA(zeta)) / (zeta * eta(pt, 0, zeta)); };
  auto gbar = [&](cplx zeta) {
    return std::conj(P.F(etaA(zeta).conjugate())) / (zeta * eta(pt, 0, zeta));
  };
  // keep each circle well clear of every other candidate singularity
  auto radius = [&](cplx center, cplx other) {
    double d = std::abs(center - other);
    d = std::min(d, std::abs(center));  // zeta = 0 is always singular
    for (cplx s : detail::eta_roots(pt))
      if (std::abs(s - center) > 1e-14) d = std::min(d, std::abs(s - center));
    if (d < 1e-12) throw std::runtime_error("cmap: pole collision on the contour");
    return d / 2;
  };
  // the F-term circle encloses zeta_+, the conjugate-term circle zeta_-,
  // both oriented so that the sum is -i times the residues
  cplx res = detail::residue(g, zp, radius(zp, zm), npts) +
             detail::residue(gbar, zm, radius(zm, zp), npts);
  return (cplx(0, -1) * res).real();
}

// ----- the hyperkahler potential ---------------------------------------------------

// U = -(4|z^0|^2 / r0) Im[ chibar^A F_A(chi) ]
inline double hk_potential(const Prepotential& P, const CPoint& pt) {
  CVec c = chi(pt);
  return -(4 * std::norm(pt.z[0]) / r0(pt)) * cplx(c.adjoint() * P.FA(c)).imag();
}

// agreement between the two displayed expressions for U
inline double hk_potential_residual(const Prepotential& P, const CPoint& pt) {
  CVec c = chi(pt);
  Mat N = P.FAB(c).imag();
  Eigen::Vector3d v0 = x3(pt, 0);
  double alt = 0;
  for (int A = 1; A <= P.n; ++A)
    for (int B = 1; B <= P.n; ++B)
      alt -= v0.cross(x3(pt, A)).dot(v0.cross(x3(pt, B))) * N(A - 1, B - 1);
  alt /= std::pow(v0.norm(), 3);
  return std::abs(hk_potential(P, pt) - alt);
}

// ----- the L-potential as a black box for the legendre module ----------------------

// x-derivatives in closed form: L_{x^A} = 2 Im F_A(chi), L_{x^0} from the
// contraction identity (x3(0).x3(I)) L_{x^I} = x^0 L, and L_xx = -2 U_IJ
inline Vec cmap_Lx(const Prepotential& P, const CPoint& pt) {
  int n = P.n;
  CVec c = chi(pt);
  CVec g = P.FA(c);
  Vec lx(n + 1);
  for (int A = 1; A <= n; ++A) lx[A] = 2 * g[A - 1].imag();
  Eigen::Vector3d v0 = x3(pt, 0);
  double acc = pt.x[0] * L_closed(P, pt);
  for (int A = 1; A <= n; ++A) acc -= v0.dot(x3(pt, A)) * lx[A];
  lx[0] = acc / v0.squaredNorm();
  return lx;
}

struct HiggsData {
  Mat U;     // (n+1) x (n+1)
  double R;  // = hk potential / (2 r0)
};

namespace detail {

// rotation taking x3(0) to the (0, 1, 0) axis, where z^0 = r0/2 is maximally
// regular; the Higgs field and the gauge-fixed connection are equivariant, so
// they can always be evaluated in this frame
inline Eigen::Matrix3d canonical_rotation(const CPoint& pt) {
  Eigen::Vector3d u = x3(pt, 0).normalized(), v(0, 1, 0);
  quatmath::Quaternion q{1 + u.dot(v), 0, 0, 0};
  Eigen::Vector3d ax = u.cross(v);
  q.x = ax[0];
  q.y = ax[1];
  q.z = ax[2];
  if (quatmath::norm(q) < 1e-8) q = {0, 0, 0, 1};  // u = -v: half turn about the 3-axis
  return quatmath::rot3(q);
}

inline CPoint rotated(const CPoint& pt, const Eigen::Matrix3d& R) {
  int m = int(pt.x.size());
  Vec xs(3 * m);
  for (int I = 0; I < m; ++I) xs.segment<3>(3 * I) = R * x3(pt, I);
  return from_stack(m, xs);
}

}  // namespace detail

inline HiggsData higgs_matrix(const Prepotential& P, const CPoint& pt0) {
  int n = P.n;
  CPoint pt = detail::rotated(pt0, detail::canonical_rotation(pt0));
  CVec c = chi(pt);
  Mat N = P.FAB(c).imag();
  if (std::abs(Eigen::FullPivLU<Mat>(N).determinant()) < 1e-14)
    throw std::domain_error("cmap: singular Im F_AB");
  double r = r0(pt);
  HiggsData hd;
  hd.R = hk_potential(P, pt) / (2 * r);
  Vec t = psit(pt);
  Mat U(n + 1, n + 1);
  U(0, 0) = hd.R + t.dot(N * t);
  for (int A = 1; A <= n; ++A) {
    double v = -(N * t)[A - 1];
    U(0, A) = U(A, 0) = v;
    for (int B = 1; B <= n; ++B) U(A, B) = N(A - 1, B - 1);
  }
  hd.U = -U / r;
  return hd;
}

inline legendre::LPotential cmap_L(const Prepotential& P) {
  legendre::LPotential lp;
  lp.m = P.n + 1;
  lp.scheme = P.scheme;
  auto pack = [](const CVec& z, const Vec& x) { return CPoint{z, x}; };
  lp.L = [P, pack](const CVec& z, const Vec& x) { return L_closed(P, pack(z, x)); };
  lp.Lx = [P, pack](const CVec& z, const Vec& x) { return cmap_Lx(P, pack(z, x)); };
  lp.Lxx = [P, pack](const CVec& z, const Vec& x) {
    return Mat(-2.0 * higgs_matrix(P, pack(z, x)).U);
  };
  return lp;
}

// ----- shifts and transform variables ----------------------------------------------

struct Shifts {
  Vec phi;   // phi_0, phi_A
  Vec psit;  // psi-tilde^A
  CVec u;    // u_0, u_A at the given fiber point
};

// phi_A = (x^0/r0) Re F_A(chi) and the duality-selected phi_0, with
// u_I = psi_I + phi_I + (i/2) L_{x^I}
inline Shifts shifts_and_coords(const Prepotential& P, const CPoint& pt, const Vec& psi) {
  int n = P.n;
  CVec c = chi(pt);
  CVec g = P.FA(c);
  double xd = pt.x[0] / r0(pt);
  Shifts s;
  s.phi.resize(n + 1);
  s.psit = psit(pt);
  for (int A = 1; A <= n; ++A) s.phi[A] = xd * g[A - 1].real();
  double p0 = 0;
  for (int A = 1; A <= n; ++A) {
    p0 += 0.5 * xd * xd * c[A - 1].real() * g[A - 1].real();
    p0 -= 0.5 * c[A - 1].imag() * g[A - 1].imag();
    p0 -= 0.5 * s.psit[A - 1] * psi[A];
    p0 -= s.psit[A - 1] * s.phi[A];
  }
  s.phi[0] = p0;
  Vec lx = cmap_Lx(P, pt);
  s.u.resize(n + 1);
  for (int I = 0; I <= n; ++I) s.u[I] = cplx(psi[I] + s.phi[I], 0.5 * lx[I]);
  return s;
}

// the duality-adapted expression u_0 = psi_0 + (1/2)(psi_A ut^A - pst^A u_A)
// - (1/2) u_A ut^A with ut^A = z^A/z^0, against the direct shift formula
inline double shift0_residual(const Prepotential& P, const CPoint& pt, const Vec& psi) {
  Shifts s = shifts_and_coords(P, pt, psi);
  cplx u0 = cplx(psi[0], 0);
  for (int A = 1; A <= P.n; ++A) {
    cplx ut = pt.z[A] / pt.z[0];
    u0 += 0.5 * (psi[A] * ut - s.psit[A - 1] * s.u[A]) - 0.5 * s.u[A] * ut;
  }
  return std::abs(u0 - s.u[0]);
}

// ----- connection 1-forms and the upstairs data -------------------------------------

// rows over the full 4(n+1)-dimensional chart (base stack then fiber); the
// rows are assembled in the rotated frame of canonical_rotation and carried
// back, so the evaluation stays clear of the z^0 = 0 chart degeneracy
inline Mat connection_rows(const Prepotential& P, const Vec& p) {
  int n = P.n, m = n + 1;
  CPoint pt0 = from_stack(m, p.head(3 * m));
  Eigen::Matrix3d rot = detail::canonical_rotation(pt0);
  CPoint pt = detail::rotated(pt0, rot);
  CVec c = chi(pt);
  CMat fab = P.FAB(c);
  Mat N = fab.imag(), ReF = fab.real();
  double r = r0(pt);
  double xd = pt.x[0] / r;
  Eigen::Vector3d v0 = x3(pt, 0);
  Vec t = psit(pt);

  // base-slot rows of the elementary differentials
  Mat dpsit = Mat::Zero(n, 3 * m);
  for (int A = 1; A <= n; ++A) {
    Eigen::Vector3d vA = x3(pt, A);
    for (int i = 0; i < 3; ++i) {
      dpsit(A - 1, i) += (vA[i] - 2 * t[A - 1] * v0[i]) / v0.squaredNorm();
      dpsit(A - 1, 3 * A + i) += v0[i] / v0.squaredNorm();
    }
  }
  Vec dxd = Vec::Zero(3 * m);
  dxd[0] = 1.0 / r;
  for (int i = 0; i < 3; ++i) dxd[i] -= pt.x[0] * v0[i] / (r * r * r);
  Vec imzdz = Vec::Zero(3 * m);  // Im(zbar0_dia d z0_dia) = Im(zbar0 dz0)/r0^2
  imzdz[1] = -2 * pt.z[0].imag() / (4 * r * r);
  imzdz[2] = 2 * pt.z[0].real() / (4 * r * r);
  CMat dchi = dchi_rows(pt);

  Mat A = Mat::Zero(m, 4 * m);
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b) {
      A.row(a).head(3 * m) += ReF(a - 1, b - 1) * dpsit.row(b - 1);
      A.row(a).head(3 * m) -=
          N(a - 1, b - 1) * (c[b - 1].imag() * dxd.transpose() +
                             4 * c[b - 1].real() * imzdz.transpose());
    }
  // A_0 through the displayed A_0 + psit^A A_A combination
  double z0d2 = std::norm(pt.z[0]) / (r * r);
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b) {
      cplx cc = std::conj(c[a - 1]) * c[b - 1];
      for (int s = 0; s < 3 * m; ++s)
        A(0, s) += 2 * N(a - 1, b - 1) * z0d2 * (std::conj(c[a - 1]) * dchi(b - 1, s)).imag();
      A.row(0).head(3 * m) += 2 * N(a - 1, b - 1) * cc.real() * xd * imzdz.transpose();
    }
  for (int a = 1; a <= n; ++a) {
    A.row(0) -= t[a - 1] * A.row(a);
    // -(1/2) d(psit^A psi_A)
    A.row(0).head(3 * m) -= 0.5 * p[3 * m + a] * dpsit.row(a - 1);
    A(0, 3 * m + a) -= 0.5 * t[a - 1];
  }
  // carry the coefficient rows back to the original frame
  Mat out = A;
  for (int I = 0; I < m; ++I)
    out.block(0, 3 * I, m, 3) = A.block(0, 3 * I, m, 3) * rot;
  return out;
}

inline gh::GHData gh_data(const Prepotential& P) {
  gh::GHData g;
  g.m = P.n + 1;
  g.scheme = P.scheme;
  g.U = [P](const Vec& xs) { return higgs_matrix(P, from_stack(P.n + 1, xs)).U; };
  g.A = [P](const Vec& p) { return connection_rows(P, p); };
  return g;
}

// ----- graded Heisenberg algebra upstairs -------------------------------------------

// fields on the holomorphic chart (Re z^I, Im z^I, Re u_I, Im u_I), dim 4(n+1)
struct Heisenberg {
  std::vector<VectorField> Q, Pf;
  VectorField I, W;
};

inline Heisenberg heisenberg_upstairs(int n) {
  int m = n + 1, dim = 4 * m;
  auto zslot = [m](int I) { return 2 * I; };
  auto uslot = [m](int I) { return 2 * m + 2 * I; };
  Heisenberg hb;
  for (int A = 1; A <= n; ++A) {
    hb.Q.push_back({dim, [uslot, A, dim](const Vec&) {
                      Vec v = Vec::Zero(dim);
                      v[uslot(A)] = 1;  // d/du_A + c.c. = d/dRe(u_A)
                      return v;
                    }});
    hb.Pf.push_back({dim, [zslot, uslot, A, dim](const Vec& p) {
                       Vec v = Vec::Zero(dim);
                       cplx z0(p[zslot(0)], p[zslot(0) + 1]);
                       cplx uA(p[uslot(A)], p[uslot(A) + 1]);
                       // z^0 d/dz^A - u_A d/du_0 + c.c.
                       v[zslot(A)] = z0.real();
                       v[zslot(A) + 1] = z0.imag();
                       v[uslot(0)] = -uA.real();
                       v[uslot(0) + 1] = -uA.imag();
                       return v;
                     }});
  }
  hb.I = {dim, [uslot, dim](const Vec&) {
            Vec v = Vec::Zero(dim);
            v[uslot(0)] = 1;
            return v;
          }};
  hb.W = {dim, [zslot, uslot, n, dim](const Vec& p) {
            Vec v = Vec::Zero(dim);
            for (int c = 0; c < 2; ++c) {
              v[zslot(0) + c] = 2 * p[zslot(0) + c];
              v[uslot(0) + c] = -2 * p[uslot(0) + c];
              for (int A = 1; A <= n; ++A) {
                v[zslot(A) + c] = p[zslot(A) + c];
                v[uslot(A) + c] = -p[uslot(A) + c];
              }
            }
            return v;
          }};
  return hb;
}

// sup-norm residual of the graded Heisenberg relations at a point
inline double heisenberg_algebra_residual(int n, const Vec& p, DerivScheme scheme = {}) {
  Heisenberg hb = heisenberg_upstairs(n);
  double worst = 0;
  auto br = [&](const VectorField& X, const VectorField& Y) {
    return excalc::bracket(X, Y, scheme).comp(p);
  };
  for (int A = 0; A < n; ++A) {
    for (int B = 0; B < n; ++B) {
      Vec target = A == B ? hb.I.comp(p) : Vec(Vec::Zero(4 * (n + 1)));
      worst = std::max(worst, (br(hb.Pf[A], hb.Q[B]) - target).cwiseAbs().maxCoeff());
      worst = std::max(worst, br(hb.Pf[A], hb.Pf[B]).cwiseAbs().maxCoeff());
      worst = std::max(worst, br(hb.Q[A], hb.Q[B]).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst,
                     (br(hb.W, hb.Pf[A]) - hb.Pf[A].comp(p)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (br(hb.W, hb.Q[A]) - hb.Q[A].comp(p)).cwiseAbs().maxCoeff());
  }
  worst = std::max(worst, (br(hb.W, hb.I) - Vec(2 * hb.I.comp(p))).cwiseAbs().maxCoeff());
  return worst;
}

// the hyperkahler potential as a function on the holomorphic chart, through
// the inverse Legendre transform; the solver state is shared across calls, so
// nearby evaluations reuse the previous stationary point -- families whose
// Higgs field has poles need the optional guess to stay in the right basin
inline std::function<double(const Vec&)> potential_on_holo(const Prepotential& P,
                                                           const Vec& guess = {}) {
  int m = P.n + 1;
  auto tr = std::make_shared<legendre::Transformer>(cmap_L(P));
  if (guess.size() == m) {
    tr->warm = true;
    tr->last = guess;
  }
  return [tr, m](const Vec& p) {
    CVec z(m), u(m);
    for (int I = 0; I < m; ++I) {
      z[I] = cplx(p[2 * I], p[2 * I + 1]);
      u[I] = cplx(p[2 * m + 2 * I], p[2 * m + 2 * I + 1]);
    }
    return tr->solve(z, u).kappa;
  };
}

// invariance of the potential under all Heisenberg generators
inline double heisenberg_invariance_residual(const Prepotential& P, const Vec& p,
                                             const Vec& guess = {}) {
  Heisenberg hb = heisenberg_upstairs(P.n);
  auto U = potential_on_holo(P, guess);
  double worst = 0;
  auto dir = [&](const VectorField& X) {
    Vec v = X.comp(p);
    double acc = 0;
    for (int c = 0; c < v.size(); ++c) {
      if (v[c] == 0) continue;
      double h = P.scheme.h * std::max(1.0, std::abs(p[c]));
      Vec pp = p, pm = p;
      pp[c] += h;
      pm[c] -= h;
      acc += v[c] * (U(pp) - U(pm)) / (2 * h);
    }
    return std::abs(acc);
  };
  for (int A = 0; A < P.n; ++A) {
    worst = std::max(worst, dir(hb.Q[A]));
    worst = std::max(worst, dir(hb.Pf[A]));
  }
  worst = std::max(worst, dir(hb.I));
  worst = std::max(worst, dir(hb.W));
  return worst;
}

// ----- dualization -----------------------------------------------------------------

// holomorphic symplectomorphism on the (z, u) chart
inline void dual_point(CVec& z, CVec& u) {
  if (std::abs(z[0]) == 0) throw std::domain_error("cmap: dual chart needs z^0 != 0");
  int m = int(z.size());
  CVec zt(m), ut(m);
  zt[0] = z[0];
  ut[0] = u[0];
  for (int A = 1; A < m; ++A) {
    ut[A] = z[A] / z[0];
    zt[A] = -z[0] * u[A];
    ut[0] += (z[A] / z[0]) * u[A];
  }
  z = zt;
  u = ut;
}

// invariance of Omega_+ = du_I ^ dz^I under dualization, via the FD Jacobian
inline double dualization_symplectic_residual(int n, const Vec& p, DerivScheme scheme = {}) {
  int m = n + 1, dim = 4 * m;
  auto map = [m](const Vec& q) {
    CVec z(m), u(m);
    for (int I = 0; I < m; ++I) {
      z[I] = cplx(q[2 * I], q[2 * I + 1]);
      u[I] = cplx(q[2 * m + 2 * I], q[2 * m + 2 * I + 1]);
    }
    dual_point(z, u);
    Vec out(4 * m);
    for (int I = 0; I < m; ++I) {
      out[2 * I] = z[I].real();
      out[2 * I + 1] = z[I].imag();
      out[2 * m + 2 * I] = u[I].real();
      out[2 * m + 2 * I + 1] = u[I].imag();
    }
    return out;
  };
  // constant coefficient matrix of Omega_+ over the real chart
  CMat B = CMat::Zero(dim, dim);
  for (int I = 0; I < m; ++I) {
    CVec du = CVec::Zero(dim), dz = CVec::Zero(dim);
    dz[2 * I] = 1;
    dz[2 * I + 1] = cplx(0, 1);
    du[2 * m + 2 * I] = 1;
    du[2 * m + 2 * I + 1] = cplx(0, 1);
    B += du * dz.transpose() - dz * du.transpose();
  }
  Mat J(dim, dim);
  for (int c = 0; c < dim; ++c) {
    double h = scheme.h * std::max(1.0, std::abs(p[c]));
    Vec pp = p, pm = p;
    pp[c] += h;
    pm[c] -= h;
    J.col(c) = (map(pp) - map(pm)) / (2 * h);
  }
  CMat pull = J.transpose().cast<cplx>() * B * J.cast<cplx>();
  return (pull - B).cwiseAbs().maxCoeff();
}

// the period matrix and its dualization law
inline CMat tau_matrix(const Prepotential& P, const CVec& X) {
  CMat fab = P.FAB(X);
  Mat N = fab.imag();
  CVec nxb = N.cast<cplx>() * X.conjugate();
  cplx den = X.conjugate().transpose() * (N.cast<cplx>() * X.conjugate());
  CMat tau = fab;
  for (int A = 0; A < P.n; ++A)
    for (int B = 0; B < P.n; ++B) tau(A, B) -= cplx(0, 2) * nxb[A] * nxb[B] / den;
  return tau;
}

// anti-self-duality of L: replacing F by F - chi F_A and chi by F_A flips the
// sign, as a consequence of degree-two homogeneity
inline double l_antiselfdual_residual(const Prepotential& P, const CPoint& pt) {
  CVec c = chi(pt);
  cplx Fd = P.F(c) - cplx(P.FA(c).transpose() * c);
  return std::abs(2 * r0(pt) * Fd.imag() + L_closed(P, pt));
}

// ----- identity suite ----------------------------------------------------------------

namespace detail {

// complex-valued partial derivative of f(pt) along a base slot
inline cplx cpartial(const std::function<cplx(const CPoint&)>& f, const CPoint& pt, int slot,
                     double h0) {
  int m = int(pt.x.size());
  Vec xs(3 * m);
  for (int I = 0; I < m; ++I) {
    xs[3 * I] = pt.x[I];
    xs[3 * I + 1] = 2 * pt.z[I].real();
    xs[3 * I + 2] = 2 * pt.z[I].imag();
  }
  double h = h0 * std::max(1.0, std::abs(xs[slot]));
  Vec xp = xs, xm = xs;
  xp[slot] += h;
  xm[slot] -= h;
  return (f(from_stack(m, xp)) - f(from_stack(m, xm))) / (2 * h);
}

// the complexified collective operators L_1 + i L_0 and L_2 + i L_3 acting
// on a base function
inline std::array<cplx, 2> kernel_ops(const std::function<cplx(const CPoint&)>& f,
                                      const CPoint& pt, double h0) {
  int m = int(pt.x.size());
  Vec xs(3 * m);
  for (int I = 0; I < m; ++I) {
    xs[3 * I] = pt.x[I];
    xs[3 * I + 1] = 2 * pt.z[I].real();
    xs[3 * I + 2] = 2 * pt.z[I].imag();
  }
  cone::Generators gen = cone::collective_generators(m);
  auto dir = [&](const VectorField& X) {
    Vec v = X.comp(xs);
    cplx acc = 0;
    for (int s = 0; s < 3 * m; ++s)
      if (v[s] != 0) acc += v[s] * cpartial(f, pt, s, h0);
    return acc;
  };
  cplx d0 = dir(gen.L0);
  return {dir(gen.L[0]) + cplx(0, 1) * d0, dir(gen.L[1]) + cplx(0, 1) * dir(gen.L[2])};
}

}  // namespace detail

inline std::map<std::string, double> identity_suite(const Prepotential& P, const CPoint& pt) {
  std::map<std::string, double> out;
  int n = P.n;
  double h0 = P.scheme.h;
  CVec c = chi(pt);
  double r = r0(pt);
  Eigen::Vector3d v0 = x3(pt, 0);

  out["chi-explicit"] = (c - chi_explicit(pt)).cwiseAbs().maxCoeff();
  out["chi-conjugate"] = [&] {
    auto [zp, zm] = roots_zeta0(pt);
    (void)zp;
    double worst = 0;
    for (int A = 1; A <= n; ++A)
      worst = std::max(worst, std::abs(std::conj(c[A - 1]) - eta(pt, A, zm) / r));
    return worst;
  }();

  // chi^A chibar^B in the vectorial form (the denominator carries the
  // |x3(0)|^2 |x3(0) x i|^2 normalization)
  {
    Eigen::Vector3d iv(1, 0, 0);
    double den = v0.squaredNorm() * v0.cross(iv).squaredNorm();
    double worst = 0;
    for (int A = 1; A <= n; ++A)
      for (int B = 1; B <= n; ++B) {
        Eigen::Vector3d vA = x3(pt, A), vB = x3(pt, B);
        cplx rhs(v0.cross(vA).dot(v0.cross(vB)) / den,
                 -v0.norm() * v0.dot(vA.cross(vB)) / den);
        worst = std::max(worst, std::abs(c[A - 1] * std::conj(c[B - 1]) - rhs));
      }
    out["chi-chibar"] = worst;
  }
  // the ratio identity, with the same numerator over |x3(0) x x3(B)|^2
  {
    double worst = 0;
    for (int A = 1; A <= n; ++A)
      for (int B = 1; B <= n; ++B) {
        Eigen::Vector3d vA = x3(pt, A), vB = x3(pt, B);
        double den = v0.cross(vB).squaredNorm();
        cplx rhs(v0.cross(vA).dot(v0.cross(vB)) / den,
                 -v0.norm() * v0.dot(vA.cross(vB)) / den);
        worst = std::max(worst, std::abs(c[A - 1] / c[B - 1] - rhs));
      }
    out["chi-ratio"] = worst;
  }
  // psi-tilde identity
  {
    Vec t = psit(pt);
    double xd = pt.x[0] / r;
    double worst = 0;
    for (int A = 1; A <= n; ++A) {
      cplx lhs = pt.z[A] / pt.z[0] + 0.5 * (xd + 1) * c[A - 1] +
                 0.5 * (xd - 1) * std::conj(c[A - 1]);
      worst = std::max(worst, std::abs(lhs - cplx(t[A - 1], 0)));
    }
    out["psi-tilde"] = worst;
  }
  // differentiation formula for chi against central differences
  {
    CMat rows = dchi_rows(pt);
    double worst = 0;
    for (int A = 1; A <= n; ++A) {
      auto f = [&, A](const CPoint& q) { return chi(q)[A - 1]; };
      for (int s = 0; s < 3 * (n + 1); ++s)
        worst = std::max(worst,
                         std::abs(detail::cpartial(f, pt, s, h0) - rows(A - 1, s)));
    }
    out["chi-diff"] = worst;
  }
  // L_{x^A} = 2 Im F_A and the contraction identity for L_{x^0}
  {
    auto Lf = [&](const CPoint& q) { return cplx(L_closed(P, q), 0); };
    Vec lx = cmap_Lx(P, pt);
    double worst = 0;
    double contraction = -pt.x[0] * L_closed(P, pt);
    for (int I = 0; I <= n; ++I) {
      double fd = detail::cpartial(Lf, pt, 3 * I, h0).real();
      if (I > 0) worst = std::max(worst, std::abs(fd - lx[I]));
      contraction += v0.dot(x3(pt, I)) * fd;
    }
    out["L-xA"] = worst;
    out["L-contraction"] = std::abs(contraction);
  }
  // kernel membership of the building-block list
  {
    auto [zp, zm] = roots_zeta0(pt);
    (void)zp;
    (void)zm;
    double worst = 0;
    for (int A = 1; A <= n; ++A) {
      auto f1 = [&, A](const CPoint& q) { return q.z[A] / q.z[0]; };
      auto f2 = [&, A](const CPoint& q) {
        return (q.x[0] / r0(q) + 1) / 2.0 * chi(q)[A - 1];
      };
      auto f3 = [&, A](const CPoint& q) {
        return (q.x[0] / r0(q) - 1) / 2.0 * std::conj(chi(q)[A - 1]);
      };
      for (std::function<cplx(const CPoint&)> f :
           {std::function<cplx(const CPoint&)>(f1), std::function<cplx(const CPoint&)>(f2),
            std::function<cplx(const CPoint&)>(f3)}) {
        auto ops = detail::kernel_ops(f, pt, h0);
        worst = std::max({worst, std::abs(ops[0]), std::abs(ops[1])});
      }
    }
    out["kernel-list"] = worst;
  }
  out["hk-potential"] = hk_potential_residual(P, pt);
  out["L-antiselfdual"] = l_antiselfdual_residual(P, pt);
  return out;
}

// ----- reduction to the canonical chart ----------------------------------------------

namespace detail {

inline Eigen::Vector3d rho_vec(int n, const Vec& rho, int A) {
  if (A == 0) return {1, 0, 0};
  if (A == 1) return {rho[0], rho[1], 0};
  return {rho[3 * A - 4], rho[3 * A - 3], rho[3 * A - 2]};
}

inline CVec script_X(int n, const Vec& rho) {
  CVec X(n);
  for (int A = 1; A <= n; ++A) {
    Eigen::Vector3d v = rho_vec(n, rho, A);
    X[A - 1] = 0.5 * cplx(v[1], v[2]);
  }
  return X;
}

}  // namespace detail

// R = -2 Im[Xbar^A F_A(X)] on the canonical chart
inline double fs_R(const Prepotential& P, const Vec& rho) {
  CVec X = detail::script_X(P.n, rho);
  return -2.0 * cplx(X.adjoint() * P.FA(X)).imag();
}

inline qk::ReducedData reduce_cmap(const Prepotential& P) {
  int n = P.n;
  qk::ReducedData rd;
  rd.n = n;
  rd.scheme = P.scheme;
  rd.U = [P, n](const Vec& rho) {
    CVec X = detail::script_X(n, rho);
    Mat N = P.FAB(X).imag();
    if (std::abs(Eigen::FullPivLU<Mat>(N).determinant()) < 1e-14)
      throw std::domain_error("cmap: singular Im F_AB");
    double R = -2.0 * cplx(X.adjoint() * (N.cast<cplx>() * X)).real();
    Vec t(n);
    for (int A = 1; A <= n; ++A) t[A - 1] = detail::rho_vec(n, rho, A)[0];
    Mat U(n + 1, n + 1);
    U(0, 0) = R + t.dot(N * t);
    for (int A = 1; A <= n; ++A) {
      U(0, A) = U(A, 0) = -(N * t)[A - 1];
      for (int B = 1; B <= n; ++B) U(A, B) = N(A - 1, B - 1);
    }
    return Mat(-U);
  };
  rd.A = [P, n](const Vec& rho) {
    CVec X = detail::script_X(n, rho);
    CMat fab = P.FAB(X);
    Mat N = fab.imag(), ReF = fab.real();
    int nc = 3 * n - 1;
    Mat A = Mat::Zero(n + 1, nc);
    // script-A_A = Re F_AB d(psit^B), with psit^B = rho^B_1
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        A(a, imhp::coord_index(b, 0)) += ReF(a - 1, b - 1);
    // script-A_0 = -psit^A script-A_A + (1/2) Im F_AB (rho^A x drho^B)_1,
    // in the fiber gauge that absorbs the exact piece -(1/2) d(psit^A psi_A)
    for (int a = 1; a <= n; ++a) {
      Eigen::Vector3d va = detail::rho_vec(n, rho, a);
      A.row(0) -= va[0] * A.row(a);
      for (int b = 1; b <= n; ++b) {
        if (!imhp::frozen(b, 2))
          A(0, imhp::coord_index(b, 2)) += 0.5 * N(a - 1, b - 1) * va[1];
        A(0, imhp::coord_index(b, 1)) -= 0.5 * N(a - 1, b - 1) * va[2];
      }
    }
    return A;
  };
  return rd;
}

// block inverse of the reduced Higgs matrix
inline double higgs_inverse_residual(const Prepotential& P, const Vec& rho) {
  int n = P.n;
  qk::ReducedData rd = reduce_cmap(P);
  Mat U = rd.U(rho);
  CVec X = detail::script_X(n, rho);
  Mat N = P.FAB(X).imag();
  double R = fs_R(P, rho);
  Vec t(n);
  for (int A = 1; A <= n; ++A) t[A - 1] = detail::rho_vec(n, rho, A)[0];
  Mat Ninv = N.fullPivLu().inverse();
  Mat inv(n + 1, n + 1);
  inv(0, 0) = 1;
  for (int A = 1; A <= n; ++A) {
    inv(0, A) = inv(A, 0) = t[A - 1];
    for (int B = 1; B <= n; ++B)
      inv(A, B) = t[A - 1] * t[B - 1] + R * Ninv(A - 1, B - 1);
  }
  inv *= -1.0 / R;
  return (U * inv - Mat::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff();
}

// ----- the Ferrara-Sabharwal metric ---------------------------------------------------

struct FSData {
  int n = 1;
  std::function<double(const Vec&)> R;
  std::function<Vec(const Vec&)> alpha;              // 1-form row over the chart
  std::function<std::array<Vec, 4>(const Vec&)> th;  // theta_0..theta_3 rows
  std::function<CMat(const Vec&)> tau;
  std::function<Mat(const Vec&)> g_psk, g_t;  // symmetric coefficient matrices
  excalc::MetricField sg;                     // s times the metric, s = 1
  std::function<double(const Vec&)> kaehler;  // ln(Zbar N Z)
};

namespace detail {

// complex coefficient row of d(script-X^A) over the 4n-dimensional qk chart
inline CMat dX_rows(int n) {
  int dim = 4 * n, off = n + 1;
  CMat rows = CMat::Zero(n, dim);
  for (int A = 1; A <= n; ++A) {
    rows(A - 1, off + imhp::coord_index(A, 1)) = 0.5;
    if (!imhp::frozen(A, 2)) rows(A - 1, off + imhp::coord_index(A, 2)) = cplx(0, 0.5);
  }
  return rows;
}

inline Mat dpsit_rows(int n) {
  int dim = 4 * n, off = n + 1;
  Mat rows = Mat::Zero(n, dim);
  for (int A = 1; A <= n; ++A) rows(A - 1, off + imhp::coord_index(A, 0)) = 1;
  return rows;
}

inline Mat sym_cc(const CVec& a, const CVec& b) {
  CMat s = 0.5 * (a * b.transpose() + b * a.transpose());
  return s.real();
}

}  // namespace detail

inline FSData fs_assemble(const Prepotential& P) {
  int n = P.n, dim = 4 * n;
  FSData fs;
  fs.n = n;
  fs.R = [P](const Vec& p) { return fs_R(P, p.segment(P.n + 1, 3 * P.n - 1)); };
  fs.kaehler = [P, n](const Vec& p) {
    CVec X = detail::script_X(n, p.segment(n + 1, 3 * n - 1));
    CVec Z = X / X[0];
    Mat N = P.FAB(X).imag();
    double v = cplx(Z.adjoint() * (N.cast<cplx>() * Z)).real();
    if (v <= 0) throw std::domain_error("cmap: kaehler potential domain (Zbar N Z) <= 0");
    return std::log(v);
  };
  fs.tau = [P, n](const Vec& p) {
    return tau_matrix(P, detail::script_X(n, p.segment(n + 1, 3 * n - 1)));
  };
  // alpha = dpsi_0 + psit^A dpsi_A: the fiber gauge absorbing the exact piece
  // of the zero-indexed connection 1-form turns the symmetric-split alpha
  // into this one
  fs.alpha = [P, n, dim](const Vec& p) {
    Vec rho = p.segment(n + 1, 3 * n - 1);
    Vec a = Vec::Zero(dim);
    a[0] = 1;
    for (int A = 1; A <= n; ++A) a[A] += detail::rho_vec(n, rho, A)[0];
    return a;
  };
  fs.th = [P, n, dim, fs](const Vec& p) {
    Vec rho = p.segment(n + 1, 3 * n - 1);
    CVec X = detail::script_X(n, rho);
    CVec FAv = P.FA(X);
    CMat FABv = P.FAB(X);
    Mat N = FABv.imag();
    double R = fs_R(P, rho);
    if (R == 0) throw std::domain_error("cmap: R = 0 locus");
    CMat dX = detail::dX_rows(n);
    Mat dpt = detail::dpsit_rows(n);
    std::array<Vec, 4> th;
    // theta_0 = dR/2R = Re(Xbar N dX)/(Xbar N X), with (Xbar N X) = -R/2;
    // the real part follows from differentiating R with a holomorphic F_A
    CVec nx = N.cast<cplx>() * X;
    Vec t0 = Vec::Zero(dim);
    for (int A = 0; A < n; ++A)
      t0 += CVec(std::conj(nx[A]) * dX.row(A).transpose()).real();
    th[0] = t0 / (-R / 2);
    // theta_1 = -(1/2R)[alpha + Re(Xbar^A dF_A - F_A dXbar^A)]
    Vec t1 = fs.alpha(p);
    for (int A = 0; A < n; ++A) {
      CVec dFA = CVec::Zero(dim);
      for (int B = 0; B < n; ++B) dFA += FABv(A, B) * dX.row(B).transpose();
      t1 += CVec(std::conj(X[A]) * dFA - FAv[A] * dX.row(A).transpose().conjugate()).real();
    }
    th[1] = -t1 / (2 * R);
    // (theta_2 + i theta_3)/2 = -(1/2R)[X^A dpsi_A + F_A dpsit^A]
    CVec t23 = CVec::Zero(dim);
    for (int A = 0; A < n; ++A) {
      t23[A + 1] += X[A];
      t23 += FAv[A] * dpt.row(A).transpose().cast<cplx>();
    }
    t23 *= -1.0 / R;  // times 2 and divided by 2R
    th[2] = CVec(t23).real();
    th[3] = CVec(t23).imag();
    return th;
  };
  fs.g_psk = [P, n, dim](const Vec& p) {
    CVec X = detail::script_X(n, p.segment(n + 1, 3 * n - 1));
    Mat N = P.FAB(X).imag();
    cplx xnx = X.adjoint() * (N.cast<cplx>() * X);
    CMat dX = detail::dX_rows(n);
    Mat g = Mat::Zero(dim, dim);
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B)
        g += xnx.real() * N(A, B) *
             detail::sym_cc(dX.row(A).transpose().conjugate(), dX.row(B).transpose());
    CVec b = CVec::Zero(dim);  // (dXbar N X) row
    CVec nx = N.cast<cplx>() * X;
    for (int A = 0; A < n; ++A) b += nx[A] * dX.row(A).transpose().conjugate();
    g -= detail::sym_cc(b, b.conjugate());
    return Mat(g / (xnx.real() * xnx.real()));  // divide by (Xbar N X)^2
  };
  fs.g_t = [P, n, dim](const Vec& p) {
    CVec X = detail::script_X(n, p.segment(n + 1, 3 * n - 1));
    Mat N = P.FAB(X).imag();
    CMat tau = tau_matrix(P, X);
    Mat M = tau.imag().fullPivLu().inverse();  // (Im tau)^{-1}
    CMat dX = detail::dX_rows(n);
    Mat dpt = detail::dpsit_rows(n);
    Mat g = Mat::Zero(dim, dim);
    std::vector<CVec> w(n, CVec::Zero(dim));
    for (int A = 0; A < n; ++A) {
      w[A][A + 1] = 1;  // dpsi_A
      for (int C = 0; C < n; ++C) w[A] += tau(A, C) * dpt.row(C).transpose().cast<cplx>();
    }
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B)
        g += 0.5 * M(A, B) * detail::sym_cc(w[A], w[B].conjugate());
    return g;
  };
  fs.sg.dim = dim;
  fs.sg.comp = [fs, dim](const Vec& p) {
    double R = fs.R(p);
    if (R == 0) throw std::domain_error("cmap: R = 0 locus");
    auto th = fs.th(p);
    Vec a = fs.alpha(p);
    Mat g = fs.g_psk(p);
    g -= th[0] * th[0].transpose();
    g -= fs.g_t(p) / R;
    g -= a * a.transpose() / (R * R);
    return Mat(0.5 * g);
  };
  return fs;
}

// the displayed closed form of (Im tau)^{-1}
inline double torus_inverse_residual(const Prepotential& P, const Vec& rho) {
  CVec X = detail::script_X(P.n, rho);
  Mat N = P.FAB(X).imag();
  Mat M = tau_matrix(P, X).imag().fullPivLu().inverse();
  cplx xnx = X.adjoint() * (N.cast<cplx>() * X);
  Mat Ninv = N.fullPivLu().inverse();
  CMat rhs = Ninv.cast<cplx>();
  for (int A = 0; A < P.n; ++A)
    for (int B = 0; B < P.n; ++B)
      rhs(A, B) -= (std::conj(X[A]) * X[B] + X[A] * std::conj(X[B])) / xnx.real();
  return (M.cast<cplx>() - rhs).cwiseAbs().maxCoeff();
}

// downstairs Heisenberg generators on the qk chart, in the same fiber gauge
// as the reduced connection (the symmetric-split 1/2-terms collapse there)
inline Heisenberg downstairs_generators(int n) {
  int dim = 4 * n, off = n + 1;
  Heisenberg hb;
  for (int A = 1; A <= n; ++A) {
    hb.Q.push_back({dim, [A, dim](const Vec&) {
                      Vec v = Vec::Zero(dim);
                      v[A] = 1;
                      return v;
                    }});
    hb.Pf.push_back({dim, [A, off, dim](const Vec& p) {
                       Vec v = Vec::Zero(dim);
                       v[off + imhp::coord_index(A, 0)] = 1;
                       v[0] = -p[A];
                       return v;
                     }});
  }
  hb.I = {dim, [dim](const Vec&) {
            Vec v = Vec::Zero(dim);
            v[0] = 1;
            return v;
          }};
  // W scales psi_A and the rho block with weight -1, psi_0 with weight -2
  hb.W = {dim, [n, off, dim](const Vec& p) {
            Vec v = Vec::Zero(dim);
            v[0] = -2 * p[0];
            for (int A = 1; A <= n; ++A) v[A] = -p[A];
            for (int c = off; c < dim; ++c) v[c] = -p[c];
            return v;
          }};
  return hb;
}

// all eigenvalues of sg must carry one common sign at each sample
struct SignatureReport {
  bool definite = true;
  int sign = 0;
  double min_abs_eig = 0;
};

inline SignatureReport signature_check(const excalc::MetricField& sg,
                                       const std::vector<Vec>& samples) {
  SignatureReport rep;
  rep.min_abs_eig = std::numeric_limits<double>::infinity();
  for (const Vec& p : samples) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sg.comp(p));
    Vec ev = es.eigenvalues();
    int sgn = ev[0] > 0 ? 1 : -1;
    for (int i = 0; i < ev.size(); ++i) {
      int si = ev[i] > 0 ? 1 : -1;
      if (si != sgn) rep.definite = false;
      rep.min_abs_eig = std::min(rep.min_abs_eig, std::abs(ev[i]));
    }
    if (rep.sign == 0)
      rep.sign = sgn;
    else if (rep.sign != sgn)
      rep.definite = false;
  }
  return rep;
}

// {"family":"quadratic","C":[[[re,im],...],...]} with C complex symmetric, or
// {"family":"monomial","c":[re,im],"powers":[p_1,...,p_n]} with sum p_A = 2
inline Prepotential prepotential_from_json(const nlohmann::json& j, DerivScheme scheme = {}) {
  std::string family = j.at("family").get<std::string>();
  auto as_cplx = [](const nlohmann::json& e) {
    return cplx(e.at(0).get<double>(), e.at(1).get<double>());
  };
  if (family == "quadratic") {
    const auto& rows = j.at("C");
    int n = int(rows.size());
    CMat C(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) C(a, b) = as_cplx(rows.at(a).at(b));
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("cmap: quadratic coefficient matrix must be symmetric");
    return quadratic_prepotential(C, scheme);
  }
  if (family == "monomial") {
    const auto& pw = j.at("powers");
    Vec powers(pw.size());
    for (size_t a = 0; a < pw.size(); ++a) powers[a] = pw.at(a).get<double>();
    if (std::abs(powers.sum() - 2.0) > 1e-12)
      throw std::invalid_argument("cmap: monomial powers must sum to 2");
    return monomial_prepotential(as_cplx(j.at("c")), powers, scheme);
  }
  throw std::invalid_argument("cmap: unknown prepotential family '" + family + "'");
}

}  // namespace cmap

#endif
