#ifndef GH_HPP
#define GH_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "excalc.hpp"
#include "quatmath.hpp"

// Extended Gibbons-Hawking hyperkahler construction: from a Higgs field U_IJ(x)
// on R^{3m} and connection 1-forms A_I, build the triplet of symplectic forms
// and the metric on the total space of the R^m bundle, and verify the Bogomolny
// equations and the pointwise quaternionic algebra.
//
// Chart convention for the total space (dimension 4m):
//   p = (x^0_1, x^0_2, x^0_3, ..., x^{m-1}_3, psi_0, ..., psi_{m-1}).
namespace gh {

using excalc::DerivScheme;
using excalc::Idx;
using excalc::KForm;
using excalc::Mat;
using excalc::MetricField;
using excalc::Vec;
using excalc::VectorField;

inline int eps(int i, int j, int k) {
  return (3 + j - i) % 3 == 1 && (3 + k - j) % 3 == 1 ? 1
         : (3 + i - j) % 3 == 1 && (3 + j - k) % 3 == 1 ? -1
                                                        : 0;
}

struct GHData {
  int m = 1;
  // Higgs field on the base: x in R^{3m} -> symmetric m x m matrix
  std::function<Mat(const Vec&)> U;
  // connection components over ALL 4m chart coordinates: p -> m x 4m matrix,
  // row I = components of A_I (psi-direction entries are permitted; they can
  // only come from exact pieces and drop out of every curvature)
  std::function<Mat(const Vec&)> A;
  DerivScheme scheme;

  int dim() const { return 4 * m; }
  int xi(int I, int i) const { return 3 * I + i; }  // i = 0..2
  int psi(int I) const { return 3 * m + I; }
  Vec base(const Vec& p) const { return p.head(3 * m); }
};

using HKTriple = std::array<KForm, 3>;

// evaluate a 2-form into its antisymmetric coefficient matrix
inline Mat form_matrix(const KForm& w, const Vec& p) {
  Mat W = Mat::Zero(w.dim, w.dim);
  excalc::for_each_tuple(w.dim, 2, [&](const Idx& idx) {
    double c = w.coef(p, idx);
    W(idx[0], idx[1]) = c;
    W(idx[1], idx[0]) = -c;
  });
  return W;
}

inline double bogomolny1_residual(const GHData& gh, const Vec& xbase) {
  int m = gh.m;
  double h = gh.scheme.h;
  // dU(I, i) = partial_{x^I_i} U as an m x m matrix
  std::vector<Mat> dU(3 * m);
  for (int c = 0; c < 3 * m; ++c) {
    double step = h * std::max(1.0, std::abs(xbase[c]));
    Vec pp = xbase, pm = xbase;
    pp[c] += step;
    pm[c] -= step;
    dU[c] = (gh.U(pp) - gh.U(pm)) / (2 * step);
  }
  double worst = 0;
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int K = 0; K < m; ++K)
        for (int i = 0; i < 3; ++i)
          worst = std::max(worst, std::abs(dU[3 * I + i](K, J) - dU[3 * J + i](K, I)));
  return worst;
}

// F_K = *^I dU_KI with *^I dx^J = (1/2) dx^I ^ dx^J, returned as antisymmetric
// matrices over the base coordinates
inline std::vector<Mat> star_dU(const GHData& gh, const Vec& xbase) {
  int m = gh.m;
  double h = gh.scheme.h;
  std::vector<Mat> dU(3 * m);
  for (int c = 0; c < 3 * m; ++c) {
    double step = h * std::max(1.0, std::abs(xbase[c]));
    Vec pp = xbase, pm = xbase;
    pp[c] += step;
    pm[c] -= step;
    dU[c] = (gh.U(pp) - gh.U(pm)) / (2 * step);
  }
  std::vector<Mat> F(m, Mat::Zero(3 * m, 3 * m));
  for (int K = 0; K < m; ++K)
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J)
        for (int j = 0; j < 3; ++j)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int e = eps(j, a, b);
              if (e == 0) continue;
              double c = 0.5 * e * dU[3 * J + j](K, I);
              F[K](3 * I + a, 3 * J + b) += c;
              F[K](3 * J + b, 3 * I + a) -= c;
            }
  return F;
}

// curvature dA_K over the full chart
inline std::vector<Mat> dA(const GHData& gh, const Vec& p) {
  int n = gh.dim();
  double h = gh.scheme.h;
  std::vector<Mat> dAp(gh.m, Mat::Zero(n, n));
  std::vector<Mat> dcomp(n);  // dcomp[c] = partial_c A (m x 4m)
  for (int c = 0; c < n; ++c) {
    double step = h * std::max(1.0, std::abs(p[c]));
    Vec pp = p, pm = p;
    pp[c] += step;
    pm[c] -= step;
    dcomp[c] = (gh.A(pp) - gh.A(pm)) / (2 * step);
  }
  for (int K = 0; K < gh.m; ++K)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dAp[K](a, b) = dcomp[a](K, b) - dcomp[b](K, a);
  return dAp;
}

inline double bogomolny2_residual(const GHData& gh, const Vec& p) {
  std::vector<Mat> F = star_dU(gh, gh.base(p));
  std::vector<Mat> dAp = dA(gh, p);
  double worst = 0;
  int nb = 3 * gh.m, n = gh.dim();
  for (int K = 0; K < gh.m; ++K) {
    Mat R = dAp[K];
    R.topLeftCorner(nb, nb) -= F[K];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) worst = std::max(worst, std::abs(R(a, b)));
  }
  return worst;
}

// the three symplectic forms Om_k = -(1/2) U_IJ (dx^I ^ dx^J)_k - dx^K_k ^ (dpsi_K + A_K)
inline HKTriple hk_forms(const GHData& gh) {
  HKTriple t;
  for (int k = 0; k < 3; ++k) {
    t[k] = excalc::two_form(gh.dim(), [gh, k](const Vec& p) {
      int m = gh.m, n = gh.dim();
      Mat W = Mat::Zero(n, n);
      Mat Up = gh.U(gh.base(p));
      Mat Ap = gh.A(p);
      for (int I = 0; I < m; ++I)
        for (int J = 0; J < m; ++J)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int e = eps(k, a, b);
              if (!e) continue;
              double c = -0.5 * Up(I, J) * e;
              W(gh.xi(I, a), gh.xi(J, b)) += c;
              W(gh.xi(J, b), gh.xi(I, a)) -= c;
            }
      for (int K = 0; K < m; ++K) {
        Vec E = Vec::Zero(n);
        E[gh.psi(K)] = 1;
        E += Ap.row(K).transpose();
        int row = gh.xi(K, k);
        for (int q = 0; q < n; ++q) {
          if (E[q] == 0) continue;
          W(row, q) -= E[q];
          W(q, row) += E[q];
        }
      }
      return W;
    });
  }
  return t;
}

// G = (1/2) U_IJ dx^I . dx^J + (1/2) U^{IJ} (dpsi_I + A_I)(dpsi_J + A_J)
inline MetricField hk_metric(const GHData& gh) {
  MetricField g;
  g.dim = gh.dim();
  g.comp = [gh](const Vec& p) {
    int m = gh.m, n = gh.dim();
    Mat G = Mat::Zero(n, n);
    Mat Up = gh.U(gh.base(p));
    Eigen::FullPivLU<Mat> lu(Up);
    if (!lu.isInvertible()) throw std::domain_error("hk_metric: singular Higgs field");
    Mat Uinv = lu.inverse();
    Mat Ap = gh.A(p);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J)
        for (int i = 0; i < 3; ++i) G(gh.xi(I, i), gh.xi(J, i)) += 0.5 * Up(I, J);
    std::vector<Vec> E(m);
    for (int I = 0; I < m; ++I) {
      E[I] = Vec::Zero(n);
      E[I][gh.psi(I)] = 1;
      E[I] += Ap.row(I).transpose();
    }
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) G += 0.5 * Uinv(I, J) * (E[I] * E[J].transpose());
    return G;
  };
  return g;
}

// quaternionic coframe H^I = U^{IJ}(dpsi_J + A_J) + dx^I: component a of H^I is
// row (I, a) of the returned (m*4) x 4m matrix
inline Mat coframe(const GHData& gh, const Vec& p) {
  int m = gh.m, n = gh.dim();
  Mat Up = gh.U(gh.base(p));
  Mat Uinv = Up.inverse();
  Mat Ap = gh.A(p);
  Mat H = Mat::Zero(4 * m, n);
  for (int I = 0; I < m; ++I) {
    for (int J = 0; J < m; ++J) {
      H(4 * I + 0, gh.psi(J)) += Uinv(I, J);
      H.row(4 * I + 0) += Uinv(I, J) * Ap.row(J);
    }
    for (int i = 0; i < 3; ++i) H(4 * I + 1 + i, gh.xi(I, i)) = 1;
  }
  return H;
}

// quaternion multiplication table: u_a u_b = T0(a,b) + Tk[k](a,b) u_k
inline const std::array<Mat, 4>& qtable() {
  static const std::array<Mat, 4> T = [] {
    std::array<Mat, 4> t;
    for (auto& x : t) x = Mat::Zero(4, 4);
    using quatmath::Quaternion;
    using quatmath::qmul;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Quaternion ua, ub;
        ua[a] = 1;
        ub[b] = 1;
        Quaternion r = qmul(ua, ub);
        for (int c = 0; c < 4; ++c) t[c](a, b) = r[c];
      }
    return t;
  }();
  return T;
}

// sup-norm deviation between the compact quaternionic expressions
// (1/2) U_IJ conj(H^I) ^ H^J  /  (1/2) U_IJ conj(H^I) H^J
// and hk_forms / hk_metric at p
inline double quat_forms_check(const GHData& gh, const Vec& p) {
  int m = gh.m, n = gh.dim();
  Mat Up = gh.U(gh.base(p));
  Mat H = coframe(gh, p);
  const auto& T = qtable();

  std::array<Mat, 3> W;
  for (auto& w : W) w = Mat::Zero(n, n);
  Mat G = Mat::Zero(n, n);
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double sa = a == 0 ? 1.0 : -1.0;  // conjugation of H^I
          Vec ha = H.row(4 * I + a).transpose();
          Vec hb = H.row(4 * J + b).transpose();
          for (int k = 0; k < 3; ++k) {
            double c = 0.5 * Up(I, J) * sa * T[k + 1](a, b);
            if (c != 0) W[k] += c * (ha * hb.transpose() - hb * ha.transpose());
          }
          double c0 = 0.5 * Up(I, J) * sa * T[0](a, b);
          if (c0 != 0) G += c0 * 0.5 * (ha * hb.transpose() + hb * ha.transpose());
        }

  HKTriple t = hk_forms(gh);
  double worst = 0;
  for (int k = 0; k < 3; ++k) worst = std::max(worst, (W[k] - form_matrix(t[k], p)).cwiseAbs().maxCoeff());
  worst = std::max(worst, (G - hk_metric(gh).comp(p)).cwiseAbs().maxCoeff());
  return worst;
}

// Pointwise quaternionic algebra: I_1 = W3^{-1} W2, I_2 = W1^{-1} W3,
// I_3 = W2^{-1} W1; checks I_i^2 = -1, I_1 I_2 I_3 = -1, that g_i = -W_i I_i
// agree pairwise and are symmetric, and that they are proportional to the
// supplied metric (the triple fixes the metric only up to normalization).
inline double algebraic_check(const HKTriple& t, const MetricField& g, const Vec& p) {
  int n = g.dim;
  Mat W1 = form_matrix(t[0], p), W2 = form_matrix(t[1], p), W3 = form_matrix(t[2], p);
  Eigen::FullPivLU<Mat> l1(W1), l2(W2), l3(W3);
  if (!l1.isInvertible() || !l2.isInvertible() || !l3.isInvertible())
    throw std::domain_error("algebraic_check: degenerate 2-form");
  Mat I1 = l3.solve(W2), I2 = l1.solve(W3), I3 = l2.solve(W1);
  Mat id = Mat::Identity(n, n);
  double worst = 0;
  worst = std::max(worst, (I1 * I1 + id).cwiseAbs().maxCoeff());
  worst = std::max(worst, (I2 * I2 + id).cwiseAbs().maxCoeff());
  worst = std::max(worst, (I3 * I3 + id).cwiseAbs().maxCoeff());
  worst = std::max(worst, (I1 * I2 * I3 + id).cwiseAbs().maxCoeff());
  Mat g1 = -W1 * I1, g2 = -W2 * I2, g3 = -W3 * I3;
  double scale = std::max(1.0, g1.cwiseAbs().maxCoeff());
  worst = std::max(worst, (g1 - g2).cwiseAbs().maxCoeff() / scale);
  worst = std::max(worst, (g2 - g3).cwiseAbs().maxCoeff() / scale);
  worst = std::max(worst, (g1 - g1.transpose()).cwiseAbs().maxCoeff() / scale);
  Mat gp = g.comp(p);
  double c = (gp.inverse() * g1).trace() / n;
  worst = std::max(worst, (g1 - c * gp).cwiseAbs().maxCoeff() / scale);
  return worst;
}

inline double closure_check(const HKTriple& t, const Vec& p, const DerivScheme& s) {
  double worst = 0;
  for (int k = 0; k < 3; ++k) worst = std::max(worst, excalc::sup_coef(excalc::d(t[k], s), p));
  return worst;
}

// ----- built-in data ---------------------------------------------------------

// U = 1/(2|x - c|) with the matching Dirac-monopole connection; the string sits
// on the half-line x - c = (0, 0, t<0), so samples must avoid a cone around it
inline GHData dirac_monopole(const quatmath::ImQuaternion& center = {0, 0, 0},
                             DerivScheme scheme = {}) {
  GHData g;
  g.m = 1;
  g.scheme = scheme;
  Vec c(3);
  c << center.x, center.y, center.z;
  g.U = [c](const Vec& x) {
    Mat u(1, 1);
    u(0, 0) = 1.0 / (2 * (x - c).norm());
    return u;
  };
  g.A = [c](const Vec& p) {
    Vec x = p.head(3) - c;
    double r = x.norm();
    double rho2 = x[0] * x[0] + x[1] * x[1];
    Mat a = Mat::Zero(1, 4);
    // A = -(1/2)(1 - x3/r) dphi; dphi = (-x2 dx1 + x1 dx2)/rho^2
    double f = -0.5 * (1 - x[2] / r) / rho2;
    a(0, 0) = -f * x[1];
    a(0, 1) = f * x[0];
    return a;
  };
  return g;
}

// block-diagonal join of two data sets (e.g. a two-center configuration)
inline GHData direct_sum(const GHData& a, const GHData& b) {
  GHData g;
  g.m = a.m + b.m;
  g.scheme = a.scheme;
  int ma = a.m, mb = b.m;
  g.U = [a, b, ma, mb](const Vec& x) {
    Mat u = Mat::Zero(ma + mb, ma + mb);
    u.topLeftCorner(ma, ma) = a.U(x.head(3 * ma));
    u.bottomRightCorner(mb, mb) = b.U(x.segment(3 * ma, 3 * mb));
    return u;
  };
  g.A = [a, b, ma, mb](const Vec& p) {
    int m = ma + mb, n = 4 * m;
    Vec pa(4 * ma), pb(4 * mb);
    pa << p.head(3 * ma), p.segment(3 * m, ma);
    pb << p.segment(3 * ma, 3 * mb), p.segment(3 * m + ma, mb);
    Mat Aa = a.A(pa), Ab = b.A(pb);
    Mat A = Mat::Zero(m, n);
    A.block(0, 0, ma, 3 * ma) = Aa.leftCols(3 * ma);
    A.block(0, 3 * m, ma, ma) = Aa.rightCols(ma);
    A.block(ma, 3 * ma, mb, 3 * mb) = Ab.leftCols(3 * mb);
    A.block(ma, 3 * m + ma, mb, mb) = Ab.rightCols(mb);
    return A;
  };
  return g;
}

}  // namespace gh

#endif
