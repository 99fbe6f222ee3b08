#ifndef CONE_HPP
#define CONE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "gh.hpp"

// Hyperkahler-cone structure on extended Gibbons-Hawking data.  The base
// R^{3m} carries the collective action generated by rigid rotations L_i and
// simultaneous scalings L_0 of point configurations; the cone condition is
// that the Higgs field is invariant under the former and homogeneous of
// degree -1 under the latter.  This module verifies those constraints, the
// equivalent single-potential description, the gauge-fixing conditions on the
// connection, and the lifted-generator criterion with its obstruction terms.
namespace cone {

using excalc::DerivScheme;
using excalc::Idx;
using excalc::KForm;
using excalc::Mat;
using excalc::Vec;
using excalc::VectorField;
using gh::eps;
using gh::GHData;
using gh::HKTriple;

struct Generators {
  VectorField L0;
  std::array<VectorField, 3> L;
};

// L_i = -eps_{iab} x^K_a d_{Kb}, L0 = x^K_a d_{Ka}, as fields on a chart of
// dimension dim >= 3m (extra slots, e.g. the fiber coordinates, untouched)
inline Generators collective_generators(int m, int dim = 0) {
  if (dim == 0) dim = 3 * m;
  Generators g;
  g.L0 = {dim, [m, dim](const Vec& p) {
            Vec v = Vec::Zero(dim);
            v.head(3 * m) = p.head(3 * m);
            return v;
          }};
  for (int i = 0; i < 3; ++i)
    g.L[i] = {dim, [m, dim, i](const Vec& p) {
                Vec v = Vec::Zero(dim);
                for (int K = 0; K < m; ++K)
                  for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                      int e = eps(i, a, b);
                      if (e) v[3 * K + b] -= e * p[3 * K + a];
                    }
                return v;
              }};
  return g;
}

// a single scalar function of the configuration, candidate hyperkahler potential
struct ConePotential {
  int m = 1;
  std::function<double(const Vec&)> U;  // on R^{3m}
  DerivScheme scheme;
};

struct ConeReport {
  std::map<std::string, double> residuals;
  std::map<std::string, bool> passed;
  int samples = 0;
  uint64_t seed = 0;
};

// Higgs field together with its collective derivatives at a base point
struct HiggsDerivs {
  Mat U;
  Mat L0U;
  std::array<Mat, 3> LU;
};

inline HiggsDerivs higgs_derivs(const GHData& gh, const Vec& x) {
  int m = gh.m;
  double h = gh.scheme.h;
  std::vector<Mat> dU(3 * m);
  for (int c = 0; c < 3 * m; ++c) {
    double step = h * std::max(1.0, std::abs(x[c]));
    Vec pp = x, pm = x;
    pp[c] += step;
    pm[c] -= step;
    dU[c] = (gh.U(pp) - gh.U(pm)) / (2 * step);
  }
  HiggsDerivs r;
  r.U = gh.U(x);
  r.L0U = Mat::Zero(m, m);
  for (int c = 0; c < 3 * m; ++c) r.L0U += x[c] * dU[c];
  for (int i = 0; i < 3; ++i) {
    r.LU[i] = Mat::Zero(m, m);
    for (int K = 0; K < m; ++K)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          int e = eps(i, a, b);
          if (e) r.LU[i] -= e * x[3 * K + a] * dU[3 * K + b];
        }
  }
  return r;
}

// rotation invariance L U_IJ = 0 and scaling homogeneity L0 U_IJ = -U_IJ
inline double hkc_higgs_residual(const GHData& gh, const Vec& x) {
  HiggsDerivs d = higgs_derivs(gh, x);
  double worst = (d.L0U + d.U).cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) worst = std::max(worst, d.LU[i].cwiseAbs().maxCoeff());
  return worst;
}

// U = 2 U_IJ x^I . x^J
inline double hk_potential(const GHData& gh, const Vec& x) {
  Mat Up = gh.U(x);
  double acc = 0;
  for (int I = 0; I < gh.m; ++I)
    for (int J = 0; J < gh.m; ++J)
      for (int i = 0; i < 3; ++i) acc += Up(I, J) * x[3 * I + i] * x[3 * J + i];
  return 2 * acc;
}

// second central difference; the step is coarser than for first differences
// because the roundoff floor of a second difference grows like 1/h^2
inline double partial2(const std::function<double(const Vec&)>& f, const Vec& p, int a, int b,
                       double h) {
  double hh = std::pow(h, 0.7);
  double ha = hh * std::max(1.0, std::abs(p[a]));
  if (a == b) {
    Vec pp = p, pm = p;
    pp[a] += ha;
    pm[a] -= ha;
    return (f(pp) - 2 * f(p) + f(pm)) / (ha * ha);
  }
  double hb = hh * std::max(1.0, std::abs(p[b]));
  Vec q = p;
  q[a] += ha;
  q[b] += hb;
  double acc = f(q);
  q[b] -= 2 * hb;
  acc -= f(q);
  q[a] -= 2 * ha;
  acc += f(q);
  q[b] += 2 * hb;
  acc -= f(q);
  return acc / (4 * ha * hb);
}

// U_IJ = (1/4) del_I . del_J U
inline Mat potential_to_higgs(const ConePotential& cp, const Vec& x) {
  int m = cp.m;
  Mat u = Mat::Zero(m, m);
  for (int I = 0; I < m; ++I)
    for (int J = I; J < m; ++J) {
      double v = 0;
      for (int i = 0; i < 3; ++i) v += partial2(cp.U, x, 3 * I + i, 3 * J + i, cp.scheme.h);
      u(I, J) = u(J, I) = 0.25 * v;
    }
  return u;
}

// max residual of: cross-gradient symmetry del_I x del_J U = 0, collective
// symmetry L U = 0 and L0 U = U, and the gradient identity del_I U = 2 U_IJ x^J
inline double potential_constraints(const ConePotential& cp, const Vec& x) {
  int m = cp.m;
  double h = cp.scheme.h;
  double worst = 0;
  for (int I = 0; I < m; ++I)
    for (int J = I + 1; J < m; ++J)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          double v = partial2(cp.U, x, 3 * I + a, 3 * J + b, h) -
                     partial2(cp.U, x, 3 * I + b, 3 * J + a, h);
          worst = std::max(worst, std::abs(v));
        }
  Vec g(3 * m);
  for (int c = 0; c < 3 * m; ++c) g[c] = excalc::partial(cp.U, x, c, h);
  double L0U = x.head(3 * m).dot(g);
  worst = std::max(worst, std::abs(L0U - cp.U(x)));
  for (int i = 0; i < 3; ++i) {
    double Li = 0;
    for (int K = 0; K < m; ++K)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          int e = eps(i, a, b);
          if (e) Li -= e * x[3 * K + a] * g[3 * K + b];
        }
    worst = std::max(worst, std::abs(Li));
  }
  Mat uh = potential_to_higgs(cp, x);
  for (int I = 0; I < m; ++I)
    for (int a = 0; a < 3; ++a) {
      double w = g[3 * I + a];
      for (int J = 0; J < m; ++J) w -= 2 * uh(I, J) * x[3 * J + a];
      worst = std::max(worst, std::abs(w));
    }
  return worst;
}

// max_{a,I} | iota_{L_a} A_I + U_IJ x^J_a |  (with x^J_0 = 0)
inline double gauge_fix_residual(const GHData& gh, const Vec& p) {
  int m = gh.m;
  Mat Ap = gh.A(p);
  Mat Up = gh.U(gh.base(p));
  Generators gen = collective_generators(m, gh.dim());
  double worst = 0;
  for (int a = 0; a < 4; ++a) {
    Vec v = (a == 0 ? gen.L0 : gen.L[a - 1]).comp(p);
    for (int I = 0; I < m; ++I) {
      double r = Ap.row(I).dot(v);
      if (a > 0)
        for (int J = 0; J < m; ++J) r += Up(I, J) * p[3 * J + (a - 1)];
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

// X_a = L_a - (iota_{L_a} A_I + U_IJ x^J_a) d_{psi_I}; index 0 is the scaling lift
inline std::array<VectorField, 4> lifted_generators(const GHData& gh) {
  int n = gh.dim();
  Generators gen = collective_generators(gh.m, n);
  std::array<VectorField, 4> X;
  for (int a = 0; a < 4; ++a) {
    VectorField La = a == 0 ? gen.L0 : gen.L[a - 1];
    X[a] = {n, [gh, La, a](const Vec& p) {
              Vec v = La.comp(p);
              Vec horizontal = v;
              Mat Ap = gh.A(p);
              Mat Up = gh.U(gh.base(p));
              for (int I = 0; I < gh.m; ++I) {
                double r = Ap.row(I).dot(horizontal);
                if (a > 0)
                  for (int J = 0; J < gh.m; ++J) r += Up(I, J) * p[3 * J + (a - 1)];
                v[gh.psi(I)] -= r;
              }
              return v;
            }};
  }
  return X;
}

// the obstruction 1-forms: c_{I0} = L_j U_IJ dx^J_j and
// (c_I)_k = -eps_{kab} L_a U_IJ dx^J_b - (L0 U_IJ + U_IJ) dx^J_k.
// star_c applies the blockwise star (star^I dx^J_j = (1/2) eps_{jab} dx^I_a ^ dx^J_b)
// and sums over the family index I; a = 0 selects c_{I0}, a = 1..3 a component of c_I.
inline KForm star_c(const GHData& gh, int a) {
  return excalc::two_form(gh.dim(), [gh, a](const Vec& p) {
    int m = gh.m, n = gh.dim();
    HiggsDerivs hd = higgs_derivs(gh, gh.base(p));
    Mat scl = hd.L0U + hd.U;
    Mat W = Mat::Zero(n, n);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J)
        for (int j = 0; j < 3; ++j) {
          double gamma;
          if (a == 0) {
            gamma = hd.LU[j](I, J);
          } else {
            int k = a - 1;
            gamma = k == j ? -scl(I, J) : 0.0;
            for (int t = 0; t < 3; ++t) {
              int e = eps(k, t, j);
              if (e) gamma -= e * hd.LU[t](I, J);
            }
          }
          if (gamma == 0) continue;
          for (int u = 0; u < 3; ++u)
            for (int w = 0; w < 3; ++w) {
              int e = eps(j, u, w);
              if (!e) continue;
              double c = 0.5 * e * gamma;
              W(gh.xi(I, u), gh.xi(J, w)) += c;
              W(gh.xi(J, w), gh.xi(I, u)) -= c;
            }
        }
    return W;
  });
}

// the contraction x^I . c_I as a 1-form on the total chart
inline KForm xc_form(const GHData& gh) {
  KForm r;
  r.dim = gh.dim();
  r.k = 1;
  r.coef = [gh](const Vec& p, const Idx& idx) {
    int c = idx[0];
    if (c >= 3 * gh.m) return 0.0;
    int J = c / 3, b = c % 3;
    HiggsDerivs hd = higgs_derivs(gh, gh.base(p));
    Mat scl = hd.L0U + hd.U;
    double acc = 0;
    for (int I = 0; I < gh.m; ++I)
      for (int k = 0; k < 3; ++k) {
        double gamma = k == b ? -scl(I, J) : 0.0;
        for (int t = 0; t < 3; ++t) {
          int e = eps(k, t, b);
          if (e) gamma -= e * hd.LU[t](I, J);
        }
        acc += p[3 * I + k] * gamma;
      }
    return acc;
  };
  return r;
}

// 1-form with coefficient sum_J U_IJ x^J_k on slot (I, k): this is
// (1/2) U_IJ d(x^I . x^J) expanded using the symmetry of the Higgs field
inline KForm half_U_dxx(const GHData& gh) {
  KForm r;
  r.dim = gh.dim();
  r.k = 1;
  r.coef = [gh](const Vec& p, const Idx& idx) {
    int c = idx[0];
    if (c >= 3 * gh.m) return 0.0;
    int I = c / 3, k = c % 3;
    Mat Up = gh.U(gh.base(p));
    double acc = 0;
    for (int J = 0; J < gh.m; ++J) acc += Up(I, J) * p[3 * J + k];
    return acc;
  };
  return r;
}

// residual of the cone criterion in its constrained form:
//   iota_{X_i} Om_j - eps_{ijk} iota_{X_0} Om_k + delta_ij d(U_IJ x^I.x^J)
//   L_{X_0} Om_k - Om_k
inline double cone_criterion_residual(const GHData& gh, const Vec& p) {
  int n = gh.dim();
  std::array<VectorField, 4> X = lifted_generators(gh);
  HKTriple Om = gh::hk_forms(gh);
  KForm W = excalc::scalar(n, [gh](const Vec& q) { return 0.5 * hk_potential(gh, gh.base(q)); });
  KForm dW = excalc::d(W, gh.scheme);
  std::array<KForm, 3> i0;
  for (int k = 0; k < 3; ++k) i0[k] = excalc::interior(X[0], Om[k]);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      KForm lhs = excalc::interior(X[i + 1], Om[j]);
      for (int c = 0; c < n; ++c) {
        double val = lhs.coef(p, {c});
        for (int k = 0; k < 3; ++k) {
          int e = eps(i, j, k);
          if (e) val -= e * i0[k].coef(p, {c});
        }
        if (i == j) val += dW.coef(p, {c});
        worst = std::max(worst, std::abs(val));
      }
    }
  for (int k = 0; k < 3; ++k) {
    KForm lie = excalc::lie_form(X[0], Om[k], gh.scheme);
    worst = std::max(worst, excalc::form_dist(lie, Om[k], p));
  }
  return worst;
}

// the same identities with the obstruction terms restored; these hold for any
// data satisfying the Bogomolny equations, with no symmetry assumed:
//   iota_{X_i} Om_j = eps_{ijk} iota_{X_0} Om_k - delta_ij [d(U_IJ x^I.x^J) + x^I.c_I]
//   L_{X_0} Om_k = Om_k + star^I c_{Ik}
inline double cone_identity_residual(const GHData& gh, const Vec& p) {
  int n = gh.dim();
  std::array<VectorField, 4> X = lifted_generators(gh);
  HKTriple Om = gh::hk_forms(gh);
  KForm W = excalc::scalar(n, [gh](const Vec& q) { return 0.5 * hk_potential(gh, gh.base(q)); });
  KForm dW = excalc::d(W, gh.scheme);
  KForm xc = xc_form(gh);
  std::array<KForm, 3> i0;
  for (int k = 0; k < 3; ++k) i0[k] = excalc::interior(X[0], Om[k]);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      KForm lhs = excalc::interior(X[i + 1], Om[j]);
      for (int c = 0; c < n; ++c) {
        double val = lhs.coef(p, {c});
        for (int k = 0; k < 3; ++k) {
          int e = eps(i, j, k);
          if (e) val -= e * i0[k].coef(p, {c});
        }
        if (i == j) val += dW.coef(p, {c}) + xc.coef(p, {c});
        worst = std::max(worst, std::abs(val));
      }
    }
  for (int k = 0; k < 3; ++k) {
    KForm lie = excalc::lie_form(X[0], Om[k], gh.scheme);
    KForm sc = star_c(gh, k + 1);
    excalc::for_each_tuple(n, 2, [&](const Idx& idx) {
      double val = lie.coef(p, idx) - Om[k].coef(p, idx) - sc.coef(p, idx);
      worst = std::max(worst, std::abs(val));
    });
  }
  return worst;
}

// consequences of the Bogomolny equations for the obstruction forms:
//   x^I . c_I = (1/2) U_IJ d(x^I.x^J) - d(U_IJ x^I.x^J)
//   star^I c_{I0} = d(x^I . c_I)
inline double c_identities_residual(const GHData& gh, const Vec& p) {
  int n = gh.dim();
  KForm xc = xc_form(gh);
  KForm T = half_U_dxx(gh);
  KForm W = excalc::scalar(n, [gh](const Vec& q) { return 0.5 * hk_potential(gh, gh.base(q)); });
  KForm dW = excalc::d(W, gh.scheme);
  double worst = 0;
  for (int c = 0; c < n; ++c) {
    double val = xc.coef(p, {c}) - T.coef(p, {c}) + dW.coef(p, {c});
    worst = std::max(worst, std::abs(val));
  }
  // the coefficients of xc are themselves finite differences, so the outer
  // derivative uses a coarser step to stay above their noise floor
  DerivScheme outer{DerivScheme::CentralDiff, std::pow(gh.scheme.h, 2.0 / 3)};
  worst = std::max(worst, excalc::form_dist(star_c(gh, 0), excalc::d(xc, outer), p));
  return worst;
}

// the raw lift identities, valid with NO field equations:
//   iota_{X_i} Om_j = eps_{ijk} iota_{X_0} Om_k - (1/2) delta_ij U_IJ d(x^I.x^J)
//   L_{X_0} Om_k = Om_k - (1/2)(L0 U_IJ + U_IJ)(dx^I ^ dx^J)_k + (iota_{L_0} F_I) ^ dx^I_k
inline double lift_identity_residual(const GHData& gh, const Vec& p) {
  int m = gh.m, n = gh.dim();
  std::array<VectorField, 4> X = lifted_generators(gh);
  HKTriple Om = gh::hk_forms(gh);
  KForm T = half_U_dxx(gh);
  std::array<KForm, 3> i0;
  for (int k = 0; k < 3; ++k) i0[k] = excalc::interior(X[0], Om[k]);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      KForm lhs = excalc::interior(X[i + 1], Om[j]);
      for (int c = 0; c < n; ++c) {
        double val = lhs.coef(p, {c});
        for (int k = 0; k < 3; ++k) {
          int e = eps(i, j, k);
          if (e) val -= e * i0[k].coef(p, {c});
        }
        if (i == j) val += T.coef(p, {c});
        worst = std::max(worst, std::abs(val));
      }
    }
  Generators gen = collective_generators(m, n);
  std::vector<KForm> iF(m);
  for (int I = 0; I < m; ++I) {
    KForm AI =
        excalc::one_form(n, [gh, I](const Vec& q) { return Vec(gh.A(q).row(I).transpose()); });
    iF[I] = excalc::interior(gen.L0, excalc::d(AI, gh.scheme));
  }
  for (int k = 0; k < 3; ++k) {
    KForm lie = excalc::lie_form(X[0], Om[k], gh.scheme);
    // B_k = (1/2)(L0 U + U)_IJ (dx^I ^ dx^J)_k
    KForm B = excalc::two_form(n, [gh, k](const Vec& q) {
      HiggsDerivs hd = higgs_derivs(gh, gh.base(q));
      Mat scl = hd.L0U + hd.U;
      Mat Wm = Mat::Zero(gh.dim(), gh.dim());
      for (int I = 0; I < gh.m; ++I)
        for (int J = 0; J < gh.m; ++J)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int e = eps(k, a, b);
              if (!e) continue;
              double c = 0.5 * scl(I, J) * e;
              Wm(gh.xi(I, a), gh.xi(J, b)) += c;
              Wm(gh.xi(J, b), gh.xi(I, a)) -= c;
            }
      return Wm;
    });
    KForm S = excalc::zero_form(n, 2);
    for (int I = 0; I < m; ++I)
      S = excalc::add(S, excalc::wedge(iF[I], excalc::coordinate_form(n, gh.xi(I, k))));
    excalc::for_each_tuple(n, 2, [&](const Idx& idx) {
      double val =
          lie.coef(p, idx) - Om[k].coef(p, idx) + B.coef(p, idx) - S.coef(p, idx);
      worst = std::max(worst, std::abs(val));
    });
  }
  return worst;
}

// brackets of the lifted generators: [X_i, X_j] = eps_{ijk} X_k, [X_i, X_0] = 0.
// Any defect is purely vertical, since the base parts close exactly.
inline double generator_algebra_check(const GHData& gh, const Vec& p) {
  std::array<VectorField, 4> X = lifted_generators(gh);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Vec br = excalc::bracket(X[i + 1], X[j + 1], gh.scheme).comp(p);
      for (int k = 0; k < 3; ++k) {
        int e = eps(i, j, k);
        if (e) br -= double(e) * X[k + 1].comp(p);
      }
      worst = std::max(worst, br.cwiseAbs().maxCoeff());
    }
  for (int i = 0; i < 3; ++i) {
    Vec br = excalc::bracket(X[i + 1], X[0], gh.scheme).comp(p);
    worst = std::max(worst, br.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ----- built-in data ---------------------------------------------------------

// two-index Higgs field of a three-center configuration with charge vectors
// (1,0), (0,1), (1,1); the matching potential is |x^0| + |x^1| + |x^0 + x^1|.
// No connection is supplied (only the Higgs-side operations use this data).
inline GHData three_center_higgs(DerivScheme scheme = {}) {
  GHData g;
  g.m = 2;
  g.scheme = scheme;
  g.U = [](const Vec& x) {
    double r0 = x.head(3).norm();
    double r1 = x.segment(3, 3).norm();
    double rs = (x.head(3) + x.segment(3, 3)).norm();
    Mat u(2, 2);
    u(0, 0) = 0.5 / r0 + 0.5 / rs;
    u(0, 1) = u(1, 0) = 0.5 / rs;
    u(1, 1) = 0.5 / r1 + 0.5 / rs;
    return u;
  };
  g.A = [](const Vec&) { return Mat::Zero(2, 8); };
  return g;
}

}  // namespace cone

#endif
