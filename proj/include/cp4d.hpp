#ifndef CP4D_HPP
#define CP4D_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "excalc.hpp"
#include "gh.hpp"
#include "qk.hpp"

// The n = 1 specialization over the upper half-plane: a single second-order
// constraint on a potential of two variables, its Laplacian-eigenfunction
// form, the explicit 2x2 Higgs field, and the compact 4D expressions for the
// 2-forms and metric (the Calderbank-Pedersen family).
//
// Chart: p = (psi_0, psi_1, rho_1, rho_2), matching the qk chart for n = 1.
namespace cp4d {

using excalc::DerivScheme;
using excalc::KForm;
using excalc::Mat;
using excalc::MetricField;
using excalc::Vec;

struct CPPotential {
  // value at (rho_1, rho_2), domain rho_2 > 0
  std::function<double(double, double)> u;
  // optional closed-form derivatives {u1, u2, u11, u12, u22}; when absent the
  // derivatives are taken by central differences
  std::function<std::array<double, 5>(double, double)> grad;
  DerivScheme scheme;
};

struct Derivs {
  double u = 0, u1 = 0, u2 = 0, u11 = 0, u12 = 0, u22 = 0;
};

inline Derivs derivs(const CPPotential& cp, double r1, double r2) {
  if (r2 <= 0) throw std::domain_error("cp4d: rho_2 must be positive");
  Derivs d;
  d.u = cp.u(r1, r2);
  if (cp.grad) {
    auto g = cp.grad(r1, r2);
    d.u1 = g[0];
    d.u2 = g[1];
    d.u11 = g[2];
    d.u12 = g[3];
    d.u22 = g[4];
    return d;
  }
  double h = cp.scheme.h;
  double h1 = h * std::max(1.0, std::abs(r1)), h2 = h * std::max(1.0, std::abs(r2));
  d.u1 = (cp.u(r1 + h1, r2) - cp.u(r1 - h1, r2)) / (2 * h1);
  d.u2 = (cp.u(r1, r2 + h2) - cp.u(r1, r2 - h2)) / (2 * h2);
  // second differences need a coarser step to stay above the roundoff floor
  double hh = std::pow(h, 0.7);
  double g1 = hh * std::max(1.0, std::abs(r1)), g2 = hh * std::max(1.0, std::abs(r2));
  d.u11 = (cp.u(r1 + g1, r2) - 2 * d.u + cp.u(r1 - g1, r2)) / (g1 * g1);
  d.u22 = (cp.u(r1, r2 + g2) - 2 * d.u + cp.u(r1, r2 - g2)) / (g2 * g2);
  d.u12 = (cp.u(r1 + g1, r2 + g2) - cp.u(r1 + g1, r2 - g2) - cp.u(r1 - g1, r2 + g2) +
           cp.u(r1 - g1, r2 - g2)) /
          (4 * g1 * g2);
  return d;
}

// rho_2 (U_{11} + U_{22}) = U_2
inline double constraint_residual(const CPPotential& cp, double r1, double r2) {
  Derivs d = derivs(cp, r1, r2);
  return std::abs(r2 * (d.u11 + d.u22) - d.u2);
}

// the hyperbolic Laplacian rho_2^2 (d_11 + d_22) applied to U/sqrt(rho_2)
// has eigenvalue 3/4 exactly when the constraint holds; the residual equals
// sqrt(rho_2) times the constraint residual
inline double eigenfunction_residual(const CPPotential& cp, double r1, double r2) {
  Derivs d = derivs(cp, r1, r2);
  double s = std::sqrt(r2);
  double f = d.u / s;
  double f11 = d.u11 / s;
  double f22 = d.u22 / s - d.u2 / (r2 * s) + 0.75 * d.u / (r2 * r2 * s);
  return std::abs(r2 * r2 * (f11 + f22) - 0.75 * f);
}

// solve U_IJ rho^I_i rho^J_j = (1/2) [[U - rho_2 U_2, rho_2 U_1],
//                                     [rho_2 U_1,     rho_2 U_2]]
// for the symmetric Higgs matrix on the canonical chart rho^0 = i,
// rho^1 = rho_1 i + rho_2 j
inline Mat higgs_4d(const CPPotential& cp, double r1, double r2) {
  Derivs d = derivs(cp, r1, r2);
  Mat U(2, 2);
  U(1, 1) = d.u2 / (2 * r2);
  U(0, 1) = U(1, 0) = 0.5 * d.u1 - r1 * d.u2 / (2 * r2);
  U(0, 0) = 0.5 * (d.u - r2 * d.u2) - 2 * U(0, 1) * r1 - U(1, 1) * r1 * r1;
  return U;
}

// the matching reduced data (the connection may consistently be set to zero
// in four dimensions, since the curvature 2-form has no room on the chart)
inline qk::ReducedData reduced_data(const CPPotential& cp) {
  qk::ReducedData rd;
  rd.n = 1;
  rd.scheme = cp.scheme;
  rd.U = [cp](const Vec& rho) { return higgs_4d(cp, rho[0], rho[1]); };
  rd.A = [](const Vec&) { return Mat::Zero(2, 2); };
  return rd;
}

// epsilon(v_1, v_2) = U U_2 - rho_2 (U_1^2 + U_2^2); its sign dictates the
// sign of the scalar curvature of a positive-definite metric
inline double frame_symplectic(const CPPotential& cp, double r1, double r2) {
  Derivs d = derivs(cp, r1, r2);
  return d.u * d.u2 - r2 * (d.u1 * d.u1 + d.u2 * d.u2);
}

inline int curvature_sign(const CPPotential& cp, double r1, double r2) {
  double e = frame_symplectic(cp, r1, r2);
  if (e == 0) throw std::domain_error("cp4d: degenerate frame, curvature sign undefined");
  return e > 0 ? 1 : -1;
}

struct CPStructure {
  std::array<KForm, 3> som;
  MetricField sg;
};

// quaternion components of the 1-form xi at a point, as coefficient rows over
// the chart (psi_0, psi_1, rho_1, rho_2)
inline Mat xi_rows(const CPPotential& cp, const Vec& p) {
  double r1 = p[2], r2 = p[3];
  Derivs d = derivs(cp, r1, r2);
  double ev = frame_symplectic(cp, r1, r2);
  if (ev == 0) throw std::domain_error("cp4d: degenerate frame");
  // fiber frame vectors v_i = nabla_{Ii} U d_{psi_I}
  Eigen::Vector2d v1(d.u - r1 * d.u1 - r2 * d.u2, d.u1);
  Eigen::Vector2d v2(r2 * d.u1 - r1 * d.u2, d.u2);
  Mat xi = Mat::Zero(4, 4);
  // iota_v (dpsi_0 ^ dpsi_1) = v^0 dpsi_1 - v^1 dpsi_0
  xi(0, 0) = -v1[1] / ev;
  xi(0, 1) = v1[0] / ev;
  xi(3, 0) = -v2[1] / ev;
  xi(3, 1) = v2[0] / ev;
  xi(1, 2) = 1.0 / (2 * r2);
  xi(2, 3) = 1.0 / (2 * r2);
  return xi;
}

// s omega = rho_2 eps(v_1,v_2)/U^2 conj(xi) ^ xi  and the matching metric
inline CPStructure cp_metric(const CPPotential& cp) {
  CPStructure st;
  for (int k = 0; k < 3; ++k)
    st.som[k] = excalc::two_form(4, [cp, k](const Vec& p) {
      double r1 = p[2], r2 = p[3];
      Derivs d = derivs(cp, r1, r2);
      if (d.u == 0) throw std::domain_error("cp4d: vanishing potential");
      double pref = r2 * frame_symplectic(cp, r1, r2) / (d.u * d.u);
      Mat xi = xi_rows(cp, p);
      const auto& T = gh::qtable();
      Mat W = Mat::Zero(4, 4);
      for (int p_ = 0; p_ < 4; ++p_)
        for (int q_ = 0; q_ < 4; ++q_) {
          double c = (p_ == 0 ? 1.0 : -1.0) * T[k + 1](p_, q_);
          if (c != 0)
            W += pref * c * qk::wedge_mat(xi.row(p_).transpose(), xi.row(q_).transpose());
        }
      return W;
    });
  st.sg.dim = 4;
  st.sg.comp = [cp](const Vec& p) {
    double r1 = p[2], r2 = p[3];
    Derivs d = derivs(cp, r1, r2);
    if (d.u == 0) throw std::domain_error("cp4d: vanishing potential");
    double pref = r2 * frame_symplectic(cp, r1, r2) / (d.u * d.u);
    Mat xi = xi_rows(cp, p);
    Mat G = Mat::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
      G += pref * qk::sym_mat(xi.row(a).transpose(), xi.row(a).transpose());
    return G;
  };
  return st;
}

// ----- built-in potentials ------------------------------------------------------

inline CPPotential rho1_potential(DerivScheme scheme = {}) {
  CPPotential cp;
  cp.scheme = scheme;
  cp.u = [](double r1, double) { return r1; };
  cp.grad = [](double, double) { return std::array<double, 5>{1, 0, 0, 0, 0}; };
  return cp;
}

inline CPPotential rho2sq_potential(DerivScheme scheme = {}) {
  CPPotential cp;
  cp.scheme = scheme;
  cp.u = [](double, double r2) { return r2 * r2; };
  cp.grad = [](double, double r2) { return std::array<double, 5>{0, 2 * r2, 0, 0, 2}; };
  return cp;
}

inline CPPotential one_potential(DerivScheme scheme = {}) {
  CPPotential cp;
  cp.scheme = scheme;
  cp.u = [](double, double) { return 1.0; };
  cp.grad = [](double, double) { return std::array<double, 5>{0, 0, 0, 0, 0}; };
  return cp;
}

// a rho_1 + b rho_2^2; the constraint is linear, so this is again a solution
inline CPPotential linear_combo_potential(double a, double b, DerivScheme scheme = {}) {
  CPPotential cp;
  cp.scheme = scheme;
  cp.u = [a, b](double r1, double r2) { return a * r1 + b * r2 * r2; };
  cp.grad = [a, b](double, double r2) {
    return std::array<double, 5>{a, 2 * b * r2, 0, 0, 2 * b};
  };
  return cp;
}

}  // namespace cp4d

#endif
