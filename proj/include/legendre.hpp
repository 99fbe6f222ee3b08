#ifndef LEGENDRE_HPP
#define LEGENDRE_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cone.hpp"
#include "excalc.hpp"
#include "gh.hpp"

// The Legendre transform construction: a single real potential L(z, zbar, x)
// on an open subset of C^m x R^m encodes an extended Gibbons-Hawking space via
//   U_IJ = -1/2 L_{x^I x^J},   A_I = Im(L_{x^I z^J} dz^J) + dphi_I,
//   u_I  = psi_I + phi_I + (i/2) L_{x^I},
// together with the (flipped-sign) Legendre transform kappa = <L - 2 Im u_I x^I>_x.
namespace legendre {

using excalc::DerivScheme;
using excalc::Mat;
using excalc::Vec;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

struct LPotential {
  int m = 1;
  // real value at (z, x)
  std::function<double(const CVec&, const Vec&)> L;
  // optional closed-form derivatives; any missing one is computed by central
  // differences over the real coordinates (x^I, Re z^I, Im z^I)
  std::function<Vec(const CVec&, const Vec&)> Lx;       // L_{x^I}
  std::function<Mat(const CVec&, const Vec&)> Lxx;      // L_{x^I x^J}
  std::function<CVec(const CVec&, const Vec&)> Lz;      // L_{z^I}
  std::function<CMat(const CVec&, const Vec&)> Lxz;     // L_{x^I z^J}
  std::function<CMat(const CVec&, const Vec&)> Lzzbar;  // L_{z^I zbar^J}
  DerivScheme scheme;
};

namespace detail {

// partial derivative of L along one real coordinate slot: slot 0 = x^I,
// 1 = Re z^I, 2 = Im z^I
inline double partial1(const LPotential& lp, CVec z, Vec x, int I, int slot) {
  double base = slot == 0 ? x[I] : (slot == 1 ? z[I].real() : z[I].imag());
  double h = lp.scheme.h * std::max(1.0, std::abs(base));
  auto ev = [&](double v) {
    CVec zz = z;
    Vec xx = x;
    if (slot == 0)
      xx[I] = v;
    else if (slot == 1)
      zz[I] = cplx(v, z[I].imag());
    else
      zz[I] = cplx(z[I].real(), v);
    return lp.L(zz, xx);
  };
  return (ev(base + h) - ev(base - h)) / (2 * h);
}

inline double partial2(const LPotential& lp, const CVec& z, const Vec& x, int I, int sI,
                       int J, int sJ) {
  // coarser step for second differences, as everywhere else in the codebase
  double hh = std::pow(lp.scheme.h, 0.7);
  auto shift = [&](CVec& zz, Vec& xx, int K, int sK, double d) {
    if (sK == 0)
      xx[K] += d;
    else if (sK == 1)
      zz[K] += d;
    else
      zz[K] += cplx(0, d);
  };
  double bI = sI == 0 ? x[I] : (sI == 1 ? z[I].real() : z[I].imag());
  double bJ = sJ == 0 ? x[J] : (sJ == 1 ? z[J].real() : z[J].imag());
  double hI = hh * std::max(1.0, std::abs(bI)), hJ = hh * std::max(1.0, std::abs(bJ));
  if (I == J && sI == sJ) {
    CVec zp = z, zm = z;
    Vec xp = x, xm = x;
    shift(zp, xp, I, sI, hI);
    shift(zm, xm, I, sI, -hI);
    return (lp.L(zp, xp) - 2 * lp.L(z, x) + lp.L(zm, xm)) / (hI * hI);
  }
  double acc = 0;
  for (int a : {1, -1})
    for (int b : {1, -1}) {
      CVec zz = z;
      Vec xx = x;
      shift(zz, xx, I, sI, a * hI);
      shift(zz, xx, J, sJ, b * hJ);
      acc += a * b * lp.L(zz, xx);
    }
  return acc / (4 * hI * hJ);
}

}  // namespace detail

inline Vec eval_Lx(const LPotential& lp, const CVec& z, const Vec& x) {
  if (lp.Lx) return lp.Lx(z, x);
  Vec g(lp.m);
  for (int I = 0; I < lp.m; ++I) g[I] = detail::partial1(lp, z, x, I, 0);
  return g;
}

inline Mat eval_Lxx(const LPotential& lp, const CVec& z, const Vec& x) {
  if (lp.Lxx) return lp.Lxx(z, x);
  Mat h(lp.m, lp.m);
  for (int I = 0; I < lp.m; ++I)
    for (int J = I; J < lp.m; ++J)
      h(I, J) = h(J, I) = detail::partial2(lp, z, x, I, 0, J, 0);
  return h;
}

inline CVec eval_Lz(const LPotential& lp, const CVec& z, const Vec& x) {
  if (lp.Lz) return lp.Lz(z, x);
  CVec g(lp.m);
  for (int I = 0; I < lp.m; ++I)
    g[I] = 0.5 * cplx(detail::partial1(lp, z, x, I, 1), -detail::partial1(lp, z, x, I, 2));
  return g;
}

inline CMat eval_Lxz(const LPotential& lp, const CVec& z, const Vec& x) {
  if (lp.Lxz) return lp.Lxz(z, x);
  CMat h(lp.m, lp.m);
  for (int I = 0; I < lp.m; ++I)
    for (int J = 0; J < lp.m; ++J)
      h(I, J) = 0.5 * cplx(detail::partial2(lp, z, x, I, 0, J, 1),
                           -detail::partial2(lp, z, x, I, 0, J, 2));
  return h;
}

inline CMat eval_Lzzbar(const LPotential& lp, const CVec& z, const Vec& x) {
  if (lp.Lzzbar) return lp.Lzzbar(z, x);
  CMat h(lp.m, lp.m);
  for (int I = 0; I < lp.m; ++I)
    for (int J = 0; J < lp.m; ++J) {
      // d_z d_zbar = 1/4 (d_a d_a + d_b d_b) + i/4 (d_a d_b - d_b d_a) acting
      // as 1/4 [(aa + bb) + i(ab_J a_I cross terms)]
      double aa = detail::partial2(lp, z, x, I, 1, J, 1);
      double bb = detail::partial2(lp, z, x, I, 2, J, 2);
      double ab = detail::partial2(lp, z, x, I, 1, J, 2);
      double ba = detail::partial2(lp, z, x, I, 2, J, 1);
      h(I, J) = 0.25 * cplx(aa + bb, ab - ba);
    }
  return h;
}

// ----- differential constraints ---------------------------------------------

// L_{x^I x^J} = -L_{z^I zbar^J} and L_{x^I z^J} = L_{x^J z^I}
inline double constraints_residual(const LPotential& lp, const CVec& z, const Vec& x) {
  Mat lxx = eval_Lxx(lp, z, x);
  CMat lzz = eval_Lzzbar(lp, z, x), lxz = eval_Lxz(lp, z, x);
  double worst = 0;
  for (int I = 0; I < lp.m; ++I)
    for (int J = 0; J < lp.m; ++J) {
      worst = std::max(worst, std::abs(cplx(lxx(I, J), 0) + lzz(I, J)));
      worst = std::max(worst, std::abs(lxz(I, J) - lxz(J, I)));
    }
  return worst;
}

// sufficient cone conditions L_1(L) = 0 and L_0(L) = L, packaged through
// L_1 + i L_0 = i (2 zbar^I d_{zbar^I} + x^I d_{x^I})
inline double hkc_residual(const LPotential& lp, const CVec& z, const Vec& x) {
  CVec lz = eval_Lz(lp, z, x);
  Vec lx = eval_Lx(lp, z, x);
  cplx W = 0;
  for (int I = 0; I < lp.m; ++I) W += 2.0 * std::conj(z[I] * lz[I]) + x[I] * lx[I];
  double L = lp.L(z, x);
  return std::max(std::abs(W.imag()), std::abs(W.real() - L));
}

// ----- extraction of the Gibbons-Hawking data ---------------------------------

inline Mat higgs_from_L(const LPotential& lp, const CVec& z, const Vec& x) {
  return Mat(-0.5 * eval_Lxx(lp, z, x));
}

inline void split_base(int m, const Vec& xs, CVec& z, Vec& x) {
  z.resize(m);
  x.resize(m);
  for (int I = 0; I < m; ++I) {
    x[I] = xs[3 * I];
    z[I] = 0.5 * cplx(xs[3 * I + 1], xs[3 * I + 2]);
  }
}

// GHData on the homogeneous chart; the optional shifts phi_I(z, x) enter the
// connection as exact pieces dphi_I
inline gh::GHData gh_data(const LPotential& lp,
                          std::function<Vec(const CVec&, const Vec&)> phi = nullptr) {
  gh::GHData g;
  g.m = lp.m;
  g.scheme = lp.scheme;
  g.U = [lp](const Vec& xs) {
    CVec z;
    Vec x;
    split_base(lp.m, xs, z, x);
    return higgs_from_L(lp, z, x);
  };
  g.A = [lp, phi](const Vec& p) {
    int m = lp.m;
    CVec z;
    Vec x;
    split_base(m, p.head(3 * m), z, x);
    CMat lxz = eval_Lxz(lp, z, x);
    Mat A = Mat::Zero(m, 4 * m);
    // Im(L_{x^I z^J} dz^J) with dz^J = 1/2 (dx^J_2 + i dx^J_3)
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        A(I, 3 * J + 1) += 0.5 * lxz(I, J).imag();
        A(I, 3 * J + 2) += 0.5 * lxz(I, J).real();
      }
    if (phi) {
      for (int J = 0; J < m; ++J)
        for (int s = 0; s < 3; ++s) {
          double base = p[3 * J + s];
          double h = lp.scheme.h * std::max(1.0, std::abs(base));
          Vec pp = p.head(3 * m), pm = pp;
          pp[3 * J + s] += h;
          pm[3 * J + s] -= h;
          CVec zp, zm;
          Vec xp, xm;
          split_base(m, pp, zp, xp);
          split_base(m, pm, zm, xm);
          Vec dphi = (phi(zp, xp) - phi(zm, xm)) / (2 * h);
          for (int I = 0; I < m; ++I) A(I, 3 * J + s) += dphi[I];
        }
    }
    return A;
  };
  return g;
}

// u_I = psi_I + phi_I + (i/2) L_{x^I}
inline CVec u_coords(const LPotential& lp, const Vec& psi, const Vec& phi, const CVec& z,
                     const Vec& x) {
  Vec lx = eval_Lx(lp, z, x);
  CVec u(lp.m);
  for (int I = 0; I < lp.m; ++I) u[I] = cplx(psi[I] + phi[I], 0.5 * lx[I]);
  return u;
}

// ----- the Legendre transform ---------------------------------------------------

struct LegendreResult {
  double kappa = 0;
  Vec x;   // solved stationary point
  CVec u;  // echo of the transform variables
  int iterations = 0;
};

// Newton solver with a per-instance warm start: successive solves along a path
// reuse the previous solution as the initial guess
struct Transformer {
  LPotential lp;
  bool warm = false;
  Vec last;

  explicit Transformer(LPotential l) : lp(std::move(l)) {}

  LegendreResult solve(const CVec& z, const CVec& u) {
    Vec x = warm ? last : Vec(2.0 * u.imag());
    LegendreResult res;
    for (int it = 0; it < 100; ++it) {
      Vec F = eval_Lx(lp, z, x) - 2.0 * u.imag();
      // a vanishing gradient residual is as much a solution as a vanishing
      // step; ill-conditioned Hessians can satisfy one but not the other
      bool done =
          F.cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, u.imag().cwiseAbs().maxCoeff());
      if (!done) {
        Eigen::FullPivLU<Mat> lu(eval_Lxx(lp, z, x));
        if (!lu.isInvertible())
          throw std::runtime_error("legendre::transform: singular Hessian");
        Vec dx = -lu.solve(F);
        x += dx;
        res.iterations = it + 1;
        done = dx.cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
      }
      if (done) {
        res.x = x;
        res.u = u;
        res.kappa = lp.L(z, x) - 2.0 * u.imag().dot(x);
        warm = true;
        last = x;
        return res;
      }
    }
    std::ostringstream msg;
    msg << "legendre::transform: no convergence after 100 iterations, last residual "
        << (eval_Lx(lp, z, x) - 2.0 * u.imag()).cwiseAbs().maxCoeff();
    throw std::runtime_error(msg.str());
  }
};

inline LegendreResult transform(const LPotential& lp, const CVec& z, const CVec& u) {
  Transformer t(lp);
  return t.solve(z, u);
}

// ----- gauge-fixing kernel conditions --------------------------------------------

// max over the listed functions of |(X_1 + i X_0)(u)| and |(X_2 + i X_3)(u)|,
// where X_a are the lifted collective generators of the data; by the kernel
// lemma these all vanish exactly when the connection is gauge-fixed with the
// right shifts folded into u
inline double gauge_kernel_residual(const gh::GHData& g,
                                    const std::vector<std::function<cplx(const Vec&)>>& us,
                                    const Vec& p) {
  auto lifts = cone::lifted_generators(g);
  double worst = 0;
  auto deriv = [&](const std::function<cplx(const Vec&)>& f, const excalc::VectorField& X) {
    Vec xv = X.comp(p);
    cplx acc = 0;
    for (int c = 0; c < g.dim(); ++c) {
      if (xv[c] == 0) continue;
      double h = g.scheme.h * std::max(1.0, std::abs(p[c]));
      Vec pp = p, pm = p;
      pp[c] += h;
      pm[c] -= h;
      acc += xv[c] * (f(pp) - f(pm)) / (2 * h);
    }
    return acc;
  };
  for (const auto& f : us) {
    worst = std::max(worst, std::abs(deriv(f, lifts[1]) + cplx(0, 1) * deriv(f, lifts[0])));
    worst = std::max(worst, std::abs(deriv(f, lifts[2]) + cplx(0, 1) * deriv(f, lifts[3])));
  }
  return worst;
}

// ----- built-in potentials --------------------------------------------------------

// a_IJ (x^I x^J - z^I zbar^J - z^J zbar^I) for a real symmetric a: satisfies
// the differential constraints with constant Higgs field -a (degree two, so
// not of cone type)
inline LPotential quadratic_L(const Mat& a, DerivScheme scheme = {}) {
  LPotential lp;
  lp.m = int(a.rows());
  lp.scheme = scheme;
  lp.L = [a](const CVec& z, const Vec& x) {
    double acc = x.dot(a * x);
    cplx zz = z.adjoint() * (a * z);
    return acc - 2 * zz.real();
  };
  lp.Lx = [a](const CVec&, const Vec& x) { return Vec(2 * a * x); };
  lp.Lxx = [a](const CVec&, const Vec&) { return Mat(2 * a); };
  lp.Lz = [a](const CVec& z, const Vec&) { return CVec(-2.0 * a * z.conjugate()); };
  lp.Lxz = [a](const CVec&, const Vec&) { return CMat(CMat::Zero(a.rows(), a.rows())); };
  lp.Lzzbar = [a](const CVec&, const Vec&) { return CMat(-2.0 * a.cast<cplx>()); };
  return lp;
}

// the m = 1 unit-charge monopole potential L = r - x log((x + r)/(2|z|)) with
// r = sqrt(x^2 + 4 z zbar): Higgs field 1/(2r), cone conditions exact, and
// kappa = r is the hyperkahler potential
inline LPotential monopole_L(DerivScheme scheme = {}) {
  LPotential lp;
  lp.m = 1;
  lp.scheme = scheme;
  auto rad = [](const CVec& z, const Vec& x) {
    return std::sqrt(x[0] * x[0] + 4 * std::norm(z[0]));
  };
  lp.L = [rad](const CVec& z, const Vec& x) {
    double r = rad(z, x);
    return r - x[0] * std::log((x[0] + r) / (2 * std::abs(z[0])));
  };
  lp.Lx = [rad](const CVec& z, const Vec& x) {
    double r = rad(z, x);
    Vec g(1);
    g[0] = -std::log((x[0] + r) / (2 * std::abs(z[0])));
    return g;
  };
  lp.Lxx = [rad](const CVec& z, const Vec& x) {
    Mat h(1, 1);
    h(0, 0) = -1.0 / rad(z, x);
    return h;
  };
  lp.Lz = [rad](const CVec& z, const Vec& x) {
    double r = rad(z, x);
    CVec g(1);
    g[0] = 2.0 * std::conj(z[0]) / (x[0] + r) + x[0] / (2.0 * z[0]);
    return g;
  };
  lp.Lxz = [rad](const CVec& z, const Vec& x) {
    double r = rad(z, x);
    CMat h(1, 1);
    h(0, 0) = -2.0 * std::conj(z[0]) / (r * (x[0] + r)) + 1.0 / (2.0 * z[0]);
    return h;
  };
  lp.Lzzbar = [rad](const CVec& z, const Vec& x) {
    CMat h(1, 1);
    h(0, 0) = 1.0 / rad(z, x);
    return h;
  };
  return lp;
}

}  // namespace legendre

#endif
