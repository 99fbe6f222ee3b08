#ifndef QK_HPP
#define QK_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "excalc.hpp"
#include "gh.hpp"
#include "imhp.hpp"
#include "quatmath.hpp"

// Quaternionic Kahler Ansatz: reduction of equivariant Gibbons-Hawking data to
// the inhomogeneous chart, assembly of the connection 1-forms, 2-forms and
// metric in their several equivalent formula sets, and the Einstein /
// moment-map / Swann-bundle verifiers.
//
// Chart convention for the 4n-dimensional total space:
//   p = (psi_0, ..., psi_n, rho-chart coordinates).
namespace qk {

using excalc::DerivScheme;
using excalc::KForm;
using excalc::Mat;
using excalc::MetricField;
using excalc::Vec;
using gh::eps;
using quatmath::ImQuaternion;
using quatmath::Quaternion;

struct ReducedData {
  int n = 1;
  // reduced Higgs field on the inhomogeneous chart: rho -> (n+1) x (n+1)
  std::function<Mat(const Vec&)> U;
  // reduced connection coefficients: rho -> (n+1) x (3n-1), row I over drho
  std::function<Mat(const Vec&)> A;
  double s = 1;
  DerivScheme scheme;

  int dim() const { return 4 * n; }
  int nchart() const { return 3 * n - 1; }
  int psi(int I) const { return I; }
  int rho_off() const { return n + 1; }
  Vec rho(const Vec& p) const { return p.segment(n + 1, 3 * n - 1); }
};

// the scalar potential dual to the Higgs field
inline double potential(const ReducedData& rd, const Vec& rho) {
  Mat U = rd.U(rho);
  std::vector<ImQuaternion> r = imhp::config(rd.n, rho);
  double acc = 0;
  for (int I = 0; I <= rd.n; ++I)
    for (int J = 0; J <= rd.n; ++J) acc += 2 * U(I, J) * quatmath::dot(r[I], r[J]);
  return acc;
}

// literal chart differential of the potential, by central differences over the
// rho coordinates (the potential does not depend on the fiber coordinates)
inline Vec potential_differential(const ReducedData& rd, const Vec& p) {
  Vec rho = rd.rho(p);
  Vec d = Vec::Zero(rd.dim());
  for (int c = 0; c < rd.nchart(); ++c)
    d[rd.rho_off() + c] =
        excalc::partial([&](const Vec& q) { return potential(rd, q); }, rho, c, rd.scheme.h);
  return d;
}

// everything the structure formulas need at one chart point
struct Frame {
  int n = 1, dim = 4, nc = 2;
  std::vector<Eigen::Vector3d> rho;  // position vectors, frozen components included
  Mat U, W, Winv;                    // W = calU * U
  double calU = 0;
  Mat dnu;                           // row 3I+i = differential of nu^I_i
  Mat E;                             // row I = dpsi_I + A_I
  std::array<Vec, 3> th;             // connection 1-form components
  Vec th0;                           // real component, U_IJ rho^J . drho^I / calU
};

inline Frame frame(const ReducedData& rd, const Vec& p) {
  Frame f;
  f.n = rd.n;
  f.dim = rd.dim();
  f.nc = rd.nchart();
  Vec rho = rd.rho(p);
  f.U = rd.U(rho);
  std::vector<ImQuaternion> r = imhp::config(rd.n, rho);
  f.rho.resize(rd.n + 1);
  for (int I = 0; I <= rd.n; ++I) f.rho[I] = r[I].vec();
  f.calU = potential(rd, rho);
  if (f.calU == 0) throw std::domain_error("frame: vanishing potential");
  f.W = f.calU * f.U;
  Eigen::FullPivLU<Mat> lu(f.W);
  if (!lu.isInvertible()) throw std::domain_error("frame: singular Higgs field");
  f.Winv = lu.inverse();

  f.th0 = Vec::Zero(f.dim);
  for (int I = 0; I <= rd.n; ++I)
    for (int i = 0; i < 3; ++i) {
      if (imhp::frozen(I, i)) continue;
      double a = 0;
      for (int J = 0; J <= rd.n; ++J) a += f.U(I, J) * f.rho[J][i];
      f.th0[rd.rho_off() + imhp::coord_index(I, i)] = a / f.calU;
    }

  // d nu^I = (drho^I - 2 th0 rho^I)/calU; writing the differential of the
  // potential through th0 keeps the assembly closed-form and makes all the
  // pointwise identities below exact even off-shell (on solutions the two
  // expressions for th0 coincide, so this is also the literal differential)
  f.dnu = Mat::Zero(3 * (rd.n + 1), f.dim);
  for (int I = 0; I <= rd.n; ++I)
    for (int i = 0; i < 3; ++i) {
      int row = 3 * I + i;
      if (!imhp::frozen(I, i))
        f.dnu(row, rd.rho_off() + imhp::coord_index(I, i)) += 1.0 / f.calU;
      f.dnu.row(row) -= (2 * f.rho[I][i] / f.calU) * f.th0.transpose();
    }

  Mat Ac = rd.A(rho);
  f.E = Mat::Zero(rd.n + 1, f.dim);
  for (int I = 0; I <= rd.n; ++I) {
    f.E(I, rd.psi(I)) = 1;
    f.E.block(I, rd.rho_off(), 1, f.nc) = Ac.row(I);
  }

  for (int k = 0; k < 3; ++k) {
    Vec t = Vec::Zero(f.dim);
    for (int I = 0; I <= rd.n; ++I) {
      Eigen::Vector3d nuI = f.rho[I] / f.calU;
      for (int J = 0; J <= rd.n; ++J) {
        Eigen::Vector3d nuJ = f.rho[J] / f.calU;
        for (int j = 0; j < 3; ++j)
          for (int i = 0; i < 3; ++i) {
            int e = eps(k, j, i);
            if (e) t -= f.W(I, J) * e * nuJ[j] * f.dnu.row(3 * I + i).transpose();
          }
      }
      t -= nuI[k] * f.E.row(I).transpose();
    }
    f.th[k] = t;
  }
  return f;
}

inline Mat wedge_mat(const Vec& a, const Vec& b) {
  return a * b.transpose() - b * a.transpose();
}
inline Mat sym_mat(const Vec& a, const Vec& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

struct QKStructure {
  int n = 1, dim = 4;
  double s = 1;
  KForm theta0;
  std::array<KForm, 3> theta;
  std::array<KForm, 3> som;  // s times the 2-form triplet
  MetricField sg;            // s times the metric
  std::function<Vec(const Vec&)> nu;  // stacked moment map components, 3(n+1)
};

// the 1-forms of the frame, extended by the theta-corrected fiber terms:
//   D(I,i) = d nu^I_i + 2 (theta x nu^I)_i
//   Et(I)  = dpsi_I + A_I + 2 W_IK nu^K . theta
inline Mat frame_D(const Frame& f) {
  int m = f.n + 1;
  Mat D = f.dnu;
  for (int I = 0; I < m; ++I) {
    Eigen::Vector3d nuI = f.rho[I] / f.calU;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          int e = eps(i, a, b);
          if (e) D.row(3 * I + i) += 2.0 * e * nuI[b] * f.th[a].transpose();
        }
  }
  return D;
}

inline Mat frame_Et(const Frame& f) {
  int m = f.n + 1;
  Mat Et = f.E;
  for (int I = 0; I < m; ++I)
    for (int K = 0; K < m; ++K) {
      Eigen::Vector3d nuK = f.rho[K] / f.calU;
      for (int k = 0; k < 3; ++k) Et.row(I) += 2.0 * f.W(I, K) * nuK[k] * f.th[k].transpose();
    }
  return Et;
}

inline QKStructure qk_structure(const ReducedData& rd) {
  QKStructure st;
  st.n = rd.n;
  st.dim = rd.dim();
  st.s = rd.s;
  st.theta0 = excalc::one_form(st.dim, [rd](const Vec& p) { return frame(rd, p).th0; });
  for (int k = 0; k < 3; ++k)
    st.theta[k] = excalc::one_form(st.dim, [rd, k](const Vec& p) { return frame(rd, p).th[k]; });
  for (int k = 0; k < 3; ++k)
    st.som[k] = excalc::two_form(st.dim, [rd, k](const Vec& p) {
      Frame f = frame(rd, p);
      int m = f.n + 1;
      Mat D = frame_D(f), Et = frame_Et(f);
      Mat W = Mat::Zero(f.dim, f.dim);
      for (int I = 0; I < m; ++I) {
        for (int J = 0; J < m; ++J)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int e = eps(k, a, b);
              if (e)
                W -= 0.5 * f.W(I, J) * e *
                     wedge_mat(D.row(3 * I + a).transpose(), D.row(3 * J + b).transpose());
            }
        W -= wedge_mat(D.row(3 * I + k).transpose(), Et.row(I).transpose());
      }
      return W;
    });
  st.sg.dim = st.dim;
  st.sg.comp = [rd](const Vec& p) {
    Frame f = frame(rd, p);
    int m = f.n + 1;
    Mat D = frame_D(f), Et = frame_Et(f);
    Mat G = Mat::Zero(f.dim, f.dim);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        for (int i = 0; i < 3; ++i)
          G += 0.5 * f.W(I, J) * sym_mat(D.row(3 * I + i).transpose(), D.row(3 * J + i).transpose());
        G += 0.5 * f.Winv(I, J) * sym_mat(Et.row(I).transpose(), Et.row(J).transpose());
      }
    return G;
  };
  st.nu = [rd](const Vec& p) {
    Frame f = frame(rd, p);
    Vec nu(3 * (f.n + 1));
    for (int I = 0; I <= f.n; ++I) nu.segment(3 * I, 3) = f.rho[I] / f.calU;
    return nu;
  };
  return st;
}

// ----- reduction of equivariant Gibbons-Hawking data -------------------------

namespace detail {
inline const std::array<Quaternion, 3>& test_quats() {
  static const std::array<Quaternion, 3> qs = {
      Quaternion{0.8, 0.3, -0.5, 0.2}, Quaternion{1.1, -0.7, 0.4, 0.9},
      Quaternion{0.2, 1.3, 0.5, -0.4}};
  return qs;
}

inline Vec stack(const std::vector<ImQuaternion>& x) {
  Vec xs(3 * x.size());
  for (size_t I = 0; I < x.size(); ++I) xs.segment(3 * I, 3) = x[I].vec();
  return xs;
}
}  // namespace detail

// U_IJ = (reduced Higgs)/|q|^2: evaluate at q = 1 and certify that the scaled
// field is the same along the collective orbit
inline std::function<Mat(const Vec&)> reduce_higgs(const gh::GHData& g, int n,
                                                   double tol = 1e-8) {
  return [g, n, tol](const Vec& rho) {
    auto ev = [&](const Quaternion& q) {
      Mat u = g.U(detail::stack(imhp::embed(n, rho, q)));
      return Mat(quatmath::norm2(q) * u);
    };
    Mat U0 = ev(Quaternion{1, 0, 0, 0});
    double scale = std::max(1.0, U0.cwiseAbs().maxCoeff());
    for (const Quaternion& q : detail::test_quats())
      if ((ev(q) - U0).cwiseAbs().maxCoeff() > tol * scale)
        throw std::runtime_error("reduce_higgs: Higgs field is not collective-equivariant");
    return U0;
  };
}

// the reduced connection: pull A_K back along the base directions of the chart
// at fixed q (where the right-invariant fiber forms vanish) and certify that
// the result does not depend on q; psi-direction entries of A, which can only
// be exact q-independent pieces, are not carried over
inline std::function<Mat(const Vec&)> reduce_connection(const gh::GHData& g, int n,
                                                        double tol = 1e-8) {
  return [g, n, tol](const Vec& rho) {
    int m = n + 1, nc = 3 * n - 1;
    auto ev = [&](const Quaternion& q) {
      std::vector<ImQuaternion> x = imhp::embed(n, rho, q);
      Vec p = Vec::Zero(4 * m);
      p.head(3 * m) = detail::stack(x);
      Mat Am = g.A(p);
      Mat S = quatmath::norm2(q) * quatmath::rot3(q).transpose();  // d x^I / d rho^I
      Mat Ac = Mat::Zero(m, nc);
      for (int K = 0; K < m; ++K)
        for (int J = 0; J < m; ++J)
          for (int j = 0; j < 3; ++j) {
            if (imhp::frozen(J, j)) continue;
            double a = 0;
            for (int i = 0; i < 3; ++i) a += Am(K, 3 * J + i) * S(i, j);
            Ac(K, imhp::coord_index(J, j)) = a;
          }
      return Ac;
    };
    Mat A0 = ev(Quaternion{1, 0, 0, 0});
    double scale = std::max(1.0, A0.cwiseAbs().maxCoeff());
    for (const Quaternion& q : detail::test_quats())
      if ((ev(q) - A0).cwiseAbs().maxCoeff() > tol * scale)
        throw std::runtime_error("reduce_connection: connection is not collective-equivariant");
    return A0;
  };
}

// ----- reduced field equations ------------------------------------------------

// weight -1 scalar section holding one Higgs component
inline imhp::Section higgs_section(const ReducedData& rd, int K, int J) {
  imhp::Section s;
  s.n = rd.n;
  s.w = -1;
  s.rank = 0;
  s.scheme = rd.scheme;
  s.comp = [rd, K, J](const Vec& rho, const excalc::Idx&) { return rd.U(rho)(K, J); };
  return s;
}

inline double red_bogo1_residual(const ReducedData& rd, const Vec& rho) {
  double worst = 0;
  int m = rd.n + 1;
  for (int K = 0; K < m; ++K)
    for (int I = 0; I < m; ++I)
      for (int J = I + 1; J < m; ++J) {
        imhp::Section sKJ = higgs_section(rd, K, J), sKI = higgs_section(rd, K, I);
        for (int i = 0; i < 3; ++i)
          worst = std::max(worst, std::abs(imhp::cov_deriv(sKJ, rho, I, i, {}) -
                                           imhp::cov_deriv(sKI, rho, J, i, {})));
      }
  return worst;
}

// curvature matrices dA_K over the chart coordinates
inline std::vector<Mat> curvature(const ReducedData& rd, const Vec& rho) {
  int m = rd.n + 1, nc = rd.nchart();
  std::vector<Mat> dcomp(nc);
  for (int c = 0; c < nc; ++c) {
    double step = rd.scheme.h * std::max(1.0, std::abs(rho[c]));
    Vec pp = rho, pm = rho;
    pp[c] += step;
    pm[c] -= step;
    dcomp[c] = (rd.A(pp) - rd.A(pm)) / (2 * step);
  }
  std::vector<Mat> F(m, Mat::Zero(nc, nc));
  for (int K = 0; K < m; ++K)
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b) F[K](a, b) = dcomp[a](K, b) - dcomp[b](K, a);
  return F;
}

inline double red_bogo2_residual(const ReducedData& rd, const Vec& rho) {
  int m = rd.n + 1, nc = rd.nchart();
  std::vector<Mat> F = curvature(rd, rho);
  // 1/2 nabla_I U_KJ . (drho^I ^ drho^J)
  std::vector<Mat> dU(m * m, Mat());  // dU[K*m+J](I, k) = nabla_{Ik} U_KJ
  for (int K = 0; K < m; ++K)
    for (int J = 0; J < m; ++J) {
      imhp::Section s = higgs_section(rd, K, J);
      Mat d(m, 3);
      for (int I = 0; I < m; ++I)
        for (int k = 0; k < 3; ++k) d(I, k) = imhp::cov_deriv(s, rho, I, k, {});
      dU[K * m + J] = d;
    }
  double worst = 0;
  for (int K = 0; K < m; ++K) {
    Mat R = Mat::Zero(nc, nc);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J)
        for (int k = 0; k < 3; ++k)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int e = eps(k, a, b);
              if (!e || imhp::frozen(I, a) || imhp::frozen(J, b)) continue;
              double c = 0.5 * e * dU[K * m + J](I, k);
              R(imhp::coord_index(I, a), imhp::coord_index(J, b)) += c;
              R(imhp::coord_index(J, b), imhp::coord_index(I, a)) -= c;
            }
    worst = std::max(worst, (F[K] - R).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ----- connection 1-forms ------------------------------------------------------

inline std::pair<KForm, std::array<KForm, 3>> theta(const ReducedData& rd) {
  std::array<KForm, 3> tv;
  for (int k = 0; k < 3; ++k)
    tv[k] = excalc::one_form(rd.dim(), [rd, k](const Vec& p) { return frame(rd, p).th[k]; });
  KForm t0 = excalc::one_form(rd.dim(), [rd](const Vec& p) { return frame(rd, p).th0; });
  return {t0, tv};
}

// ----- equivalence of the formula sets -----------------------------------------

// max pairwise deviation at p between the two quaternionic formula sets, the
// explicit vectorial one, and the moment-map-variable one used by qk_structure,
// for both the 2-form triplet and the metric
inline double ansatz_variants_check(const ReducedData& rd, const Vec& p) {
  Frame f = frame(rd, p);
  int m = f.n + 1, dim = f.dim;
  const auto& T = gh::qtable();
  Mat Uinv = f.calU * f.Winv;  // inverse of U alone

  // quaternion components of h^I as coefficient rows; slot a = 0..3
  Mat h = Mat::Zero(4 * m, dim);
  for (int I = 0; I < m; ++I) {
    for (int J = 0; J < m; ++J) h.row(4 * I) += Uinv(I, J) * f.E.row(J);
    for (int i = 0; i < 3; ++i)
      if (!imhp::frozen(I, i)) h(4 * I + 1 + i, rd.rho_off() + imhp::coord_index(I, i)) = 1;
  }
  auto qrho = [&](int I) { return Quaternion{0, f.rho[I][0], f.rho[I][1], f.rho[I][2]}; };

  // structure constants with the first factor conjugated
  auto cmul = [&](int p_, int q_, int d) {
    double s = p_ == 0 ? 1.0 : -1.0;
    return s * T[d](p_, q_);
  };

  // denominator 2 U_MN conj(rho^M) rho^N, nominally (calU, 0, 0, 0)
  Quaternion den{0, 0, 0, 0};
  for (int M = 0; M < m; ++M)
    for (int N = 0; N < m; ++N) {
      Quaternion t = quatmath::qmul(quatmath::qconj(qrho(M)), qrho(N));
      den = den + (2 * f.U(M, N)) * t;
    }

  // quaternionic theta = U_IJ conj(rho^I) h^J / den as coefficient rows
  Mat Ct = Mat::Zero(4, dim);  // U_KJ conj(rho^K) h^J
  for (int K = 0; K < m; ++K)
    for (int J = 0; J < m; ++J)
      for (int q_ = 0; q_ < 4; ++q_) {
        Quaternion uq;
        uq[q_] = 1;
        Quaternion cc = quatmath::qmul(quatmath::qconj(qrho(K)), uq);
        for (int d = 0; d < 4; ++d)
          if (cc[d] != 0) Ct.row(d) += f.U(K, J) * cc[d] * h.row(4 * J + q_);
      }
  Mat C = Mat::Zero(4, dim);  // U_IL conj(h^I) rho^L
  for (int I = 0; I < m; ++I)
    for (int L = 0; L < m; ++L)
      for (int p_ = 0; p_ < 4; ++p_) {
        Quaternion up;
        up[p_] = 1;
        Quaternion cc = quatmath::qmul(quatmath::qconj(up), qrho(L));
        for (int d = 0; d < 4; ++d)
          if (cc[d] != 0) C.row(d) += f.U(I, L) * cc[d] * h.row(4 * I + p_);
      }
  Quaternion deni = quatmath::qinv(den);
  Mat thq = Mat::Zero(4, dim);
  for (int p_ = 0; p_ < 4; ++p_)
    for (int q_ = 0; q_ < 4; ++q_)
      for (int d = 0; d < 4; ++d)
        if (T[d](p_, q_) != 0) thq.row(d) += T[d](p_, q_) * deni[p_] * Ct.row(q_);

  // ---- variant 1: the homogeneous quaternionic formula --------------------
  std::array<Mat, 4> B2, Bg;
  for (auto& x : B2) x = Mat::Zero(dim, dim);
  for (auto& x : Bg) x = Mat::Zero(dim, dim);
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int p_ = 0; p_ < 4; ++p_)
        for (int q_ = 0; q_ < 4; ++q_)
          for (int d = 0; d < 4; ++d) {
            double c = f.U(I, J) * cmul(p_, q_, d);
            if (c == 0) continue;
            Vec a = h.row(4 * I + p_).transpose(), b = h.row(4 * J + q_).transpose();
            B2[d] += c * wedge_mat(a, b);
            Bg[d] += c * sym_mat(a, b);
          }
  std::array<Mat, 4> num2, numg;
  for (int d = 0; d < 4; ++d) {
    num2[d] = Mat::Zero(dim, dim);
    numg[d] = Mat::Zero(dim, dim);
  }
  for (int p_ = 0; p_ < 4; ++p_)
    for (int q_ = 0; q_ < 4; ++q_)
      for (int d = 0; d < 4; ++d) {
        double t = T[d](p_, q_);
        if (t == 0) continue;
        // the first factor is U_KL conj(rho^K) rho^L = den/2
        num2[d] += 0.5 * t * den[p_] * B2[q_];
        numg[d] += 0.5 * t * den[p_] * Bg[q_];
        num2[d] -= t * wedge_mat(C.row(p_).transpose(), Ct.row(q_).transpose());
        numg[d] -= t * sym_mat(C.row(p_).transpose(), Ct.row(q_).transpose());
      }
  Quaternion den2i = quatmath::qinv(quatmath::qmul(den, den));
  std::array<Mat, 4> som1, sg1;
  for (int d = 0; d < 4; ++d) {
    som1[d] = Mat::Zero(dim, dim);
    sg1[d] = Mat::Zero(dim, dim);
  }
  for (int p_ = 0; p_ < 4; ++p_)
    for (int q_ = 0; q_ < 4; ++q_)
      for (int d = 0; d < 4; ++d) {
        double t = T[d](p_, q_);
        if (t == 0 || den2i[p_] == 0) continue;
        som1[d] += t * den2i[p_] * num2[q_];
        sg1[d] += t * den2i[p_] * numg[q_];
      }

  // ---- variant 2: the shifted quaternionic formula -------------------------
  // alpha^I = h^I - 2 rho^I theta
  Mat al = h;
  for (int I = 0; I < m; ++I)
    for (int q_ = 0; q_ < 4; ++q_)
      for (int d = 0; d < 4; ++d) {
        Quaternion uq;
        uq[q_] = 1;
        double c = quatmath::qmul(qrho(I), uq)[d];
        if (c != 0) al.row(4 * I + d) -= 2 * c * thq.row(q_);
      }
  std::array<Mat, 4> som2, sg2;
  for (int d = 0; d < 4; ++d) {
    som2[d] = Mat::Zero(dim, dim);
    sg2[d] = Mat::Zero(dim, dim);
  }
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int p_ = 0; p_ < 4; ++p_)
        for (int q_ = 0; q_ < 4; ++q_)
          for (int d = 0; d < 4; ++d) {
            double c = f.U(I, J) * cmul(p_, q_, d) / (2 * f.calU);
            if (c == 0) continue;
            Vec a = al.row(4 * I + p_).transpose(), b = al.row(4 * J + q_).transpose();
            som2[d] += c * wedge_mat(a, b);
            sg2[d] += c * sym_mat(a, b);
          }

  // ---- variant 3: the explicit vectorial formula ----------------------------
  // Dr(I,i) = drho^I_i - 2 theta0 rho^I_i + 2 (theta x rho^I)_i
  Mat Dr = Mat::Zero(3 * m, dim);
  for (int I = 0; I < m; ++I)
    for (int i = 0; i < 3; ++i) {
      if (!imhp::frozen(I, i)) Dr(3 * I + i, rd.rho_off() + imhp::coord_index(I, i)) = 1;
      Dr.row(3 * I + i) -= 2 * f.rho[I][i] * f.th0.transpose();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          int e = eps(i, a, b);
          if (e) Dr.row(3 * I + i) += 2.0 * e * f.rho[I][b] * f.th[a].transpose();
        }
    }
  Mat Et3 = f.E;
  for (int I = 0; I < m; ++I)
    for (int K = 0; K < m; ++K)
      for (int k = 0; k < 3; ++k)
        Et3.row(I) += 2.0 * f.U(I, K) * f.rho[K][k] * f.th[k].transpose();
  std::array<Mat, 3> som3;
  Mat sg3 = Mat::Zero(dim, dim);
  for (int k = 0; k < 3; ++k) {
    som3[k] = Mat::Zero(dim, dim);
    for (int I = 0; I < m; ++I) {
      for (int J = 0; J < m; ++J)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            int e = eps(k, a, b);
            if (e)
              som3[k] -= (0.5 / f.calU) * f.U(I, J) * e *
                         wedge_mat(Dr.row(3 * I + a).transpose(), Dr.row(3 * J + b).transpose());
          }
      som3[k] -=
          (1.0 / f.calU) * wedge_mat(Dr.row(3 * I + k).transpose(), Et3.row(I).transpose());
    }
  }
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J) {
      for (int i = 0; i < 3; ++i)
        sg3 += (0.5 / f.calU) * f.U(I, J) *
               sym_mat(Dr.row(3 * I + i).transpose(), Dr.row(3 * J + i).transpose());
      sg3 += (0.5 / f.calU) * Uinv(I, J) *
             sym_mat(Et3.row(I).transpose(), Et3.row(J).transpose());
    }

  // ---- the moment-map-variable form used by qk_structure --------------------
  Mat D = frame_D(f), Et = frame_Et(f);
  std::array<Mat, 3> som0;
  Mat sg0 = Mat::Zero(dim, dim);
  for (int k = 0; k < 3; ++k) {
    som0[k] = Mat::Zero(dim, dim);
    for (int I = 0; I < m; ++I) {
      for (int J = 0; J < m; ++J)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            int e = eps(k, a, b);
            if (e)
              som0[k] -= 0.5 * f.W(I, J) * e *
                         wedge_mat(D.row(3 * I + a).transpose(), D.row(3 * J + b).transpose());
          }
      som0[k] -= wedge_mat(D.row(3 * I + k).transpose(), Et.row(I).transpose());
    }
  }
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J) {
      for (int i = 0; i < 3; ++i)
        sg0 += 0.5 * f.W(I, J) *
               sym_mat(D.row(3 * I + i).transpose(), D.row(3 * J + i).transpose());
      sg0 += 0.5 * f.Winv(I, J) * sym_mat(Et.row(I).transpose(), Et.row(J).transpose());
    }

  double scale = std::max(1.0, sg0.cwiseAbs().maxCoeff());
  for (int k = 0; k < 3; ++k) scale = std::max(scale, som0[k].cwiseAbs().maxCoeff());
  double worst = 0;
  auto dev = [&](const Mat& a, const Mat& b) {
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / scale);
  };
  for (int k = 0; k < 3; ++k) {
    dev(som1[k + 1], som0[k]);
    dev(som2[k + 1], som0[k]);
    dev(som3[k], som0[k]);
  }
  dev(sg1[0], sg0);
  dev(sg2[0], sg0);
  dev(sg3, sg0);
  // the real 2-form component and imaginary metric components must vanish
  worst = std::max(worst, som1[0].cwiseAbs().maxCoeff() / scale);
  worst = std::max(worst, som2[0].cwiseAbs().maxCoeff() / scale);
  for (int k = 1; k < 4; ++k) {
    worst = std::max(worst, sg1[k].cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, sg2[k].cwiseAbs().maxCoeff() / scale);
  }
  // the quaternionic and vectorial connection forms must also agree
  worst = std::max(worst, (thq.row(0).transpose() - f.th0).cwiseAbs().maxCoeff() / scale);
  for (int k = 0; k < 3; ++k)
    worst = std::max(worst, (thq.row(k + 1).transpose() - f.th[k]).cwiseAbs().maxCoeff() / scale);
  return worst;
}

// ----- verifiers ---------------------------------------------------------------

// d theta_i + eps_ijk theta_j ^ theta_k - s omega_i at p; the coefficients of
// theta are closed-form, so the plain central-difference step is fine here
inline double einstein_residual(const QKStructure& st, const Vec& p,
                                const DerivScheme& outer = {}) {
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    KForm r = excalc::d(st.theta[i], outer);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        int e = eps(i, j, k);
        if (e) r = excalc::add(r, excalc::wedge(st.theta[j], st.theta[k]), 1.0, e);
      }
    worst = std::max(worst, excalc::form_dist(r, st.som[i], p));
  }
  return worst;
}

// d nu^I + 2 theta x nu^I - s iota_{dpsi_I} omega at p
inline double moment_map_residual(const QKStructure& st, const ReducedData& rd, int I,
                                  const Vec& p) {
  Frame f = frame(rd, p);
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    Vec r = f.dnu.row(3 * I + i).transpose();
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        int e = eps(i, j, k);
        if (e) r += 2.0 * e * (f.rho[I][k] / f.calU) * f.th[j];
      }
    r -= gh::form_matrix(st.som[i], p).row(rd.psi(I)).transpose();
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ----- the Swann bundle cross-check --------------------------------------------

// gauge-fixed Gibbons-Hawking data on the homogeneous chart built from reduced
// data: U = (reduced Higgs)/|q|^2 and A_K = A_K(reduced) + 2 (U_KJ rho^J).sigma^R,
// with the chart 1-forms (drho, sigma^R) obtained by inverting the linear
// decomposition dx^I = conj(q)(drho^I - 2 sigma^R_0 rho^I + 2 sigma^R x rho^I) q
// pointwise -- everything here is closed-form, so the data is safe to
// differentiate numerically
inline gh::GHData lift_data(const ReducedData& rd) {
  int n = rd.n, m = n + 1;
  gh::GHData g;
  g.m = m;
  g.scheme = rd.scheme;
  g.U = [rd, n](const Vec& xs) {
    std::vector<ImQuaternion> x(n + 1);
    for (int I = 0; I <= n; ++I) x[I] = ImQuaternion(Eigen::Vector3d(xs.segment(3 * I, 3)));
    imhp::Projection pr = imhp::project(x);
    return Mat(rd.U(pr.rho) / quatmath::norm2(pr.q));
  };
  g.A = [rd, n, m](const Vec& p) {
    int nc = 3 * n - 1;
    std::vector<ImQuaternion> x(m);
    for (int I = 0; I < m; ++I) x[I] = ImQuaternion(Eigen::Vector3d(p.segment(3 * I, 3)));
    imhp::Projection pr = imhp::project(x);
    std::vector<ImQuaternion> r = imhp::config(n, pr.rho);
    Mat S = quatmath::norm2(pr.q) * quatmath::rot3(pr.q).transpose();
    // columns: chart directions, then (sigma^R_0, sigma^R_1..3)
    Mat M = Mat::Zero(3 * m, 3 * m);
    for (int I = 0; I < m; ++I) {
      Eigen::Vector3d rI = r[I].vec();
      for (int j = 0; j < 3; ++j)
        if (!imhp::frozen(I, j)) M.block(3 * I, imhp::coord_index(I, j), 3, 1) = S.col(j);
      M.block(3 * I, nc, 3, 1) = -2.0 * S * rI;
      for (int k = 0; k < 3; ++k)
        M.block(3 * I, nc + 1 + k, 3, 1) = 2.0 * S * Eigen::Vector3d::Unit(k).cross(rI);
    }
    Mat Minv = M.inverse();  // rows: drho_c then sigma^R components, over dx
    Mat Ac = rd.A(pr.rho);
    Mat Um = rd.U(pr.rho);
    Mat A = Mat::Zero(m, 4 * m);
    for (int K = 0; K < m; ++K) {
      Vec row = Vec::Zero(3 * m);
      for (int c = 0; c < nc; ++c) row += Ac(K, c) * Minv.row(c).transpose();
      for (int k = 0; k < 3; ++k) {
        double u = 0;
        for (int J = 0; J < m; ++J) u += Um(K, J) * r[J].vec()[k];
        row += 2.0 * u * Minv.row(nc + 1 + k).transpose();
      }
      A.block(K, 0, 1, 3 * m) = row.transpose();
    }
    return A;
  };
  return g;
}

// deviation at a point of the (psi, rho, q) chart between the pulled-back
// hyperkahler forms/metric of gh data and the scaled Swann-type expressions
//   Omega = calU conj(q) [ s omega + conj(sigma^R - theta) ^ (sigma^R - theta) ] q
//   G     = calU |q|^2 ( s g + |sigma^R - theta|^2 )
inline double swann_consistency(const gh::GHData& g, const ReducedData& rd, const Vec& pbig) {
  int n = rd.n, m = n + 1, nc = 3 * n - 1;
  int N = 4 * n + 4;
  if (pbig.size() != N) throw std::invalid_argument("swann_consistency: bad chart point");
  Quaternion q{pbig[N - 4], pbig[N - 3], pbig[N - 2], pbig[N - 1]};
  Vec p4n = pbig.head(4 * n);

  // chart map into the homogeneous coordinates (x, psi)
  auto phi = [&](const Vec& P) {
    Quaternion qq{P[N - 4], P[N - 3], P[N - 2], P[N - 1]};
    std::vector<ImQuaternion> x = imhp::embed(n, P.segment(m, nc), qq);
    Vec out(4 * m);
    out.head(3 * m) = detail::stack(x);
    out.tail(m) = P.head(m);
    return out;
  };
  Vec xp = phi(pbig);
  Mat J(4 * m, N);
  for (int c = 0; c < N; ++c) {
    double step = rd.scheme.h * std::max(1.0, std::abs(pbig[c]));
    Vec pp = pbig, pm = pbig;
    pp[c] += step;
    pm[c] -= step;
    J.col(c) = (phi(pp) - phi(pm)) / (2 * step);
  }

  gh::HKTriple hk = gh::hk_forms(g);
  std::array<Mat, 3> Om_pull;
  for (int k = 0; k < 3; ++k)
    Om_pull[k] = J.transpose() * gh::form_matrix(hk[k], xp) * J;
  Mat G_pull = J.transpose() * gh::hk_metric(g).comp(xp) * J;

  // right-hand sides on the big chart
  Frame f = frame(rd, p4n);
  QKStructure st = qk_structure(rd);
  std::array<Mat, 3> som_ext;
  for (int k = 0; k < 3; ++k) {
    som_ext[k] = Mat::Zero(N, N);
    som_ext[k].topLeftCorner(4 * n, 4 * n) = gh::form_matrix(st.som[k], p4n);
  }
  Mat sg_ext = Mat::Zero(N, N);
  sg_ext.topLeftCorner(4 * n, 4 * n) = st.sg.comp(p4n);

  // alpha = sigma^R - theta, components over the big chart
  Mat alpha = Mat::Zero(4, N);
  Quaternion qi = quatmath::qinv(q);
  for (int b = 0; b < 4; ++b) {
    Quaternion ub;
    ub[b] = 1;
    Quaternion sig = -1.0 * quatmath::qmul(ub, qi);
    for (int a = 0; a < 4; ++a) alpha(a, 4 * n + b) = sig[a];
  }
  alpha.block(0, 0, 1, 4 * n) -= f.th0.transpose();
  for (int k = 0; k < 3; ++k) alpha.block(k + 1, 0, 1, 4 * n) -= f.th[k].transpose();

  const auto& T = gh::qtable();
  std::array<Mat, 4> inner;
  for (int d = 0; d < 4; ++d) inner[d] = Mat::Zero(N, N);
  for (int k = 0; k < 3; ++k) inner[k + 1] += som_ext[k];
  for (int p_ = 0; p_ < 4; ++p_)
    for (int q_ = 0; q_ < 4; ++q_)
      for (int d = 0; d < 4; ++d) {
        double c = (p_ == 0 ? 1.0 : -1.0) * T[d](p_, q_);
        if (c != 0)
          inner[d] += c * wedge_mat(alpha.row(p_).transpose(), alpha.row(q_).transpose());
      }
  quatmath::AdjointMatrix R = quatmath::adjoint(q);
  double q2 = quatmath::norm2(q);
  std::array<Mat, 4> Om_rhs;
  for (int b = 0; b < 4; ++b) {
    Om_rhs[b] = Mat::Zero(N, N);
    for (int d = 0; d < 4; ++d)
      if (R(d, b) != 0) Om_rhs[b] += f.calU * q2 * R(d, b) * inner[d];
  }
  Mat G_rhs = sg_ext;
  for (int a = 0; a < 4; ++a)
    G_rhs += sym_mat(alpha.row(a).transpose(), alpha.row(a).transpose());
  G_rhs *= f.calU * q2;

  double scale = std::max(1.0, G_rhs.cwiseAbs().maxCoeff());
  for (int k = 0; k < 3; ++k) scale = std::max(scale, Om_rhs[k + 1].cwiseAbs().maxCoeff());
  double worst = Om_rhs[0].cwiseAbs().maxCoeff() / scale;
  for (int k = 0; k < 3; ++k)
    worst = std::max(worst, (Om_pull[k] - Om_rhs[k + 1]).cwiseAbs().maxCoeff() / scale);
  worst = std::max(worst, (G_pull - G_rhs).cwiseAbs().maxCoeff() / scale);
  return worst;
}

// the hyperkahler and quaternionic Kahler moment maps are related by
// |calU| conj(q) nu^I q = sign(calU) x^I
inline double moment_lift_check(const ReducedData& rd, const Vec& pbig) {
  int n = rd.n, m = n + 1, nc = 3 * n - 1;
  int N = 4 * n + 4;
  Quaternion q{pbig[N - 4], pbig[N - 3], pbig[N - 2], pbig[N - 1]};
  Vec rho = pbig.segment(m, nc);
  double calU = potential(rd, rho);
  std::vector<ImQuaternion> r = imhp::config(n, rho);
  std::vector<ImQuaternion> x = imhp::embed(n, rho, q);
  double worst = 0;
  for (int I = 0; I < m; ++I) {
    ImQuaternion mu = quatmath::sandwich(q, (1.0 / calU) * r[I]);
    Eigen::Vector3d res = std::abs(calU) * mu.vec() - (calU > 0 ? 1.0 : -1.0) * x[I].vec();
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace qk

#endif
