#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "cp4d.hpp"
#include "doctest.h"
#include "imhp.hpp"
#include "qk.hpp"
#include "rng.hpp"

using cp4d::CPPotential;
using excalc::Mat;
using excalc::Vec;

namespace {

CPPotential rho2_potential() {  // NOT a solution of the constraint
  CPPotential cp;
  cp.u = [](double, double r2) { return r2; };
  cp.grad = [](double, double) { return std::array<double, 5>{0, 1, 0, 0, 0}; };
  return cp;
}

CPPotential mixed_modes() {  // 1 + rho_2^2: solution with a curvature sign change
  CPPotential cp;
  cp.u = [](double, double r2) { return 1 + r2 * r2; };
  cp.grad = [](double, double r2) { return std::array<double, 5>{0, 2 * r2, 0, 0, 2}; };
  return cp;
}

Vec sample(uint64_t seed) {
  rng::Stream rs(seed);
  Vec p(4);
  p[0] = rs.sym(1);
  p[1] = rs.sym(1);
  p[2] = rs.sym(2);             // rho_1 in [-2, 2]
  p[3] = 0.2 + 2.8 * rs.uniform();  // rho_2 in [0.2, 3]
  return p;
}

}  // namespace

TEST_CASE("half-plane constraint") {
  CHECK(cp4d::constraint_residual(cp4d::rho2sq_potential(), 0.7, 1.3) == 0.0);
  CHECK(cp4d::constraint_residual(cp4d::rho1_potential(), -0.4, 0.6) == 0.0);
  CHECK(cp4d::constraint_residual(rho2_potential(), 0.3, 2.1) == doctest::Approx(1.0));

  // numeric-derivative fallback
  CPPotential numeric;
  numeric.u = [](double, double r2) { return r2 * r2; };
  CHECK(cp4d::constraint_residual(numeric, 0.7, 1.3) < 1e-7);

  CHECK_THROWS_AS(cp4d::constraint_residual(cp4d::rho1_potential(), 0.0, -1.0),
                  std::domain_error);
}

TEST_CASE("eigenfunction form of the constraint") {
  // rho_2^2 / sqrt(rho_2) = rho_2^{3/2} and 1/sqrt(rho_2) are the two
  // eigenfunction branches
  CHECK(cp4d::eigenfunction_residual(cp4d::rho2sq_potential(), 0.2, 0.9) < 1e-12);
  CHECK(cp4d::eigenfunction_residual(cp4d::one_potential(), -1.1, 1.7) < 1e-12);
  CHECK(cp4d::eigenfunction_residual(rho2_potential(), 0.3, 2.1) > 0.1);

  // the two residuals are related by a factor sqrt(rho_2), for any potential
  CPPotential cub;
  cub.u = [](double, double r2) { return r2 * r2 * r2; };
  cub.grad = [](double, double r2) {
    return std::array<double, 5>{0, 3 * r2 * r2, 0, 0, 6 * r2};
  };
  for (double r2 : {0.4, 1.0, 2.5}) {
    double c = cp4d::constraint_residual(cub, 0.1, r2);
    double e = cp4d::eigenfunction_residual(cub, 0.1, r2);
    CHECK(e == doctest::Approx(std::sqrt(r2) * c).epsilon(1e-10));
  }
}

TEST_CASE("explicit 4D Higgs field") {
  double r1 = 0.8, r2 = 1.4;
  Mat U = cp4d::higgs_4d(cp4d::rho2sq_potential(), r1, r2);
  CHECK(U(1, 1) == doctest::Approx(1.0));
  CHECK(U(0, 1) == doctest::Approx(-r1));
  CHECK(U(0, 0) == doctest::Approx(r1 * r1 - r2 * r2 / 2));

  Mat V = cp4d::higgs_4d(cp4d::rho1_potential(), r1, r2);
  CHECK(V(1, 1) == doctest::Approx(0.0));
  CHECK(V(0, 1) == doctest::Approx(0.5));
  CHECK(V(0, 0) == doctest::Approx(-r1 / 2));

  // linear in the potential
  Mat L = cp4d::higgs_4d(cp4d::linear_combo_potential(2, 3), r1, r2);
  CHECK((L - Mat(2 * V + 3 * U)).cwiseAbs().maxCoeff() < 1e-12);

  // 2 U_IJ rho^I . rho^J = U is built into the linear system
  qk::ReducedData rd = cp4d::reduced_data(cp4d::rho2sq_potential());
  Vec rho(2);
  rho << r1, r2;
  CHECK(qk::potential(rd, rho) == doctest::Approx(r2 * r2).epsilon(1e-12));

  CHECK_THROWS_AS(cp4d::higgs_4d(cp4d::rho1_potential(), 0.0, 0.0), std::domain_error);
}

TEST_CASE("Higgs field agrees with the covariant-derivative oracle") {
  // U_IJ = (1/4) nabla_I . nabla_J U, using the covariant calculus directly
  for (auto* mk : {&cp4d::rho2sq_potential, &cp4d::rho1_potential}) {
    CPPotential cp = mk({});
    Vec rho(2);
    rho << 0.45, 1.15;
    imhp::Section s;
    s.n = 1;
    s.w = 1;
    s.rank = 0;
    s.comp = [cp](const Vec& r, const excalc::Idx&) { return cp.u(r[0], r[1]); };
    double outer_h = std::pow(s.scheme.h, 2.0 / 3);
    Mat oracle(2, 2);
    for (int I = 0; I < 2; ++I) {
      imhp::Section dI = imhp::derived_section(s, I, outer_h);
      for (int J = 0; J < 2; ++J) {
        double acc = 0;
        for (int i = 0; i < 3; ++i) acc += imhp::cov_deriv(dI, rho, J, i, {i});
        oracle(I, J) = 0.25 * acc;
      }
    }
    Mat U = cp4d::higgs_4d(cp, rho[0], rho[1]);
    CHECK((U - oracle).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("compact 4D metric matches the generic pipeline") {
  for (auto cp : {cp4d::rho2sq_potential(), cp4d::rho1_potential(),
                  cp4d::linear_combo_potential(2, 3)}) {
    cp4d::CPStructure st = cp4d::cp_metric(cp);
    qk::ReducedData rd = cp4d::reduced_data(cp);
    qk::QKStructure gen = qk::qk_structure(rd);
    for (uint64_t seed : {1ull, 2ull}) {
      Vec p = sample(seed);
      if (std::abs(cp.u(p[2], p[3])) < 0.2) p[2] = 1.0;  // stay off the zero locus
      double scale = std::max(1.0, gen.sg.comp(p).cwiseAbs().maxCoeff());
      CHECK((st.sg.comp(p) - gen.sg.comp(p)).cwiseAbs().maxCoeff() / scale < 1e-8);
      for (int k = 0; k < 3; ++k)
        CHECK((gh::form_matrix(st.som[k], p) - gh::form_matrix(gen.som[k], p))
                      .cwiseAbs()
                      .maxCoeff() /
                  scale <
              1e-8);
    }
  }
}

TEST_CASE("connection 1-forms take the displayed 4D shape") {
  CPPotential cp = cp4d::rho2sq_potential();
  qk::ReducedData rd = cp4d::reduced_data(cp);
  Vec p = sample(5);
  double r1 = p[2], r2 = p[3];
  cp4d::Derivs d = cp4d::derivs(cp, r1, r2);
  qk::Frame f = qk::frame(rd, p);
  // theta = -(1/2U)[lambda_1 i + lambda_2 j + (U_1 drho_2 - U_2 drho_1) k]
  Vec t0(4), t1(4), t2(4);
  t0 << -1 / d.u, -r1 / d.u, 0, 0;
  t1 << 0, -r2 / d.u, 0, 0;
  t2 << 0, 0, d.u2 / (2 * d.u), -d.u1 / (2 * d.u);
  CHECK((f.th[0] - t0).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((f.th[1] - t1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((f.th[2] - t2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("4D data runs the full verifier stack") {
  CPPotential cp = cp4d::linear_combo_potential(1, 1);
  qk::ReducedData rd = cp4d::reduced_data(cp);
  qk::QKStructure st = qk::qk_structure(rd);
  for (uint64_t seed : {3ull, 4ull}) {
    Vec p = sample(seed);
    Vec rho = rd.rho(p);
    CHECK(qk::red_bogo1_residual(rd, rho) < 1e-6);
    CHECK(qk::red_bogo2_residual(rd, rho) < 1e-10);
    CHECK(qk::einstein_residual(st, p, rd.scheme) < 1e-6);
    for (int I = 0; I < 2; ++I) CHECK(qk::moment_map_residual(st, rd, I, p) < 1e-6);
    CHECK(gh::algebraic_check(st.som, st.sg, p) < 1e-8);
    // with the theta corrections switched off the assembly has the flat
    // fibered shape, whose fiber block is (1/2) W^{IJ}; the full metric's
    // coordinate fiber block picks up theta corrections on top of this
    qk::Frame f = qk::frame(rd, p);
    Mat Gflat = Mat::Zero(4, 4);
    for (int I = 0; I < 2; ++I)
      for (int J = 0; J < 2; ++J) {
        for (int i = 0; i < 3; ++i)
          Gflat += 0.5 * f.W(I, J) *
                   qk::sym_mat(f.dnu.row(3 * I + i).transpose(), f.dnu.row(3 * J + i).transpose());
        Gflat += 0.5 * f.Winv(I, J) * qk::sym_mat(f.E.row(I).transpose(), f.E.row(J).transpose());
      }
    CHECK((Gflat.topLeftCorner(2, 2) - Mat(0.5 * f.Winv)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("curvature sign flag") {
  CHECK(cp4d::curvature_sign(cp4d::rho1_potential(), 0.3, 1.0) == -1);
  CHECK(cp4d::curvature_sign(cp4d::rho2sq_potential(), 0.3, 1.0) == -1);
  // eps(v_1,v_2) = 2 rho_2 - 2 rho_2^3 for 1 + rho_2^2: changes sign at rho_2 = 1
  CHECK(cp4d::curvature_sign(mixed_modes(), 0.0, 0.5) == 1);
  CHECK(cp4d::curvature_sign(mixed_modes(), 0.0, 2.0) == -1);
  CHECK_THROWS_AS(cp4d::curvature_sign(cp4d::one_potential(), 0.0, 1.0), std::domain_error);
}
