#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gh.hpp"
#include "rng.hpp"

using namespace gh;

// sample away from the monopole string (negative x3 half-axis, 0.1 rad cone)
static Vec monopole_point(rng::Stream& rs) {
  while (true) {
    Vec p(4);
    for (int i = 0; i < 4; ++i) p[i] = rs.sym(2);
    double r = p.head(3).norm();
    if (r < 0.3 || r > 2.5) continue;
    if (-p[2] / r > std::cos(0.1)) continue;
    return p;
  }
}

// generic smooth random data on a 4m chart (no field equations)
static GHData random_data(int m, uint64_t seed) {
  GHData g;
  g.m = m;
  g.scheme = {};
  rng::Stream rs(seed);
  // smooth symmetric Higgs: U_IJ = c_IJ + sum of low-order trig terms
  int nb = 3 * m;
  std::vector<double> c0(m * m), c1(m * m * nb), ph(m * m * nb);
  for (auto& v : c0) v = rs.sym(1);
  for (auto& v : c1) v = rs.sym(0.5);
  for (auto& v : ph) v = rs.sym(3);
  g.U = [m, nb, c0, c1, ph](const Vec& x) {
    Mat u = Mat::Zero(m, m);
    for (int I = 0; I < m; ++I)
      for (int J = I; J < m; ++J) {
        double v = 2.0 * (I == J) + c0[I * m + J];
        for (int c = 0; c < nb; ++c)
          v += c1[(I * m + J) * nb + c] * std::sin(x[c] + ph[(I * m + J) * nb + c]);
        u(I, J) = u(J, I) = v;
      }
    return u;
  };
  std::vector<double> a1(m * 4 * m * nb);
  for (auto& v : a1) v = rs.sym(0.5);
  g.A = [m, nb, a1](const Vec& p) {
    Mat a = Mat::Zero(m, 4 * m);
    for (int I = 0; I < m; ++I)
      for (int q = 0; q < nb; ++q)
        for (int c = 0; c < nb; ++c) a(I, q) += a1[(I * 4 * m + q) * nb + c] * std::cos(p[c]);
    return a;
  };
  return g;
}

TEST_CASE("bogomolny1") {
  GHData mono = dirac_monopole();
  rng::Stream rs(21);
  Vec p = monopole_point(rs);
  CHECK(bogomolny1_residual(mono, mono.base(p)) == 0);  // m = 1: single index

  // violation: U_01 perturbed by x^0_1
  GHData bad;
  bad.m = 2;
  bad.scheme = {};
  bad.U = [](const Vec& x) {
    Mat u = Mat::Identity(2, 2);
    u(0, 1) = u(1, 0) = x[0];
    return u;
  };
  Vec x(6);
  x << 1, 0.2, -0.5, 0.3, 1.1, 0.7;
  CHECK(bogomolny1_residual(bad, x) >= doctest::Approx(1).epsilon(1e-6));
}

TEST_CASE("bogomolny2 on the monopole") {
  GHData mono = dirac_monopole();
  rng::Stream rs(22);
  double worst = 0;
  for (int t = 0; t < 20; ++t) worst = std::max(worst, bogomolny2_residual(mono, monopole_point(rs)));
  CHECK(worst < 1e-6);

  // A = 0 with nonconstant U fails by about |dU|
  GHData noA = mono;
  noA.A = [](const Vec&) { return Mat::Zero(1, 4); };
  Vec p = monopole_point(rs);
  CHECK(bogomolny2_residual(noA, p) > 1e-2);

  // constant U, A = 0: exact
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  CHECK(bogomolny2_residual(flat, p) < 1e-12);
}

TEST_CASE("hk_forms flat expansion") {
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  HKTriple t = hk_forms(flat);
  Vec p(4);
  p << 0.3, -1, 2, 0.5;
  // Om_1 = -U dx2^dx3 - dx1^dpsi with U = 1/2
  CHECK(t[0].coef(p, {1, 2}) == doctest::Approx(-0.5));
  CHECK(t[0].coef(p, {0, 3}) == doctest::Approx(-1.0));
  CHECK(t[0].coef(p, {0, 1}) == 0.0);
  // cyclic images
  CHECK(t[1].coef(p, {0, 2}) == doctest::Approx(0.5));   // -U dx3^dx1
  CHECK(t[2].coef(p, {0, 1}) == doctest::Approx(-0.5));  // -U dx1^dx2
}

TEST_CASE("closure of the monopole forms and sensitivity to the field equations") {
  GHData mono = dirac_monopole();
  HKTriple t = hk_forms(mono);
  rng::Stream rs(23);
  double worst = 0;
  for (int s = 0; s < 10; ++s) worst = std::max(worst, closure_check(t, monopole_point(rs), mono.scheme));
  CHECK(worst < 1e-6);

  // Bogomolny-violating data: closure fails at the size of F - *dU
  GHData noA = mono;
  noA.A = [](const Vec&) { return Mat::Zero(1, 4); };
  HKTriple tb = hk_forms(noA);
  Vec p = monopole_point(rs);
  CHECK(closure_check(tb, p, mono.scheme) > 1e-2);
}

TEST_CASE("hk_metric") {
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  Vec p(4);
  p << 1, 0, 0, 0;
  Mat G = hk_metric(flat).comp(p);
  Mat want = Mat::Zero(4, 4);
  want.topLeftCorner(3, 3) = 0.25 * Mat::Identity(3, 3);
  want(3, 3) = 1.0;
  CHECK((G - want).norm() < 1e-14);

  // positive definite U gives positive definite G; fiber block is U^{IJ}/2
  GHData mono = dirac_monopole();
  rng::Stream rs(24);
  for (int t = 0; t < 10; ++t) {
    Vec q = monopole_point(rs);
    Mat Gm = hk_metric(mono).comp(q);
    Eigen::SelfAdjointEigenSolver<Mat> es(Gm);
    CHECK(es.eigenvalues().minCoeff() > 0);
    double Uinv = 1.0 / mono.U(mono.base(q))(0, 0);
    CHECK(Gm(3, 3) == doctest::Approx(0.5 * Uinv).epsilon(1e-10));
  }
}

TEST_CASE("quaternionic coframe identity") {
  // algebraic identity: holds for random data with no field equations
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  Vec p(4);
  p << 0.4, 1.2, -0.3, 2.0;
  CHECK(quat_forms_check(flat, p) < 1e-12);

  GHData mono = dirac_monopole();
  rng::Stream rs(25);
  double worst = 0;
  for (int t = 0; t < 10; ++t) worst = std::max(worst, quat_forms_check(mono, monopole_point(rs)));
  CHECK(worst < 1e-8);

  GHData rnd = random_data(2, 77);
  for (int t = 0; t < 5; ++t) {
    Vec q(8);
    for (int i = 0; i < 8; ++i) q[i] = rs.sym(1.5);
    worst = std::max(worst, quat_forms_check(rnd, q));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("pointwise quaternionic algebra") {
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  HKTriple tf = hk_forms(flat);
  MetricField gf = hk_metric(flat);
  Vec p(4);
  p << 0.4, 1.2, -0.3, 2.0;
  CHECK(algebraic_check(tf, gf, p) < 1e-10);

  GHData mono = dirac_monopole();
  HKTriple tm = hk_forms(mono);
  MetricField gm = hk_metric(mono);
  rng::Stream rs(26);
  double worst = 0;
  for (int t = 0; t < 10; ++t) worst = std::max(worst, algebraic_check(tm, gm, monopole_point(rs)));
  CHECK(worst < 1e-8);

  // purely pointwise: random data with no field equations passes too
  GHData rnd = random_data(2, 78);
  HKTriple tr = hk_forms(rnd);
  MetricField gr = hk_metric(rnd);
  Vec q(8);
  for (int i = 0; i < 8; ++i) q[i] = rs.sym(1.0);
  CHECK(algebraic_check(tr, gr, q) < 1e-8);

  // scaling one form breaks the algebra
  HKTriple broken = tm;
  broken[1] = excalc::scale(tm[1], [](const Vec&) { return 2.0; });
  Vec pm = monopole_point(rs);
  CHECK(algebraic_check(broken, gm, pm) > 0.5);
}

TEST_CASE("fiber directions contract to dx") {
  GHData mono = dirac_monopole();
  HKTriple t = hk_forms(mono);
  rng::Stream rs(27);
  Vec p = monopole_point(rs);
  VectorField dpsi{4, [](const Vec&) {
                     Vec v = Vec::Zero(4);
                     v[3] = 1;
                     return v;
                   }};
  for (int i = 0; i < 3; ++i) {
    KForm c = excalc::interior(dpsi, t[i]);
    for (int q = 0; q < 4; ++q) {
      double want = (q == i) ? 1.0 : 0.0;
      CHECK(c.coef(p, {q}) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}
