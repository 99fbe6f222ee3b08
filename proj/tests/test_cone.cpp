#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cone.hpp"
#include "rng.hpp"

using namespace cone;
using gh::GHData;

// point in one monopole chart, away from the string (negative x3 half-axis)
static Vec monopole_block(rng::Stream& rs) {
  while (true) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = rs.sym(2);
    double r = x.norm();
    if (r < 0.5 || r > 2.0) continue;
    if (-x[2] / r > std::cos(0.1)) continue;
    return x;
  }
}

// full chart point for an m = 2 two-center configuration, both blocks regular
// and the configuration non-collinear
static Vec two_center_point(rng::Stream& rs) {
  while (true) {
    Vec p(8);
    p.head(3) = monopole_block(rs);
    p.segment(3, 3) = monopole_block(rs);
    p[6] = rs.sym(3);
    p[7] = rs.sym(3);
    Eigen::Vector3d a = p.head(3), b = p.segment(3, 3);
    if (a.cross(b).norm() < 1e-2) continue;
    return p;
  }
}

// generic smooth random data on a 4m chart (no field equations)
static GHData random_data(int m, uint64_t seed) {
  GHData g;
  g.m = m;
  g.scheme = {};
  rng::Stream rs(seed);
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
  std::vector<double> a1(m * nb * nb);
  for (auto& v : a1) v = rs.sym(0.5);
  g.A = [m, nb, a1](const Vec& p) {
    Mat a = Mat::Zero(m, 4 * m);
    for (int I = 0; I < m; ++I)
      for (int q = 0; q < nb; ++q)
        for (int c = 0; c < nb; ++c) a(I, q) += a1[(I * nb + q) * nb + c] * std::cos(p[c]);
    return a;
  };
  return g;
}

TEST_CASE("collective generators") {
  Generators g = collective_generators(1);
  Vec x(3);
  x << 1, 0, 0;
  // L_3 = -x1 d2 + x2 d1 (third component of -x x d), a z-rotation
  Vec v = g.L[2].comp(x);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == -1.0);
  CHECK(v[2] == 0.0);

  // so(3) algebra [L_i, L_j] = eps_ijk L_k and [L_i, L0] = 0 for m = 2
  Generators g2 = collective_generators(2);
  excalc::DerivScheme s{};
  rng::Stream rs(31);
  Vec p(6);
  for (int i = 0; i < 6; ++i) p[i] = rs.sym(1.5);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Vec br = excalc::bracket(g2.L[i], g2.L[j], s).comp(p);
      for (int k = 0; k < 3; ++k)
        if (gh::eps(i, j, k)) br -= double(gh::eps(i, j, k)) * g2.L[k].comp(p);
      CHECK(br.cwiseAbs().maxCoeff() < 1e-8);
    }
  for (int i = 0; i < 3; ++i)
    CHECK(excalc::bracket(g2.L[i], g2.L0, s).comp(p).cwiseAbs().maxCoeff() < 1e-8);

  // Euler: L0 |x| = |x|
  auto norm0 = [](const Vec& q) { return q.head(3).norm(); };
  double L0f = 0;
  for (int c = 0; c < 6; ++c) L0f += p[c] * excalc::partial(norm0, p, c, s.h);
  CHECK(L0f == doctest::Approx(norm0(p)).epsilon(1e-8));
}

TEST_CASE("Higgs-field cone constraints") {
  GHData g2 = gh::direct_sum(gh::dirac_monopole(), gh::dirac_monopole());
  rng::Stream rs(32);
  double worst = 0;
  for (int t = 0; t < 10; ++t)
    worst = std::max(worst, hkc_higgs_residual(g2, g2.base(two_center_point(rs))));
  CHECK(worst < 1e-6);

  GHData tc = three_center_higgs();
  CHECK(hkc_higgs_residual(tc, g2.base(two_center_point(rs))) < 1e-6);
  // the three-center family also satisfies the Higgs symmetry equation
  CHECK(gh::bogomolny1_residual(tc, g2.base(two_center_point(rs))) < 1e-6);

  // constant Higgs field: scaling residual equals the sup of |U|
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.7; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  Vec x(3);
  x << 0.4, -1.1, 0.6;
  CHECK(hkc_higgs_residual(flat, x) == 0.7);
}

TEST_CASE("potential duality") {
  GHData tc = three_center_higgs();
  rng::Stream rs(33);
  Vec x = two_center_point(rs).head(6);

  // the three-center potential in closed form
  auto pot = [](const Vec& y) {
    return y.head(3).norm() + y.segment(3, 3).norm() + (y.head(3) + y.segment(3, 3)).norm();
  };
  CHECK(hk_potential(tc, x) == doctest::Approx(pot(x)).epsilon(1e-12));

  ConePotential cp{2, pot, {}};
  CHECK((potential_to_higgs(cp, x) - tc.U(x)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(potential_constraints(cp, x) < 1e-6);

  // round trip potential -> Higgs -> potential
  GHData back = tc;
  back.U = [cp](const Vec& y) { return potential_to_higgs(cp, y); };
  CHECK(hk_potential(back, x) == doctest::Approx(pot(x)).epsilon(1e-6));

  // degenerate potential |x^0|: second row and column of the Higgs field vanish
  ConePotential deg{2, [](const Vec& y) { return y.head(3).norm(); }, {}};
  Mat u = potential_to_higgs(deg, x);
  CHECK(u(0, 0) == doctest::Approx(0.5 / x.head(3).norm()).epsilon(1e-6));
  CHECK(std::abs(u(0, 1)) < 1e-6);
  CHECK(std::abs(u(1, 1)) < 1e-6);

  // a linear coordinate is scale-covariant but not rotation invariant
  ConePotential lin{1, [](const Vec& y) { return y[0]; }, {}};
  Vec x1 = x.head(3);
  CHECK(potential_constraints(lin, x1) > 1e-2);
}

TEST_CASE("gauge fixing residual") {
  GHData mono = gh::dirac_monopole();
  rng::Stream rs(34);
  Vec p(4);
  p.head(3) = monopole_block(rs);
  p[3] = rs.sym(3);
  // the scaling contraction vanishes and the third rotation contraction misses
  // the target by exactly 1/2: for m = 1 the conditions cannot all be met
  CHECK(gauge_fix_residual(mono, p) >= 0.5 - 1e-12);

  // shifting A by d(rotation- and scale-invariant f) leaves the residual unchanged
  GHData g2 = gh::direct_sum(mono, mono);
  Vec p8 = two_center_point(rs);
  GHData g2s = g2;
  g2s.A = [g2](const Vec& q) {
    Mat a = g2.A(q);
    auto f = [](const Vec& y) {
      return y.head(3).dot(y.segment(3, 3)) / (y.head(3).norm() * y.segment(3, 3).norm());
    };
    for (int c = 0; c < 6; ++c) a(0, c) += excalc::partial(f, q, c, 1e-6);
    return a;
  };
  CHECK(gauge_fix_residual(g2s, p8) ==
        doctest::Approx(gauge_fix_residual(g2, p8)).epsilon(1e-8));

  // with A = 0 the residual is exactly max |U_IJ x^J_a|
  GHData noA = g2;
  noA.A = [](const Vec&) { return Mat::Zero(2, 8); };
  Mat Up = g2.U(g2.base(p8));
  double want = 0;
  for (int I = 0; I < 2; ++I)
    for (int i = 0; i < 3; ++i) {
      double v = 0;
      for (int J = 0; J < 2; ++J) v += Up(I, J) * p8[3 * J + i];
      want = std::max(want, std::abs(v));
    }
  CHECK(gauge_fix_residual(noA, p8) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("lifted generators") {
  GHData mono = gh::dirac_monopole();
  rng::Stream rs(35);
  Vec p(4);
  p.head(3) = monopole_block(rs);
  p[3] = rs.sym(3);
  auto X = lifted_generators(mono);
  // the scaling lift is horizontal: iota_{L0} A = 0 for the monopole
  Vec x0 = X[0].comp(p);
  CHECK(x0[3] == doctest::Approx(0).epsilon(1e-14));
  CHECK((x0.head(3) - p.head(3)).norm() == 0.0);
  // the vertical part of the third rotation lift is the constant -1/2
  CHECK(X[3].comp(p)[3] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("cone criterion") {
  GHData g2 = gh::direct_sum(gh::dirac_monopole(), gh::dirac_monopole());
  rng::Stream rs(36);
  double worst = 0;
  for (int t = 0; t < 3; ++t)
    worst = std::max(worst, cone_criterion_residual(g2, two_center_point(rs)));
  CHECK(worst < 1e-6);

  // constant Higgs field fails the scaling identity by O(|Om|)
  GHData flat;
  flat.m = 1;
  flat.scheme = {};
  flat.U = [](const Vec&) { return Mat::Identity(1, 1) * 0.5; };
  flat.A = [](const Vec&) { return Mat::Zero(1, 4); };
  Vec p(4);
  p << 0.8, -0.4, 1.1, 0.3;
  CHECK(cone_criterion_residual(flat, p) > 0.1);

  // an off-center monopole satisfies the field equations but not the cone
  // constraints: the criterion fails while the c-term identities still hold
  GHData off = gh::dirac_monopole({0, 0, 0.8});
  Vec q(4);
  q.head(3) = monopole_block(rs) + Vec(Eigen::Vector3d(0, 0, 0.8));
  q[3] = rs.sym(3);
  CHECK(cone_criterion_residual(off, q) > 1e-3);
  CHECK(cone_identity_residual(off, q) < 1e-6);
  CHECK(c_identities_residual(off, q) < 1e-6);

  // and on cone data the c-terms vanish, so both versions agree
  Vec p8 = two_center_point(rs);
  CHECK(cone_identity_residual(g2, p8) < 1e-6);
  CHECK(c_identities_residual(g2, p8) < 1e-6);
}

TEST_CASE("lift identities without field equations") {
  GHData rnd = random_data(2, 91);
  rng::Stream rs(37);
  double worst = 0;
  for (int t = 0; t < 3; ++t) {
    Vec p(8);
    for (int i = 0; i < 8; ++i) p[i] = rs.sym(1.2);
    worst = std::max(worst, lift_identity_residual(rnd, p));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("generator algebra") {
  GHData mono = gh::dirac_monopole();
  rng::Stream rs(38);
  Vec p(4);
  p.head(3) = monopole_block(rs);
  p[3] = rs.sym(3);
  CHECK(generator_algebra_check(mono, p) < 1e-6);

  GHData g2 = gh::direct_sum(mono, mono);
  CHECK(generator_algebra_check(g2, two_center_point(rs)) < 1e-6);

  // breaking the cone constraints leaves a purely vertical bracket defect
  GHData off = gh::dirac_monopole({0, 0, 0.8});
  Vec q(4);
  q.head(3) = monopole_block(rs) + Vec(Eigen::Vector3d(0, 0, 0.8));
  q[3] = rs.sym(3);
  CHECK(generator_algebra_check(off, q) > 1e-3);
  auto X = lifted_generators(off);
  Vec br = excalc::bracket(X[1], X[2], off.scheme).comp(q) - X[3].comp(q);
  CHECK(br.head(3).cwiseAbs().maxCoeff() < 1e-8);
}
