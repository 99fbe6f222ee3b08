#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "excalc.hpp"
#include "rng.hpp"

using namespace excalc;

static DerivScheme cd() { return DerivScheme{DerivScheme::CentralDiff, 1e-5}; }

static Vec pt(std::initializer_list<double> v) {
  Vec p(int(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

TEST_CASE("exterior derivative of x1 dx2") {
  KForm w = one_form(3, [](const Vec& p) { return pt({0, p[0], 0}); });
  KForm dw = d(w, cd());
  Vec p = pt({0.7, -1.3, 0.2});
  CHECK(dw.coef(p, {0, 1}) == doctest::Approx(1).epsilon(1e-9));
  CHECK(dw.coef(p, {0, 2}) == doctest::Approx(0).epsilon(1e-9));
  CHECK(dw.coef(p, {1, 2}) == doctest::Approx(0).epsilon(1e-9));
  // d(dx1) = 0 exactly
  KForm ddx = d(coordinate_form(3, 0), DerivScheme{DerivScheme::Analytic, 1e-5});
  CHECK(sup_coef(ddx, p) == 0);
}

TEST_CASE("d of d vanishes") {
  // f = exp(x1 x2)
  KForm f = scalar(2, [](const Vec& p) { return std::exp(p[0] * p[1]); });
  double h = 1e-5;
  DerivScheme s{DerivScheme::CentralDiff, h};
  Vec p = pt({0.4, -0.8});
  CHECK(sup_coef(d(d(f, s), s), p) < 10 * h * h);

  // analytic chain: 1-form with first and second partials supplied
  KForm w;
  w.dim = 2;
  w.k = 1;
  w.coef = [](const Vec& p, const Idx& idx) {
    return idx[0] == 0 ? std::exp(p[0] * p[1]) : std::sin(p[0]);
  };
  w.dcoef = [](const Vec& p, int j, const Idx& idx) {
    if (idx[0] == 0) return (j == 0 ? p[1] : p[0]) * std::exp(p[0] * p[1]);
    return j == 0 ? std::cos(p[0]) : 0.0;
  };
  w.d2coef = [](const Vec& p, int j1, int j2, const Idx& idx) {
    double e = std::exp(p[0] * p[1]);
    if (idx[0] == 0) {
      double a = j1 == 0 ? p[1] : p[0];
      double b = j2 == 0 ? p[1] : p[0];
      double mixed = (j1 != j2) ? 1.0 : 0.0;
      return (a * b + mixed) * e;
    }
    return (j1 == 0 && j2 == 0) ? -std::sin(p[0]) : 0.0;
  };
  DerivScheme an{DerivScheme::Analytic, h};
  CHECK(sup_coef(d(d(w, an), an), p) < 1e-10);

  // dual-number first derivative, analytic-free second: still comfortably small
  KForm df = d_dual(2, [](const std::vector<Dual>& x) { return exp(x[0] * x[1]); });
  CHECK(sup_coef(d(df, s), p) < 10 * h * h);
}

TEST_CASE("wedge") {
  KForm dx0 = coordinate_form(2, 0), dx1 = coordinate_form(2, 1);
  Vec p = pt({0.3, 0.4});
  CHECK(wedge(dx0, dx1).coef(p, {0, 1}) == 1);
  CHECK(wedge(dx1, dx0).coef(p, {0, 1}) == -1);

  rng::Stream rs(7);
  for (int t = 0; t < 5; ++t) {
    double a0 = rs.sym(2), a1 = rs.sym(2);
    KForm a = one_form(3, [a0, a1](const Vec& q) { return pt({a0 * q[1], a1 * q[2], q[0] * q[1]}); });
    Vec q = pt({rs.sym(1), rs.sym(1), rs.sym(1)});
    CHECK(sup_coef(wedge(a, a), q) < 1e-14);

    // Leibniz on random 1-forms, finite-difference oracle
    KForm b = one_form(3, [a0](const Vec& r) { return pt({std::sin(r[2]), a0 * r[0] * r[0], r[1]}); });
    KForm lhs = d(wedge(a, b), cd());
    KForm rhs = add(wedge(d(a, cd()), b), wedge(a, d(b, cd())), 1.0, -1.0);
    // d(a^b) = da^b - a^db for 1-forms a
    double worst = 0;
    for_each_tuple(3, 3, [&](const Idx& idx) {
      worst = std::max(worst, std::abs(lhs.coef(q, idx) - rhs.coef(q, idx)));
    });
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("interior product") {
  KForm w = wedge(coordinate_form(3, 0), coordinate_form(3, 1));
  VectorField e0{3, [](const Vec&) { return pt({1, 0, 0}); }};
  VectorField e1{3, [](const Vec&) { return pt({0, 1, 0}); }};
  Vec p = pt({0, 0, 0});
  CHECK(interior(e0, w).coef(p, {1}) == 1);
  CHECK(interior(e1, w).coef(p, {0}) == -1);

  VectorField X{3, [](const Vec& q) { return pt({q[1], -q[0], 1}); }};
  KForm v = wedge(wedge(coordinate_form(3, 0), coordinate_form(3, 1)), coordinate_form(3, 2));
  Vec q = pt({0.5, 1.5, -0.4});
  CHECK(sup_coef(interior(X, interior(X, v)), q) < 1e-14);
}

TEST_CASE("lie derivatives") {
  DerivScheme s = cd();
  VectorField e0{2, [](const Vec&) { return pt({1, 0}); }};
  Vec p = pt({0.2, 0.9});
  CHECK(sup_coef(lie_form(e0, coordinate_form(2, 0), s), p) < 1e-9);

  // Euler scaling: L_{x1 d1} dx1 = dx1
  VectorField euler{2, [](const Vec& q) { return pt({q[0], 0}); }};
  KForm lw = lie_form(euler, coordinate_form(2, 0), s);
  CHECK(lw.coef(p, {0}) == doctest::Approx(1).epsilon(1e-8));
  CHECK(std::abs(lw.coef(p, {1})) < 1e-9);

  // rotation is a Euclidean isometry
  VectorField rot{2, [](const Vec& q) { return pt({-q[1], q[0]}); }};
  MetricField eucl{2, [](const Vec&) { return Mat::Identity(2, 2); }};
  CHECK(lie_metric(rot, eucl, s).comp(p).norm() < 1e-9);
}

TEST_CASE("bracket") {
  DerivScheme s = cd();
  VectorField e0{3, [](const Vec&) { return pt({1, 0, 0}); }};
  VectorField e1{3, [](const Vec&) { return pt({0, 1, 0}); }};
  Vec p = pt({0.3, -0.6, 1.1});
  CHECK(bracket(e0, e1, s).comp(p).norm() < 1e-9);

  // oracle (symbolic expansion with [X,Y] = X dY - Y dX):
  // [x1 d2 - x2 d1, x2 d3 - x3 d2] = x1 d3 - x3 d1
  VectorField a{3, [](const Vec& q) { return pt({-q[1], q[0], 0}); }};
  VectorField b{3, [](const Vec& q) { return pt({0, -q[2], q[1]}); }};
  Vec br = bracket(a, b, s).comp(p);
  Vec want = pt({-p[2], 0, p[0]});
  CHECK((br - want).norm() < 1e-8);

  // Jacobi identity on random polynomial fields
  rng::Stream rs(11);
  for (int t = 0; t < 3; ++t) {
    double c1 = rs.sym(1), c2 = rs.sym(1), c3 = rs.sym(1);
    VectorField X{3, [c1](const Vec& q) { return pt({c1 * q[1] * q[2], q[0], c1}); }};
    VectorField Y{3, [c2](const Vec& q) { return pt({c2 * q[0], q[2] * q[2], c2 * q[1]}); }};
    VectorField Z{3, [c3](const Vec& q) { return pt({c3, c3 * q[0] * q[1], q[2]}); }};
    VectorField j1 = bracket(X, bracket(Y, Z, s), s);
    VectorField j2 = bracket(Y, bracket(Z, X, s), s);
    VectorField j3 = bracket(Z, bracket(X, Y, s), s);
    Vec total = j1.comp(p) + j2.comp(p) + j3.comp(p);
    CHECK(total.norm() < 1e-6);
  }
}
