#ifndef EXCALC_HPP
#define EXCALC_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dual.hpp"

// Pointwise-evaluable differential forms, vector fields and metrics on
// coordinate charts, with a numerical exterior derivative.  Forms are closures
// over points, never global coefficient arrays: all verification downstream is
// sample-based.
namespace excalc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Idx = std::vector<int>;

struct DerivScheme {
  enum Mode { Analytic, CentralDiff, DualNumber } mode = CentralDiff;
  double h = 1e-5;
};

struct Chart {
  std::vector<std::string> names;
  int dim() const { return int(names.size()); }
};

// sort an index tuple in place; returns the permutation sign, or 0 on repeats
inline int sort_sign(Idx& idx) {
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i)
    for (size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

struct KForm {
  int dim = 0;
  int k = 0;
  // coefficient on a strictly increasing index tuple
  std::function<double(const Vec&, const Idx&)> coef;
  // optional analytic partial d_j of a coefficient: (p, j, idx)
  std::function<double(const Vec&, int, const Idx&)> dcoef;
  // optional analytic second partial d_j1 d_j2 of a coefficient: (p, j1, j2, idx)
  std::function<double(const Vec&, int, int, const Idx&)> d2coef;

  // evaluate on an arbitrary tuple (antisymmetry by sign, repeats give 0)
  double eval(const Vec& p, Idx idx) const {
    int s = sort_sign(idx);
    return s == 0 ? 0.0 : s * coef(p, idx);
  }
};

struct VectorField {
  int dim = 0;
  std::function<Vec(const Vec&)> comp;
};

struct MetricField {
  int dim = 0;
  std::function<Mat(const Vec&)> comp;
};

inline KForm zero_form(int dim, int k) {
  return {dim, k, [](const Vec&, const Idx&) { return 0.0; }, nullptr};
}

inline KForm scalar(int dim, std::function<double(const Vec&)> f) {
  return {dim, 0, [f = std::move(f)](const Vec& p, const Idx&) { return f(p); }, nullptr};
}

// dx_i
inline KForm coordinate_form(int dim, int i) {
  return {dim, 1, [i](const Vec&, const Idx& idx) { return idx[0] == i ? 1.0 : 0.0; },
          [](const Vec&, int, const Idx&) { return 0.0; }};
}

// 1-form from a coefficient-vector closure, a_i dx_i
inline KForm one_form(int dim, std::function<Vec(const Vec&)> a) {
  return {dim, 1, [a = std::move(a)](const Vec& p, const Idx& idx) { return a(p)[idx[0]]; },
          nullptr};
}

// 2-form (1/2) A_ij dx_i ^ dx_j from an antisymmetric matrix closure
inline KForm two_form(int dim, std::function<Mat(const Vec&)> A) {
  return {dim, 2,
          [A = std::move(A)](const Vec& p, const Idx& idx) { return A(p)(idx[0], idx[1]); },
          nullptr};
}

// symmetric central difference with relative step
inline double partial(const std::function<double(const Vec&)>& f, const Vec& p, int j, double h) {
  double step = h * std::max(1.0, std::abs(p[j]));
  Vec pp = p, pm = p;
  pp[j] += step;
  pm[j] -= step;
  return (f(pp) - f(pm)) / (2 * step);
}

inline double coef_partial(const KForm& w, const Vec& p, int j, const Idx& idx,
                           const DerivScheme& s) {
  if (s.mode == DerivScheme::Analytic && w.dcoef) return w.dcoef(p, j, idx);
  return partial([&](const Vec& q) { return w.coef(q, idx); }, p, j, s.h);
}

inline KForm d(const KForm& w, const DerivScheme& s) {
  if (w.k >= w.dim) return zero_form(w.dim, w.dim + 1);
  KForm r;
  r.dim = w.dim;
  r.k = w.k + 1;
  r.coef = [w, s](const Vec& p, const Idx& idx) {
    double acc = 0;
    Idx sub(idx.size() - 1);
    for (size_t m = 0; m < idx.size(); ++m) {
      for (size_t i = 0, j = 0; i < idx.size(); ++i)
        if (i != m) sub[j++] = idx[i];
      double sgn = (m % 2 == 0) ? 1.0 : -1.0;
      acc += sgn * coef_partial(w, p, idx[m], sub, s);
    }
    return acc;
  };
  // the derivative of the result is analytic when second partials are supplied
  if (w.d2coef)
    r.dcoef = [w](const Vec& p, int j, const Idx& idx) {
      double acc = 0;
      Idx sub(idx.size() - 1);
      for (size_t m = 0; m < idx.size(); ++m) {
        for (size_t i = 0, jj = 0; i < idx.size(); ++i)
          if (i != m) sub[jj++] = idx[i];
        double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        acc += sgn * w.d2coef(p, j, idx[m], sub);
      }
      return acc;
    };
  return r;
}

// exact exterior derivative of a scalar field given through a dual-number evaluator
inline KForm d_dual(int dim, const std::function<Dual(const std::vector<Dual>&)>& f) {
  return {dim, 1,
          [dim, f](const Vec& p, const Idx& idx) {
            std::vector<Dual> x(dim);
            for (int i = 0; i < dim; ++i) x[i] = Dual(p[i], i == idx[0] ? 1.0 : 0.0);
            return f(x).d;
          },
          nullptr};
}

inline KForm wedge(const KForm& a, const KForm& b) {
  if (a.dim != b.dim) throw std::invalid_argument("wedge: chart mismatch");
  KForm r;
  r.dim = a.dim;
  r.k = a.k + b.k;
  int ka = a.k;
  r.coef = [a, b, ka](const Vec& p, const Idx& idx) {
    int n = int(idx.size());
    double acc = 0;
    // iterate over ka-subsets of positions going to a
    std::vector<int> pick(ka);
    for (int i = 0; i < ka; ++i) pick[i] = i;
    while (true) {
      Idx ia(ka), ib(n - ka);
      std::vector<char> used(n, 0);
      for (int i = 0; i < ka; ++i) {
        ia[i] = idx[pick[i]];
        used[pick[i]] = 1;
      }
      for (int i = 0, j = 0; i < n; ++i)
        if (!used[i]) ib[j++] = idx[i];
      // shuffle sign: inversions of the (pick, complement) interleaving
      int inv = 0;
      for (int i = 0; i < ka; ++i) inv += pick[i] - i;
      double sgn = (inv % 2 == 0) ? 1.0 : -1.0;
      double ca = ka == 0 ? a.coef(p, {}) : a.coef(p, ia);
      if (ca != 0) acc += sgn * ca * b.coef(p, ib);
      // next combination
      int i = ka - 1;
      while (i >= 0 && pick[i] == n - ka + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < ka; ++j) pick[j] = pick[j - 1] + 1;
    }
    return acc;
  };
  return r;
}

inline KForm interior(const VectorField& X, const KForm& w) {
  if (w.k == 0) throw std::invalid_argument("interior: cannot contract a 0-form");
  KForm r;
  r.dim = w.dim;
  r.k = w.k - 1;
  r.coef = [X, w](const Vec& p, const Idx& idx) {
    Vec xv = X.comp(p);
    double acc = 0;
    Idx full(idx.size() + 1);
    std::copy(idx.begin(), idx.end(), full.begin() + 1);
    for (int j = 0; j < w.dim; ++j) {
      if (xv[j] == 0) continue;
      full[0] = j;
      acc += xv[j] * w.eval(p, full);
    }
    return acc;
  };
  return r;
}

// Cartan homotopy formula
inline KForm lie_form(const VectorField& X, const KForm& w, const DerivScheme& s) {
  if (w.k == 0) {
    KForm r = w;
    r.coef = [X, w, s](const Vec& p, const Idx&) {
      Vec xv = X.comp(p);
      double acc = 0;
      for (int j = 0; j < w.dim; ++j)
        if (xv[j] != 0) acc += xv[j] * coef_partial(w, p, j, {}, s);
      return acc;
    };
    return r;
  }
  KForm a = interior(X, d(w, s));
  KForm b = d(interior(X, w), s);
  KForm r;
  r.dim = w.dim;
  r.k = w.k;
  r.coef = [a, b](const Vec& p, const Idx& idx) { return a.coef(p, idx) + b.coef(p, idx); };
  return r;
}

inline MetricField lie_metric(const VectorField& X, const MetricField& g, const DerivScheme& s) {
  MetricField r;
  r.dim = g.dim;
  r.comp = [X, g, s](const Vec& p) {
    int n = g.dim;
    Mat gp = g.comp(p);
    Vec xv = X.comp(p);
    Mat out = Mat::Zero(n, n);
    // X^l d_l g_mn
    for (int l = 0; l < n; ++l) {
      if (xv[l] == 0) continue;
      double step = s.h * std::max(1.0, std::abs(p[l]));
      Vec pp = p, pm = p;
      pp[l] += step;
      pm[l] -= step;
      out += xv[l] / (2 * step) * (g.comp(pp) - g.comp(pm));
    }
    // g_ln d_m X^l + g_ml d_n X^l
    Mat J(n, n);  // J(m, l) = d_m X^l
    for (int m = 0; m < n; ++m) {
      double step = s.h * std::max(1.0, std::abs(p[m]));
      Vec pp = p, pm = p;
      pp[m] += step;
      pm[m] -= step;
      J.row(m) = ((X.comp(pp) - X.comp(pm)) / (2 * step)).transpose();
    }
    out += J * gp + gp * J.transpose();
    return out;
  };
  return r;
}

inline VectorField bracket(const VectorField& X, const VectorField& Y, const DerivScheme& s) {
  VectorField r;
  r.dim = X.dim;
  r.comp = [X, Y, s](const Vec& p) {
    int n = X.dim;
    Vec xv = X.comp(p), yv = Y.comp(p);
    Vec out = Vec::Zero(n);
    for (int nu = 0; nu < n; ++nu) {
      if (xv[nu] == 0 && yv[nu] == 0) continue;
      double step = s.h * std::max(1.0, std::abs(p[nu]));
      Vec pp = p, pm = p;
      pp[nu] += step;
      pm[nu] -= step;
      out += (xv[nu] * (Y.comp(pp) - Y.comp(pm)) - yv[nu] * (X.comp(pp) - X.comp(pm))) /
             (2 * step);
    }
    return out;
  };
  return r;
}

// visit all strictly increasing k-tuples on [0, dim)
inline void for_each_tuple(int dim, int k, const std::function<void(const Idx&)>& visit) {
  if (k == 0) {
    visit({});
    return;
  }
  Idx idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == dim - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// sup norm of the coefficients at a point
inline double sup_coef(const KForm& w, const Vec& p) {
  if (w.k > w.dim) return 0;
  double m = 0;
  for_each_tuple(w.dim, w.k, [&](const Idx& idx) { m = std::max(m, std::abs(w.coef(p, idx))); });
  return m;
}

inline double form_dist(const KForm& a, const KForm& b, const Vec& p) {
  if (a.k != b.k || a.dim != b.dim) throw std::invalid_argument("form_dist: mismatched forms");
  double m = 0;
  for_each_tuple(a.dim, a.k,
                 [&](const Idx& idx) { m = std::max(m, std::abs(a.coef(p, idx) - b.coef(p, idx))); });
  return m;
}

inline KForm add(const KForm& a, const KForm& b, double ca = 1.0, double cb = 1.0) {
  if (a.k != b.k || a.dim != b.dim) throw std::invalid_argument("add: mismatched forms");
  KForm r;
  r.dim = a.dim;
  r.k = a.k;
  r.coef = [a, b, ca, cb](const Vec& p, const Idx& idx) {
    return ca * a.coef(p, idx) + cb * b.coef(p, idx);
  };
  return r;
}

inline KForm scale(const KForm& a, std::function<double(const Vec&)> f) {
  KForm r;
  r.dim = a.dim;
  r.k = a.k;
  r.coef = [a, f = std::move(f)](const Vec& p, const Idx& idx) { return f(p) * a.coef(p, idx); };
  return r;
}

}  // namespace excalc

#endif
