#ifndef CLI_HPP
#define CLI_HPP

// deterministic verification reports: every subcommand draws a fixed family of
// chart points from the seed, folds the residual of each library check into a
// per-check maximum, and grades the result against pinned (or overridden)
// tolerances.  The report depends only on (config, samples, seed, h), so two
// runs with the same inputs serialize to identical bytes.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmap.hpp"
#include "cone.hpp"
#include "cp4d.hpp"
#include "gh.hpp"
#include "json.hpp"
#include "legendre.hpp"
#include "qk.hpp"
#include "rng.hpp"

namespace cli {

using excalc::DerivScheme;
using excalc::Mat;
using excalc::Vec;
using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  json input = json::object();  // parsed config file; {} when none was given
  int samples = 25;
  std::uint64_t seed = 1;
  double h = 1e-5;
  std::map<std::string, double> tolerances;  // per-check overrides by name
};

struct Check {
  double max_residual = 0;
  double tolerance = 0;
  bool pass = true;
};

struct Report {
  RunConfig config;
  std::map<std::string, Check> checks;
  bool pass = true;
};

namespace detail {

// one independent stream per (seed, sample) pair
inline rng::Stream stream(std::uint64_t seed, std::uint64_t k) {
  return rng::Stream(seed * 0x9e3779b97f4a7c15ULL + k);
}

class Collector {
 public:
  explicit Collector(const std::map<std::string, double>& overrides) : over_(overrides) {}

  void add(const std::string& name, double pinned_tol, double residual) {
    auto it = checks_.find(name);
    if (it == checks_.end()) {
      Check c;
      auto ov = over_.find(name);
      c.tolerance = ov == over_.end() ? pinned_tol : ov->second;
      it = checks_.emplace(name, c).first;
    }
    it->second.max_residual = std::max(it->second.max_residual, residual);
  }

  std::map<std::string, Check> grade() const {
    std::map<std::string, Check> out = checks_;
    for (auto& [name, c] : out) c.pass = c.max_residual <= c.tolerance;
    return out;
  }

 private:
  std::map<std::string, double> over_;
  std::map<std::string, Check> checks_;
};

// point in one monopole chart, away from the center and from the string
// (negative x3 half-axis, where the azimuthal connection is steep)
inline Vec monopole_block(rng::Stream& rs) {
  while (true) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = rs.sym(2);
    double r = x.norm();
    if (r < 0.6 || r > 2.0) continue;
    if (x[2] < 0 && std::hypot(x[0], x[1]) < 0.3) continue;
    return x;
  }
}

// full chart point for an m = 2 two-center configuration, both blocks regular
// and the configuration non-collinear
inline Vec two_center_point(rng::Stream& rs) {
  while (true) {
    Vec p(8);
    p.head(3) = monopole_block(rs);
    p.segment(3, 3) = monopole_block(rs);
    p[6] = rs.sym(3);
    p[7] = rs.sym(3);
    Eigen::Vector3d a = p.head(3), b = p.segment(3, 3);
    if (a.cross(b).norm() < 1e-2) continue;
    // the three-center data adds a pole at x^0 + x^1 = 0
    if ((a + b).norm() < 0.75) continue;
    return p;
  }
}

// reduced chart point, staying on the Re X^1 > 0 domain
inline Vec red_point(const qk::ReducedData& rd, rng::Stream& rs) {
  Vec p(rd.dim());
  for (int I = 0; I <= rd.n; ++I) p[I] = rs.sym(1);
  for (int c = 0; c < rd.nchart(); ++c) p[rd.rho_off() + c] = rs.sym(1.2);
  p[rd.rho_off() + 1] = 0.8 + rs.uniform();
  return p;
}

// reduced chart point extended by a generic quaternion fiber coordinate
inline Vec big_point(const qk::ReducedData& rd, rng::Stream& rs) {
  Vec p(rd.dim() + 4);
  p.head(rd.dim()) = red_point(rd, rs);
  p[rd.dim()] = 1.0 + 0.3 * rs.sym(1);
  for (int b = 1; b < 4; ++b) p[rd.dim() + b] = rs.sym(0.6);
  return p;
}

// base point of the homogeneous chart with z^0 kept away from the degenerate
// locus
inline cmap::CPoint cmap_point(int m, rng::Stream& rs) {
  Vec xs(3 * m);
  for (int c = 0; c < 3 * m; ++c) xs[c] = rs.sym(1.0);
  xs[1] += 2.0;
  return cmap::from_stack(m, xs);
}

inline Vec cmap_stack(const cmap::CPoint& pt, const Vec& psi) {
  int m = int(pt.x.size());
  Vec p(4 * m);
  for (int I = 0; I < m; ++I) {
    p[3 * I] = pt.x[I];
    p[3 * I + 1] = 2 * pt.z[I].real();
    p[3 * I + 2] = 2 * pt.z[I].imag();
  }
  p.tail(m) = psi;
  return p;
}

inline void run_verify_gh(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  Eigen::Vector3d center(0, 0, 0);
  if (cfg.input.contains("center")) {
    const json& c = cfg.input.at("center");
    if (!c.is_array() || c.size() != 3)
      throw std::invalid_argument("verify-gh: \"center\" must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) center[i] = c.at(i).get<double>();
  }
  gh::GHData g = gh::dirac_monopole({center[0], center[1], center[2]}, s);
  gh::HKTriple t = gh::hk_forms(g);
  excalc::MetricField met = gh::hk_metric(g);
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    Vec p(4);
    p.head(3) = center + Eigen::Vector3d(monopole_block(rs));
    p[3] = rs.sym(3);
    col.add("bogomolny-1", 1e-6, gh::bogomolny1_residual(g, g.base(p)));
    col.add("bogomolny-2", 1e-6, gh::bogomolny2_residual(g, p));
    col.add("closure", 1e-6, gh::closure_check(t, p, s));
    col.add("algebraic", 1e-8, gh::algebraic_check(t, met, p));
    col.add("coframe", 1e-8, gh::quat_forms_check(g, p));
  }
}

// closed form of the reduction of the three-center family; the default data
// for the reduce-qk subcommand, and the source of gauge-fixed lifted data
inline qk::ReducedData rd_three_center(DerivScheme s) {
  qk::ReducedData rd;
  rd.n = 1;
  rd.scheme = s;
  rd.U = [](const Vec& rho) {
    Eigen::Vector3d r0(1, 0, 0), r1(rho[0], rho[1], 0);
    double rs = (r0 + r1).norm();
    Mat u(2, 2);
    u(0, 0) = 0.5 + 0.5 / rs;
    u(0, 1) = u(1, 0) = 0.5 / rs;
    u(1, 1) = 0.5 / r1.norm() + 0.5 / rs;
    return u;
  };
  rd.A = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
  return rd;
}

inline void run_verify_cone(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  gh::GHData tc = cone::three_center_higgs(s);
  auto pot = [](const Vec& y) {
    return y.head(3).norm() + y.segment(3, 3).norm() + (y.head(3) + y.segment(3, 3)).norm();
  };
  cone::ConePotential cp{2, pot, s};
  gh::GHData mono = gh::dirac_monopole({0, 0, 0}, s);
  gh::GHData g2 = gh::direct_sum(mono, mono);
  // an off-center monopole solves the field equations but not the cone
  // constraints, so it exercises the identities that need no symmetry
  gh::GHData off = gh::dirac_monopole({0, 0, 0.8}, s);
  // the azimuthal monopole gauge is not gauge-fixed; the contraction
  // conditions are graded on the gauge-fixed lift of the reduced three-center
  // data instead
  gh::GHData fixed = qk::lift_data(rd_three_center(s));
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    Vec p8 = two_center_point(rs);
    Vec x = p8.head(6);
    col.add("higgs-cone", 1e-6, cone::hkc_higgs_residual(tc, x));
    col.add("potential-match", 1e-10, std::abs(cone::hk_potential(tc, x) - pot(x)));
    col.add("potential-constraints", 1e-6, cone::potential_constraints(cp, x));
    col.add("potential-round-trip", 1e-6,
            (cone::potential_to_higgs(cp, x) - tc.U(x)).cwiseAbs().maxCoeff());
    col.add("cone-criterion", 1e-6, cone::cone_criterion_residual(g2, p8));
    col.add("generator-algebra", 1e-6, cone::generator_algebra_check(g2, p8));
    quatmath::Quaternion qq{1.0 + 0.3 * rs.sym(1), rs.sym(0.6), rs.sym(0.6), rs.sym(0.6)};
    Vec rho(2);
    rho << rs.sym(1.2), 0.8 + rs.uniform();
    Vec pf(8);
    pf.head(6) = qk::detail::stack(imhp::embed(1, rho, qq));
    pf[6] = rs.sym(1);
    pf[7] = rs.sym(1);
    col.add("gauge-fix", 1e-6, cone::gauge_fix_residual(fixed, pf));
    // the c-term identities stack several difference quotients of the
    // connection, so the exclusion zone around the center is wider here
    Vec blk(3);
    do {
      blk = monopole_block(rs);
    } while (blk.norm() < 1.0 || (blk[2] < 0.2 && std::hypot(blk[0], blk[1]) < 0.5));
    Vec q(4);
    q.head(3) = blk + Vec(Eigen::Vector3d(0, 0, 0.8));
    q[3] = rs.sym(3);
    col.add("c-identities", 1e-6, cone::c_identities_residual(off, q));
    col.add("cone-identity", 1e-6, cone::cone_identity_residual(off, q));
  }
}

inline void run_reduce_qk(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  qk::ReducedData rd;
  gh::GHData src;
  if (cfg.input.contains("prepotential")) {
    cmap::Prepotential P = cmap::prepotential_from_json(cfg.input.at("prepotential"), s);
    rd = cmap::reduce_cmap(P);
    src = cmap::gh_data(P);
  } else {
    rd = rd_three_center(s);
    src = cone::three_center_higgs(s);
  }
  int n = rd.n;
  auto Ured = qk::reduce_higgs(src, n);
  auto Ared = qk::reduce_connection(src, n);
  qk::QKStructure st = qk::qk_structure(rd);
  gh::GHData lift = qk::lift_data(rd);
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    Vec p = red_point(rd, rs);
    Vec rho = rd.rho(p);
    col.add("reduce-higgs", 1e-8, (Ured(rho) - rd.U(rho)).cwiseAbs().maxCoeff());
    col.add("reduce-connection", 1e-8, (Ared(rho) - rd.A(rho)).cwiseAbs().maxCoeff());
    col.add("red-bogomolny-1", 1e-6, qk::red_bogo1_residual(rd, rho));
    col.add("red-bogomolny-2", 1e-6, qk::red_bogo2_residual(rd, rho));
    col.add("einstein", 1e-6, qk::einstein_residual(st, p, s));
    double mm = 0;
    for (int I = 0; I <= n; ++I) mm = std::max(mm, qk::moment_map_residual(st, rd, I, p));
    col.add("moment-map", 1e-6, mm);
    Vec pbig = big_point(rd, rs);
    col.add("swann", 1e-6, qk::swann_consistency(lift, rd, pbig));
    col.add("moment-lift", 1e-8, qk::moment_lift_check(rd, pbig));
  }
}

inline cp4d::CPPotential cp_from_input(const json& in, DerivScheme s) {
  std::string name = in.value("potential", std::string("linear-combo"));
  if (name == "rho1") return cp4d::rho1_potential(s);
  if (name == "rho2sq") return cp4d::rho2sq_potential(s);
  if (name == "one") return cp4d::one_potential(s);
  if (name == "linear-combo")
    return cp4d::linear_combo_potential(in.value("a", 2.0), in.value("b", 3.0), s);
  throw std::invalid_argument("cp4d: unknown potential \"" + name + "\"");
}

inline void run_cp4d(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  cp4d::CPPotential cp = cp_from_input(cfg.input, s);
  qk::ReducedData rd = cp4d::reduced_data(cp);
  qk::QKStructure st = qk::qk_structure(rd);
  cp4d::CPStructure direct = cp4d::cp_metric(cp);
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    Vec p(4);
    p[0] = rs.sym(2);
    p[1] = rs.sym(2);
    p[2] = 0.4 + 1.2 * rs.uniform();
    p[3] = 0.4 + 1.2 * rs.uniform();
    double r1 = p[2], r2 = p[3];
    col.add("constraint", 1e-8, cp4d::constraint_residual(cp, r1, r2));
    col.add("eigenfunction", 1e-8, cp4d::eigenfunction_residual(cp, r1, r2));
    col.add("metric-match", 1e-8, (direct.sg.comp(p) - st.sg.comp(p)).cwiseAbs().maxCoeff());
    double fm = 0;
    for (int i = 0; i < 3; ++i)
      fm = std::max(fm, excalc::form_dist(direct.som[i], st.som[i], p));
    col.add("forms-match", 1e-8, fm);
    col.add("einstein", 1e-6, qk::einstein_residual(st, p, s));
    Vec rho = rd.rho(p);
    col.add("red-bogomolny-1", 1e-6, qk::red_bogo1_residual(rd, rho));
    col.add("red-bogomolny-2", 1e-6, qk::red_bogo2_residual(rd, rho));
  }
}

inline void run_cmap(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  // the config may be the prepotential itself or wrap it under "prepotential";
  // with no config the simplest one-field quadratic family is verified
  json pj = cfg.input.contains("prepotential") ? cfg.input.at("prepotential") : cfg.input;
  if (!pj.contains("family")) pj = {{"family", "quadratic"}, {"C", {{{0.0, 1.0}}}}};
  cmap::Prepotential P = cmap::prepotential_from_json(pj, s);
  int n = P.n, m = n + 1;
  gh::GHData g = cmap::gh_data(P);
  qk::ReducedData rd = cmap::reduce_cmap(P);
  qk::QKStructure st = qk::qk_structure(rd);
  cmap::FSData fs = cmap::fs_assemble(P);
  cmap::Heisenberg down = cmap::downstairs_generators(n);
  std::vector<Vec> sig_pts;
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    // stay away from the strata where the Higgs field is steep or the scale
    // function degenerates: central differences are meaningless there
    cmap::CPoint pt = cmap_point(m, rs);
    cmap::HiggsData hd = cmap::higgs_matrix(P, pt);
    while (std::abs(hd.R) < 0.3 || hd.U.cwiseAbs().maxCoeff() > 8) {
      pt = cmap_point(m, rs);
      hd = cmap::higgs_matrix(P, pt);
    }
    cmap::CVec e(n);
    for (int A = 0; A < n; ++A) e[A] = cmap::cplx(rs.sym(1) + 1.5, rs.sym(1));
    col.add("homogeneity", 1e-8, cmap::homogeneity_residual(P, e));
    double idw = 0;
    for (const auto& [nm, v] : cmap::identity_suite(P, pt)) idw = std::max(idw, v);
    col.add("identity-suite", 1e-6, idw);
    col.add("contour", 1e-8, std::abs(cmap::L_contour(P, pt) - cmap::L_closed(P, pt)));
    Vec psi(m);
    for (int I = 0; I < m; ++I) psi[I] = rs.sym(1);
    Vec p = cmap_stack(pt, psi);
    // the field equations are graded relative to the local Higgs scale, since
    // difference noise grows with the magnitude of the data
    double uscale = std::max(1.0, hd.U.cwiseAbs().maxCoeff());
    col.add("bogomolny-1", 1e-6, gh::bogomolny1_residual(g, g.base(p)) / uscale);
    col.add("bogomolny-2", 1e-6, gh::bogomolny2_residual(g, p) / uscale);
    col.add("gauge-fix", 1e-6, cone::gauge_fix_residual(g, p));
    col.add("higgs-cone", 1e-6, cone::hkc_higgs_residual(g, g.base(p)) / uscale);
    col.add("shift-0", 1e-8, cmap::shift0_residual(P, pt, psi));

    Vec pr = red_point(rd, rs);
    while (std::abs(cmap::fs_R(P, rd.rho(pr))) < 0.3) pr = red_point(rd, rs);
    Vec rho = rd.rho(pr);
    col.add("red-bogomolny-1", 1e-6, qk::red_bogo1_residual(rd, rho));
    col.add("red-bogomolny-2", 1e-6, qk::red_bogo2_residual(rd, rho));
    col.add("higgs-inverse", 1e-8, cmap::higgs_inverse_residual(P, rho));
    col.add("torus-inverse", 1e-8, cmap::torus_inverse_residual(P, rho));
    Mat ga = fs.sg.comp(pr), gb = st.sg.comp(pr);
    col.add("fs-match", 1e-8,
            (ga - gb).cwiseAbs().maxCoeff() / std::max(1.0, gb.cwiseAbs().maxCoeff()));
    col.add("einstein", 1e-6, qk::einstein_residual(st, pr, s));
    double mm = 0;
    for (int I = 0; I <= n; ++I) mm = std::max(mm, qk::moment_map_residual(st, rd, I, pr));
    col.add("moment-map", 1e-6, mm);
    // relative to the metric scale, which grows quickly for steep families
    double gscale = std::max(1.0, gb.cwiseAbs().maxCoeff());
    double kw = 0;
    auto kill = [&](const excalc::VectorField& X) {
      kw = std::max(kw,
                    excalc::lie_metric(X, st.sg, s).comp(pr).cwiseAbs().maxCoeff() / gscale);
    };
    for (const auto& X : down.Q) kill(X);
    for (const auto& X : down.Pf) kill(X);
    kill(down.I);
    kill(down.W);
    col.add("killing", 1e-6, kw);

    // holomorphic chart point on the image of the transform variables, so the
    // invariance check stays on the solvable branch
    cmap::Shifts sh = cmap::shifts_and_coords(P, pt, psi);
    Vec ph(4 * m);
    for (int I = 0; I < m; ++I) {
      ph[2 * I] = pt.z[I].real();
      ph[2 * I + 1] = pt.z[I].imag();
      ph[2 * m + 2 * I] = sh.u[I].real();
      ph[2 * m + 2 * I + 1] = sh.u[I].imag();
    }
    col.add("heisenberg", 1e-8, cmap::heisenberg_algebra_residual(n, ph, s));
    col.add("heisenberg-invariance", 1e-6,
            cmap::heisenberg_invariance_residual(P, ph, pt.x));
    col.add("dual-symplectic", 1e-8, cmap::dualization_symplectic_residual(n, ph, s));
    // definiteness is a statement about the negative branch of the scale
    // function, so only those samples are graded
    if (cmap::fs_R(P, rho) < 0) sig_pts.push_back(pr);
  }
  if (!sig_pts.empty()) {
    cmap::SignatureReport sig = cmap::signature_check(fs.sg, sig_pts);
    col.add("signature", 0.5, sig.definite ? 0.0 : 1.0);
  }
}

inline void run_legendre(const RunConfig& cfg, Collector& col) {
  DerivScheme s;
  s.h = cfg.h;
  std::string name = cfg.input.value("potential", std::string("monopole"));
  legendre::LPotential lp;
  bool cone_type = false;
  if (name == "monopole") {
    lp = legendre::monopole_L(s);
    cone_type = true;
  } else if (name == "quadratic") {
    Mat a;
    if (cfg.input.contains("a")) {
      const json& ja = cfg.input.at("a");
      int na = int(ja.size());
      a = Mat(na, na);
      for (int i = 0; i < na; ++i) {
        if (!ja.at(i).is_array() || int(ja.at(i).size()) != na)
          throw std::invalid_argument("legendre: \"a\" must be a square matrix");
        for (int j = 0; j < na; ++j) a(i, j) = ja.at(i).at(j).get<double>();
      }
      if ((a - a.transpose()).cwiseAbs().maxCoeff() > 0)
        throw std::invalid_argument("legendre: \"a\" must be symmetric");
    } else {
      a = Mat(2, 2);
      a << 1.5, 0.4, 0.4, 0.9;
    }
    lp = legendre::quadratic_L(a, s);
  } else {
    throw std::invalid_argument("legendre: unknown potential \"" + name + "\"");
  }
  gh::GHData g = legendre::gh_data(lp);
  int m = lp.m;
  for (int k = 0; k < cfg.samples; ++k) {
    rng::Stream rs = stream(cfg.seed, k);
    legendre::CVec z(m);
    Vec x(m);
    for (int I = 0; I < m; ++I) {
      z[I] = legendre::cplx(rs.sym(1), rs.sym(1));
      x[I] = rs.sym(1.2);
    }
    z[0] += 1.5;  // keeps the radial potential away from its center
    col.add("constraints", 1e-6, legendre::constraints_residual(lp, z, x));
    if (cone_type) col.add("cone-scaling", 1e-6, legendre::hkc_residual(lp, z, x));
    Vec p(4 * m);
    for (int I = 0; I < m; ++I) {
      p[3 * I] = x[I];
      p[3 * I + 1] = 2 * z[I].real();
      p[3 * I + 2] = 2 * z[I].imag();
      p[3 * m + I] = rs.sym(1);
    }
    col.add("bogomolny-1", 1e-6, gh::bogomolny1_residual(g, g.base(p)));
    col.add("bogomolny-2", 1e-6, gh::bogomolny2_residual(g, p));
    Vec psi = p.tail(m);
    legendre::CVec u = legendre::u_coords(lp, psi, Vec(Vec::Zero(m)), z, x);
    legendre::LegendreResult res = legendre::transform(lp, z, u);
    col.add("transform-round-trip", 1e-8, (res.x - x).cwiseAbs().maxCoeff());
    if (cone_type) {
      col.add("transform-potential", 1e-8,
              std::abs(res.kappa - cone::hk_potential(g, g.base(p))));
      std::vector<std::function<legendre::cplx(const Vec&)>> us;
      for (int I = 0; I < m; ++I)
        us.push_back([lp, m, I](const Vec& q) {
          legendre::CVec zz;
          Vec xx;
          legendre::split_base(m, q.head(3 * m), zz, xx);
          return legendre::cplx(q[3 * m + I], 0.5 * legendre::eval_Lx(lp, zz, xx)[I]);
        });
      col.add("gauge-kernel", 1e-6, legendre::gauge_kernel_residual(g, us, p));
    }
  }
}

}  // namespace detail

inline Report run(const RunConfig& cfg) {
  if (cfg.samples < 1) throw std::invalid_argument("cli: samples must be at least 1");
  if (!(cfg.h > 0)) throw std::invalid_argument("cli: the difference step must be positive");
  if (!cfg.input.is_object())
    throw std::invalid_argument("cli: the config must be a JSON object");
  detail::Collector col(cfg.tolerances);
  if (cfg.subcommand == "verify-gh")
    detail::run_verify_gh(cfg, col);
  else if (cfg.subcommand == "verify-cone")
    detail::run_verify_cone(cfg, col);
  else if (cfg.subcommand == "reduce-qk")
    detail::run_reduce_qk(cfg, col);
  else if (cfg.subcommand == "cp4d")
    detail::run_cp4d(cfg, col);
  else if (cfg.subcommand == "cmap")
    detail::run_cmap(cfg, col);
  else if (cfg.subcommand == "legendre")
    detail::run_legendre(cfg, col);
  else
    throw std::invalid_argument("cli: unknown subcommand \"" + cfg.subcommand + "\"");
  Report rep;
  rep.config = cfg;
  rep.checks = col.grade();
  for (const auto& [name, c] : rep.checks) rep.pass = rep.pass && c.pass;
  // an override naming a check this subcommand never ran is a config mistake,
  // not a silent no-op
  for (const auto& [name, v] : cfg.tolerances)
    if (!rep.checks.count(name))
      throw std::invalid_argument("cli: no check named \"" + name + "\"");
  return rep;
}

// sorted-key JSON view of the report; timing deliberately stays out so the
// serialization is a pure function of (config, samples, seed, h)
inline json report_json(const Report& rep) {
  json checks = json::array();
  for (const auto& [name, c] : rep.checks)
    checks.push_back({{"max_residual", c.max_residual},
                      {"name", name},
                      {"pass", c.pass},
                      {"tolerance", c.tolerance}});
  json meta = {{"h", rep.config.h},
               {"samples", rep.config.samples},
               {"seed", rep.config.seed},
               {"subcommand", rep.config.subcommand}};
  return json{{"checks", checks}, {"metadata", meta}, {"pass", rep.pass}};
}

}  // namespace cli

#endif
