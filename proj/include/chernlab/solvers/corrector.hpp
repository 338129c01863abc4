#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/solvers/krylov.hpp"
#include "chernlab/solvers/vortex.hpp"

namespace chernlab {

/// Directional derivative DT(psi_dot, psi2_dot, phi_dot) of the three
/// residuals at a state.
inline Residuals apply_DT(const CymState& st, const CymConfig& cfg, const SectionData& sec,
                          const CymState& dot) {
  check_grids(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  g.check_field(dot.psi, "psi direction");
  g.check_field(dot.psi2, "psi2 direction");
  g.check_field(dot.phiK, "phiK direction");
  const double lam = cfg.lambda();
  const double coupling = cfg.alpha / std::pow(2.0 * std::numbers::pi, 2);
  const Field s = section_norm(sec, st.psi);
  const Field w = omega_density(g, st.phiK);
  const Field lap_psi2 = g.laplacian(dot.psi2);
  const Field lap_phi = g.laplacian(dot.phiK);
  const Field zeroth = (s / 4.0) * dot.psi * w;
  Residuals out;
  out.r1 = g.laplacian(dot.psi) + lap_psi2 - zeroth + (s / 4.0 - 2.0 * lam) * lap_phi;
  out.r2 = lap_psi2 + zeroth + (cfg.tau / 2.0 - s / 4.0 - 2.0 * lam) * lap_phi;
  out.r3 = 8.0 * lap_phi + coupling * (g.laplacian(s * dot.psi) + 2.0 * cfg.tau * lap_psi2);
  return out;
}

namespace detail {

// The corrector works on x = (psi, psi2) with phiK eliminated. The map is
// F(x) = (R1, R2 - mean R2 + mean psi2): the mean of psi2 only enters the
// last block, and mean R2 = -mean R1 identically, so F = 0 recovers the
// full system plus the zero-mean gauge and the integral constraint.
struct ReducedSystem {
  const CymConfig& cfg;
  const SectionData& sec;

  Eigen::Index n() const { return sec.grid.size(); }

  CymState expand(const Eigen::VectorXd& x) const {
    CymState st;
    st.psi = x.head(n()).array();
    st.psi2 = x.tail(n()).array();
    st.phiK = eliminate_phiK(st.psi, st.psi2, cfg, sec);
    return st;
  }

  Eigen::VectorXd pack(const Field& a, const Field& b) const {
    Eigen::VectorXd v(2 * n());
    v.head(n()) = a.matrix();
    v.tail(n()) = b.matrix();
    return v;
  }

  Eigen::VectorXd map(const CymState& st, const Residuals& r) const {
    const TorusGrid& g = sec.grid;
    return pack(r.r1, r.r2 - g.mean(r.r2) + g.mean(st.psi2));
  }

  Eigen::VectorXd jacobian_apply(const CymState& st, const Field& sn,
                                 const Eigen::VectorXd& v) const {
    const TorusGrid& g = sec.grid;
    CymState dot;
    dot.psi = v.head(n()).array();
    dot.psi2 = v.tail(n()).array();
    const double c = cfg.alpha / (8.0 * std::pow(2.0 * std::numbers::pi, 2));
    dot.phiK = g.zero_mean(c * (-sn * dot.psi - 2.0 * cfg.tau * dot.psi2));
    const Residuals r = apply_DT(st, cfg, sec, dot);
    return pack(r.r1, r.r2 - g.mean(r.r2) + g.mean(dot.psi2));
  }
};

}  // namespace detail

/// Newton corrector for the full system at cfg.alpha. Refuses to start
/// outside the ellipticity region and never returns a state violating
/// omega_Sigma > 0 or |phi|^2_h <= tau.
inline CymState newton_correct(const CymState& start, const CymConfig& cfg, const SectionData& sec,
                               const NewtonOptions& opts, SolveReport* report = nullptr) {
  opts.validate();
  const TorusGrid& g = sec.grid;
  cfg.validate(g);
  check_grids(start, cfg, sec);
  require(satisfaction_value(cfg) > 0.0, ErrorKind::NotElliptic,
          "alpha violates 8 + (2 alpha tau/(2pi)^2)(2 lambda - tau/2) > 0");
  require(ellipticity_determinant(start, cfg, sec).minCoeff() > 0.0, ErrorKind::NotElliptic,
          "principal symbol determinant is not positive");

  const detail::ReducedSystem sys{cfg, sec};
  Eigen::VectorXd x = sys.pack(start.psi, start.psi2);
  CymState st = sys.expand(x);
  Residuals r = residuals(st, cfg, sec);
  Eigen::VectorXd F = sys.map(st, r);

  const bool dense = opts.use_dense(g.n());
  Eigen::MatrixXd D;
  if (dense) D = dense_laplacian(g);
  const Eigen::Index N = g.size();

  auto sup = [&](const Residuals& rr, const Eigen::VectorXd& FF) {
    return std::max(rr.sup_norm(), FF.cwiseAbs().maxCoeff());
  };

  int it = 0;
  for (; sup(r, F) > opts.tol_res; ++it) {
    if (it >= opts.max_iter)
      throw Error(ErrorKind::NoConvergence,
                  "corrector stalled at residual " + std::to_string(sup(r, F)));
    const Field sn = section_norm(sec, st.psi);
    Eigen::VectorXd step = Eigen::VectorXd::Zero(2 * N);
    if (dense) {
      // columns through the same linearisation used matrix-free
      Eigen::MatrixXd J(2 * N, 2 * N);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * N);
      for (Eigen::Index j = 0; j < 2 * N; ++j) {
        e(j) = 1.0;
        J.col(j) = sys.jacobian_apply(st, sn, e);
        e(j) = 0.0;
      }
      step = J.partialPivLu().solve(-F);
    } else {
      const Field w = omega_density(g, st.phiK);
      const double cbar = std::max((sn * w).mean() / 4.0, 1e-3);
      LinearOp A = [&](const Eigen::VectorXd& v) { return sys.jacobian_apply(st, sn, v); };
      // block upper-triangular inverse of the Laplacian-dominated principal part
      LinearOp P = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        const Field r1 = v.head(N).array();
        const Field r2 = v.tail(N).array();
        const double m2 = g.mean(r2);
        Field p2 = g.apply_real_symbol(r2 - m2, g.laplacian_symbol().unaryExpr(
                                                    [](double s) { return s == 0.0 ? 0.0 : 1.0 / s; }));
        p2 += m2;
        const Field p1 = -g.solve_shifted(r1 - g.laplacian(p2), cbar);
        return sys.pack(p1, p2);
      };
      gmres(A, P, -F, step, opts.krylov_tol);
    }
    const double f0 = F.norm();
    double t = 1.0;
    for (;;) {
      const Eigen::VectorXd xt = x + t * step;
      CymState trial = sys.expand(xt);
      Residuals rt = residuals(trial, cfg, sec);
      Eigen::VectorXd Ft = sys.map(trial, rt);
      if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * t) * f0) {
        x = xt;
        st = std::move(trial);
        r = std::move(rt);
        F = std::move(Ft);
        break;
      }
      t *= opts.damping;
      if (t < 1e-8) throw Error(ErrorKind::NoConvergence, "corrector line search failed");
    }
  }

  const double wmin = omega_density(g, st.phiK).minCoeff();
  require(wmin > 0.0, ErrorKind::PositivityLost,
          "omega_Sigma not positive at accepted state: min = " + std::to_string(wmin));
  const double smax = section_norm(sec, st.psi).maxCoeff();
  require(smax <= cfg.tau * (1.0 + cfg.tol.ineq), ErrorKind::BoundViolated,
          "accepted state violates |phi|^2_h <= tau: max = " + std::to_string(smax));
  if (report) *report = {it, sup(r, F)};
  return st;
}

/// The alpha = 0 solution: vortex solve, psi2 recovery, Kahler potential.
inline CymState solve_alpha_zero(const CymConfig& cfg, const SectionData& sec,
                                 const NewtonOptions& opts, SolveReport* report = nullptr) {
  CymConfig c0 = cfg;
  c0.alpha = 0.0;
  CymState st;
  st.psi = solve_vortex(sec, c0, opts, std::nullopt, report);
  st.psi2 = solve_psi2(st.psi, c0, sec);
  st.phiK = eliminate_phiK(st.psi, st.psi2, c0, sec);
  return st;
}

}  // namespace chernlab
