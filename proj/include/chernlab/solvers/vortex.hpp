#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/solvers/krylov.hpp"

namespace chernlab {

enum class LinearSolver { Automatic, Dense, Krylov };

struct NewtonOptions {
  int max_iter = 50;
  double damping = 0.5;    // backtracking factor
  double tol_res = 1e-10;  // sup-norm residual target
  LinearSolver linear_solver = LinearSolver::Automatic;
  double krylov_tol = 1e-11;
  int dense_limit = 32;    // Automatic uses dense factorisation up to this n

  void validate() const {
    require(max_iter >= 1, ErrorKind::InvalidArgument, "max_iter must be >= 1");
    require(tol_res > 0.0, ErrorKind::InvalidArgument, "tol_res must be positive");
    require(damping > 0.0 && damping < 1.0, ErrorKind::InvalidArgument,
            "damping must lie in (0,1)");
  }

  bool use_dense(int n) const {
    if (linear_solver == LinearSolver::Dense) return true;
    if (linear_solver == LinearSolver::Krylov) return false;
    return n <= dense_limit;
  }
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
};

/// Dense matrix of Delta_f acting on grid samples.
inline Eigen::MatrixXd dense_laplacian(const TorusGrid& g) {
  const Eigen::Index N = g.size();
  Eigen::MatrixXd D(N, N);
  Field e = Field::Zero(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    e(j) = 1.0;
    D.col(j) = g.laplacian(e).matrix();
    e(j) = 0.0;
  }
  return D;
}

/// Residual of the vortex equation rho0 + Delta_f psi + ((S - tau)/2) w with
/// w the omega_Sigma density (the eta density at alpha = 0).
inline Field vortex_residual(const Field& psi, const Field& w, const CymConfig& cfg,
                             const SectionData& sec) {
  return sec.rho0 + sec.grid.laplacian(psi) + 0.5 * (section_norm(sec, psi) - cfg.tau) * w;
}

/// Damped Newton for the vortex equation at alpha = 0, where omega_Sigma is
/// the eta form. Solutions are unique, so the starting guess only affects
/// the iteration count.
inline Field solve_vortex(const SectionData& sec, const CymConfig& cfg, const NewtonOptions& opts,
                          std::optional<Field> initial = std::nullopt,
                          SolveReport* report = nullptr) {
  opts.validate();
  const TorusGrid& g = sec.grid;
  cfg.validate(g);
  require(cfg.degree_feasible(), ErrorKind::InfeasibleDegree,
          "need 0 < 4 pi d < tau vol for a vortex solution");
  require(sec.s0.maxCoeff() > 0.0, ErrorKind::InfeasibleDegree,
          "section vanishes identically: integrating the equation forces 4 pi d = tau vol");

  const Field& w = cfg.f_eta;
  Field psi = initial ? *initial : g.constant(0.0);
  g.check_field(psi, "initial psi");

  const bool dense = opts.use_dense(g.n());
  Eigen::MatrixXd D;
  if (dense) D = dense_laplacian(g);

  auto rms = [](const Field& r) { return std::sqrt(r.square().mean()); };
  Field res = vortex_residual(psi, w, cfg, sec);
  int it = 0;
  for (; res.abs().maxCoeff() > opts.tol_res; ++it) {
    if (it >= opts.max_iter)
      throw Error(ErrorKind::NoConvergence, "vortex Newton stalled at residual " +
                                                std::to_string(res.abs().maxCoeff()));
    const Field c = 0.5 * section_norm(sec, psi) * w;
    Eigen::VectorXd step;
    if (dense) {
      Eigen::MatrixXd J = D;
      J.diagonal() -= c.matrix();
      step = J.partialPivLu().solve(-res.matrix());
    } else {
      const double cbar = std::max(c.mean(), 1e-3);
      LinearOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        Field a = v.array();
        return (g.laplacian(a) - c * a).matrix();
      };
      LinearOp P = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return (-g.solve_shifted(v.array(), cbar)).matrix();
      };
      step = Eigen::VectorXd::Zero(g.size());
      gmres(A, P, -res.matrix(), step, opts.krylov_tol);
    }
    // backtracking on the rms residual
    const double r0 = rms(res);
    double t = 1.0;
    Field trial, trial_res;
    for (;;) {
      trial = psi + t * step.array();
      trial_res = vortex_residual(trial, w, cfg, sec);
      if (trial_res.allFinite() && rms(trial_res) < (1.0 - 1e-4 * t) * r0) break;
      t *= opts.damping;
      if (t < 1e-8)
        throw Error(ErrorKind::NoConvergence, "vortex line search failed");
    }
    psi = std::move(trial);
    res = std::move(trial_res);
  }

  const double smax = section_norm(sec, psi).maxCoeff();
  require(smax <= cfg.tau * (1.0 + cfg.tol.ineq), ErrorKind::BoundViolated,
          "solution violates |phi|^2_h <= tau: max = " + std::to_string(smax));
  if (report) *report = {it, res.abs().maxCoeff()};
  return psi;
}

/// Zero-mean psi2 from the second equation, given a vortex solution psi and
/// the omega_Sigma density w.
inline Field solve_psi2(const Field& psi, const CymConfig& cfg, const SectionData& sec,
                        const Field& w) {
  const TorusGrid& g = sec.grid;
  const Field s = section_norm(sec, psi);
  const Field source = -(cfg.tau / 2.0 - s / 4.0 - 2.0 * cfg.lambda()) * w;
  return g.invert_laplacian(source, cfg.tol_mean());
}

inline Field solve_psi2(const Field& psi, const CymConfig& cfg, const SectionData& sec) {
  return solve_psi2(psi, cfg, sec, cfg.f_eta);
}

}  // namespace chernlab
