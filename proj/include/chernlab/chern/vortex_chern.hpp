#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/theta/theta_bundle.hpp"

namespace chernlab {

/// Chern-Weil data of the rank-2 vortex bundle for an SU(2)-invariant metric.
/// ch2 is the coefficient of f ^ omega_FS; c1 splits into the torus part
/// (density against f) and the P^1 part (coefficient of omega_FS).
struct VortexChernForms {
  Field ch2_density;
  Field c1_density_sigma;
  Field c1_density_p1;
};

inline VortexChernForms ch2_form(const CymState& st, const CymConfig& cfg, const SectionData& sec) {
  check_grids(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  const double two_pi = 2.0 * std::numbers::pi;
  const Field s = section_norm(sec, st.psi);
  const Field lap_psi2 = g.laplacian(st.psi2);
  VortexChernForms out;
  out.ch2_density = (-g.laplacian(s) + 2.0 * cfg.tau * lap_psi2) / (cfg.tau * two_pi * two_pi);
  // tr Theta = Theta_{h1} + Theta_{g2}; both pick up d dbar psi2 on the torus
  out.c1_density_sigma = (sec.rho0 + g.laplacian(st.psi) + 2.0 * lap_psi2) / two_pi;
  // O(2) with the Fubini-Study metric: sqrt(-1) Theta = 2 omega_FS
  out.c1_density_p1 = g.constant(1.0 / std::numbers::pi);
  return out;
}

/// ch2 from the expanded block trace of the curvature,
///   (1/(tau (2pi)^2)) (rho_{h1} S - G + 2 tau Delta psi2 - S Delta psi2),
/// with G = |nabla^{1,0} phi|^2_h evaluated from the analytic section.
inline Field ch2_block_trace(const CymState& st, const CymConfig& cfg, const SectionData& sec) {
  check_grids(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  const double two_pi = 2.0 * std::numbers::pi;
  const Field s = section_norm(sec, st.psi);
  const Field lap_psi2 = g.laplacian(st.psi2);
  const Field rho_h1 = sec.rho0 + g.laplacian(st.psi) + lap_psi2;
  const Field grad = gradient_density(sec, st.psi);
  return (rho_h1 * s - grad + 2.0 * cfg.tau * lap_psi2 - s * lap_psi2) /
         (cfg.tau * two_pi * two_pi);
}

struct RepresentResult {
  Field f2;          // determinant-factor metric function
  Field log_f2;      // root w = ln f2 of S1 e^{-w} + 2 tau w = u + shift
  Field u;           // zero-mean potential of the volume mismatch
  double shift = 0.0;
  Field eta_reconstructed;  // omega density + (tau alpha / 8) ch2, against f
  double verification = 0.0;  // sup |Omega^2 + alpha ch2 - eta| in units of f ^ omega_FS
};

/// Increasing-branch root of S1 e^{-w} + 2 tau w = target, w > ln(S1/(2 tau)).
/// Newton from the right end of the bracket is monotone for this convex map.
inline double branch_root(double s1, double tau, double target) {
  const double hi = target / (2.0 * tau);
  if (s1 <= 0.0) return hi;
  const double lo = std::log(s1 / (2.0 * tau));
  require(s1 * std::exp(-lo) + 2.0 * tau * lo < target, ErrorKind::BranchFailure,
          "target below the branch minimum");
  double w = hi;
  for (int it = 0; it < 200; ++it) {
    const double e = s1 * std::exp(-w);
    const double step = (e + 2.0 * tau * w - target) / (2.0 * tau - e);
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) return w;
  }
  throw Error(ErrorKind::BranchFailure, "per-point root find did not converge");
}

/// Metric on the rank-2 bundle representing eta as Omega^2 + alpha ch2.
/// h1 = h0 e^{-h1_potential} is kept; only the determinant factor f2 is solved
/// for. omega is the density of omega_Sigma against f.
inline RepresentResult represent_ch2(const CymConfig& cfg, const SectionData& sec,
                                     const Field& h1_potential, const Field& omega) {
  const TorusGrid& g = sec.grid;
  require(cfg.alpha > 0.0, ErrorKind::InvalidArgument, "representability needs alpha > 0");
  g.check_field(h1_potential, "h1 potential");
  g.check_field(omega, "omega density");
  g.check_field(cfg.f_eta, "eta density");
  require((omega > 0.0).all(), ErrorKind::InvalidArgument, "omega must be positive");
  require((cfg.f_eta > 0.0).all(), ErrorKind::InvalidArgument, "eta must be positive");

  const double fp2 = std::pow(2.0 * std::numbers::pi, 2);
  RepresentResult out;
  out.u = g.invert_laplacian((8.0 * fp2 / cfg.alpha) * (omega - cfg.f_eta), cfg.tol_mean());

  const Field s1 = section_norm(sec, h1_potential);
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (s1(i) > 0.0)
      shift = std::max(shift, 2.0 * cfg.tau * (1.0 + std::log(s1(i) / (2.0 * cfg.tau))) - out.u(i));
  if (!std::isfinite(shift)) shift = (-out.u).maxCoeff();
  out.shift = shift + 1.0;

  out.log_f2.resize(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    out.log_f2(i) = branch_root(s1(i), cfg.tau, out.u(i) + out.shift);
  out.f2 = out.log_f2.exp();

  // H = h1 (+) f2 g_FS: |phi|^2_h = S1 / f2 and psi2 = -ln f2
  CymState st{h1_potential + out.log_f2, -out.log_f2, g.constant(0.0)};
  const Field ch2 = ch2_form(st, cfg, sec).ch2_density;
  out.eta_reconstructed = omega + (cfg.tau * cfg.alpha / 8.0) * ch2;
  out.verification =
      ((8.0 / cfg.tau) * (omega - cfg.f_eta) + cfg.alpha * ch2).abs().maxCoeff();
  return out;
}

}  // namespace chernlab
