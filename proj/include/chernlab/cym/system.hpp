#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "chernlab/errors.hpp"
#include "chernlab/grid/torus_grid.hpp"
#include "chernlab/theta/theta_bundle.hpp"

// Reduced SU(2)-invariant Calabi-Yang-Mills system on the torus factor.
// Every (1,1)-form on the torus is stored as a density against the background
// area form f, and every (2,2)-form on torus x P^1 as a density against
// f ^ omega_FS after dividing out the factor 8/tau of eta = (8/tau) f_eta f ^ omega_FS.

namespace chernlab {

struct Tolerances {
  double newton = 1e-10;  // residual sup-norm
  double ineq = 1e-8;     // slack on pointwise inequalities
  double mean = -1.0;     // absolute; negative means 1e-10 * vol
};

inline double lambda_of(double tau, int d, double vol) {
  require(vol > 0.0, ErrorKind::InvalidArgument, "volume must be positive");
  return tau / 8.0 + d * std::numbers::pi / (2.0 * vol);
}

struct CymConfig {
  double tau = 2.0;
  double alpha = 0.0;
  int d = 1;
  double vol = 4.0 * std::numbers::pi * std::numbers::pi;
  Field f_eta;  // eta-datum density against f, positive with mean 1
  Tolerances tol;

  double lambda() const { return lambda_of(tau, d, vol); }
  double tol_mean() const { return tol.mean < 0.0 ? 1e-10 * vol : tol.mean; }

  /// 0 < 4 pi d < tau vol, the degree window of the existence theorem.
  bool degree_feasible() const {
    return d > 0 && 4.0 * std::numbers::pi * d < tau * vol;
  }

  void validate(const TorusGrid& g) const {
    require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
    require(alpha >= 0.0, ErrorKind::InvalidArgument, "alpha must be nonnegative");
    require(std::abs(vol - g.vol()) <= 1e-12 * vol, ErrorKind::GridMismatch,
            "config volume differs from grid volume");
    g.check_field(f_eta, "eta density");
    require((f_eta > 0.0).all(), ErrorKind::InvalidArgument, "eta density must be positive");
    require(std::abs(g.integrate(f_eta) - vol) <= 1e-10 * vol, ErrorKind::MassMismatch,
            "eta density must integrate to the volume");
  }
};

/// Config with the flat eta datum f_eta = 1.
inline CymConfig flat_config(const TorusGrid& g, double tau, double alpha, int d) {
  CymConfig c;
  c.tau = tau;
  c.alpha = alpha;
  c.d = d;
  c.vol = g.vol();
  c.f_eta = g.constant(1.0);
  return c;
}

/// Unknowns of the reduced system: h = h0 e^{-psi}, f2 = e^{-psi2},
/// omega_Sigma = f + sqrt(-1) d dbar phiK.
struct CymState {
  Field psi;
  Field psi2;
  Field phiK;
};

inline Field section_norm(const SectionData& sec, const Field& psi) {
  return sec.s0 * (-psi).exp();
}

inline Field omega_density(const TorusGrid& g, const Field& phiK) {
  return 1.0 + g.laplacian(phiK);
}

struct Residuals {
  Field r1;
  Field r2;
  Field r3;

  double sup_norm() const {
    return std::max({r1.abs().maxCoeff(), r2.abs().maxCoeff(), r3.abs().maxCoeff()});
  }
};

inline void check_grids(const CymState& st, const CymConfig& cfg, const SectionData& sec) {
  const TorusGrid& g = sec.grid;
  g.check_field(st.psi, "psi");
  g.check_field(st.psi2, "psi2");
  g.check_field(st.phiK, "phiK");
  g.check_field(cfg.f_eta, "eta density");
  g.check_field(sec.s0, "S0");
  g.check_field(sec.rho0, "rho0");
}

inline Residuals residuals(const CymState& st, const CymConfig& cfg, const SectionData& sec) {
  check_grids(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  const double lam = cfg.lambda();
  const double coupling = cfg.alpha / std::pow(2.0 * std::numbers::pi, 2);
  const Field s = section_norm(sec, st.psi);
  const Field w = omega_density(g, st.phiK);
  const Field lap_psi2 = g.laplacian(st.psi2);
  Residuals r;
  r.r1 = sec.rho0 + g.laplacian(st.psi) + lap_psi2 + (s / 4.0 - 2.0 * lam) * w;
  r.r2 = lap_psi2 + (cfg.tau / 2.0 - s / 4.0 - 2.0 * lam) * w;
  r.r3 = 8.0 * (w - cfg.f_eta) + coupling * (-g.laplacian(s) + 2.0 * cfg.tau * lap_psi2);
  return r;
}

/// Kahler potential solving the third equation exactly for given (psi, psi2).
inline Field eliminate_phiK(const Field& psi, const Field& psi2, const CymConfig& cfg,
                            const SectionData& sec) {
  const TorusGrid& g = sec.grid;
  g.check_field(psi, "psi");
  g.check_field(psi2, "psi2");
  const Field eta_part = g.invert_laplacian(cfg.f_eta - 1.0, cfg.tol_mean());
  const double c = cfg.alpha / (8.0 * std::pow(2.0 * std::numbers::pi, 2));
  const Field coupled = c * (section_norm(sec, psi) - 2.0 * cfg.tau * psi2);
  return eta_part + g.zero_mean(coupled);
}

/// (integral of S omega_Sigma, its required value vol (2 tau - 8 lambda)).
inline std::pair<double, double> constraint_integral(const CymState& st, const CymConfig& cfg,
                                                     const SectionData& sec) {
  const TorusGrid& g = sec.grid;
  const double lhs = g.integrate(section_norm(sec, st.psi) * omega_density(g, st.phiK));
  return {lhs, cfg.vol * (2.0 * cfg.tau - 8.0 * cfg.lambda())};
}

/// 8 + (2 alpha tau / (2pi)^2)(2 lambda - tau/2); positivity is the
/// hypothesis under which the continuity path is open.
inline double satisfaction_value(const CymConfig& cfg) {
  return 8.0 + (2.0 * cfg.alpha * cfg.tau / std::pow(2.0 * std::numbers::pi, 2)) *
                   (2.0 * cfg.lambda() - cfg.tau / 2.0);
}

/// Smallest alpha at which satisfaction_value reaches zero; infinity when
/// 2 lambda >= tau/2.
inline double satisfaction_threshold(const CymConfig& cfg) {
  const double gap = cfg.tau / 2.0 - 2.0 * cfg.lambda();
  if (gap <= 0.0) return std::numeric_limits<double>::infinity();
  return 8.0 * std::pow(2.0 * std::numbers::pi, 2) / (2.0 * cfg.tau * gap);
}

/// Determinant of the principal symbol of the linearised system, pointwise.
inline Field ellipticity_determinant(const CymState& st, const CymConfig& cfg,
                                     const SectionData& sec) {
  const double fp2 = std::pow(2.0 * std::numbers::pi, 2);
  const Field s = section_norm(sec, st.psi);
  return 8.0 + (2.0 * cfg.alpha * cfg.tau / fp2) * (s / 4.0 + 2.0 * cfg.lambda() - cfg.tau / 2.0) +
         (cfg.alpha / (2.0 * fp2)) * s * (cfg.tau - s);
}

/// omega_Sigma [4 + (tau alpha/(2pi)^2)(2 lambda - tau/2 + S/4)] - 4 f_eta
///   - (alpha/(2 (2pi)^2)) Delta_f S,
/// which vanishes whenever the second and third equations hold.
inline Field omega_recovery_defect(const CymState& st, const CymConfig& cfg,
                                   const SectionData& sec) {
  check_grids(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  const double fp2 = std::pow(2.0 * std::numbers::pi, 2);
  const Field s = section_norm(sec, st.psi);
  const Field w = omega_density(g, st.phiK);
  return w * (4.0 + (cfg.tau * cfg.alpha / fp2) * (2.0 * cfg.lambda() - cfg.tau / 2.0 + s / 4.0)) -
         4.0 * cfg.f_eta - (cfg.alpha / (2.0 * fp2)) * g.laplacian(s);
}

}  // namespace chernlab
