#pragma once

#include <string>
#include <vector>

#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/solvers/adjoint.hpp"
#include "chernlab/solvers/corrector.hpp"
#include "chernlab/solvers/vortex.hpp"

namespace chernlab {

struct Diagnostics {
  double min_w_sigma = 0.0;
  double max_s_minus_tau = 0.0;
  double min_determinant = 0.0;
  double sigma_min = 0.0;
  double residual = 0.0;
  double constraint_gap = 0.0;
  double omega_defect = 0.0;
  int newton_iterations = 0;
};

inline Diagnostics diagnose(const CymState& st, const CymConfig& cfg, const SectionData& sec,
                            bool with_sigma = true) {
  const TorusGrid& g = sec.grid;
  Diagnostics d;
  d.min_w_sigma = omega_density(g, st.phiK).minCoeff();
  d.max_s_minus_tau = section_norm(sec, st.psi).maxCoeff() - cfg.tau;
  d.min_determinant = ellipticity_determinant(st, cfg, sec).minCoeff();
  d.residual = residuals(st, cfg, sec).sup_norm();
  const auto [lhs, target] = constraint_integral(st, cfg, sec);
  d.constraint_gap = std::abs(lhs - target);
  d.omega_defect = omega_recovery_defect(st, cfg, sec).abs().maxCoeff();
  if (with_sigma) d.sigma_min = adjoint_min_singular_value(st, cfg, sec);
  return d;
}

struct ContinuationRecord {
  double alpha = 0.0;
  CymState state;
  Diagnostics diagnostics;
};

enum class StopReason { Completed, SatisfactionGate, NotElliptic, PositivityLost, Diverged };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Completed: return "completed";
    case StopReason::SatisfactionGate: return "satisfaction-gate";
    case StopReason::NotElliptic: return "not-elliptic";
    case StopReason::PositivityLost: return "positivity-lost";
    case StopReason::Diverged: return "diverged";
  }
  return "unknown";
}

struct ContinuationResult {
  std::vector<ContinuationRecord> records;
  StopReason stop = StopReason::Completed;
  double stopped_at = 0.0;  // first alpha not reached, when stop != Completed
  std::string message;

  double last_alpha() const { return records.empty() ? 0.0 : records.back().alpha; }
};

struct ContinuationOptions {
  NewtonOptions newton;
  bool compute_sigma = true;
};

/// Zeroth-order predictor / Newton corrector along an increasing list of
/// couplings starting at 0. Partial paths are a normal outcome: the march
/// ends at the first coupling where a gate fails or Newton diverges.
inline ContinuationResult continue_in_alpha(const CymConfig& cfg, const SectionData& sec,
                                            const std::vector<double>& alphas,
                                            const ContinuationOptions& opts = {}) {
  require(!alphas.empty() && alphas.front() == 0.0, ErrorKind::InvalidArgument,
          "continuation must start at alpha = 0");
  for (std::size_t i = 1; i < alphas.size(); ++i)
    require(alphas[i] > alphas[i - 1], ErrorKind::InvalidArgument,
            "continuation couplings must increase");

  ContinuationResult out;
  CymConfig c = cfg;
  c.alpha = 0.0;
  SolveReport rep;
  CymState st = solve_alpha_zero(c, sec, opts.newton, &rep);

  auto accept = [&](double alpha, const CymState& s, int iters) -> bool {
    Diagnostics d = diagnose(s, c, sec, opts.compute_sigma);
    d.newton_iterations = iters;
    if (d.residual > opts.newton.tol_res || d.min_w_sigma <= 0.0) return false;
    out.records.push_back({alpha, s, d});
    return true;
  };

  if (!accept(0.0, st, rep.iterations)) {
    out.stop = StopReason::Diverged;
    out.stopped_at = 0.0;
    out.message = "alpha = 0 solution rejected";
    return out;
  }

  for (std::size_t i = 1; i < alphas.size(); ++i) {
    c.alpha = alphas[i];
    out.stopped_at = c.alpha;
    if (satisfaction_value(c) <= 0.0) {
      out.stop = StopReason::SatisfactionGate;
      out.message = "satisfaction condition fails";
      return out;
    }
    if (ellipticity_determinant(st, c, sec).minCoeff() <= 0.0) {
      out.stop = StopReason::NotElliptic;
      out.message = "principal symbol determinant not positive";
      return out;
    }
    try {
      CymState next = newton_correct(st, c, sec, opts.newton, &rep);
      if (!accept(c.alpha, next, rep.iterations)) {
        out.stop = StopReason::Diverged;
        out.message = "corrected state rejected";
        return out;
      }
      st = std::move(next);
    } catch (const Error& e) {
      out.message = e.what();
      switch (e.kind()) {
        case ErrorKind::NotElliptic: out.stop = StopReason::NotElliptic; break;
        case ErrorKind::PositivityLost: out.stop = StopReason::PositivityLost; break;
        default: out.stop = StopReason::Diverged; break;
      }
      return out;
    }
  }
  out.stop = StopReason::Completed;
  out.stopped_at = 0.0;
  return out;
}

}  // namespace chernlab
