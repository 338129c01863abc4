#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chernlab/chern/conformal.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/solvers/krylov.hpp"
#include "chernlab/solvers/vortex.hpp"

namespace chernlab {

/// r(r+1)/2 (ddc phi + base)^2 = rhs on the bi-torus.
struct MAProblem {
  int r = 2;
  Form11Field base;
  Field rhs;
};

inline double ma_coefficient(int r) { return 0.5 * r * (r + 1); }

/// Left-hand side r(r+1)/2 (base + ddc phi)^2.
inline Field ma_operator(const MAProblem& prob, const BiTorusGrid& g, const Field& phi) {
  return ma_coefficient(prob.r) * wedge_square(prob.base + g.ddbar(phi));
}

/// Builds the Monge-Ampere problem whose solution phi makes the Segre form
/// equal eta. Gates: Kobayashi-Lubke bound, rhs > 0, matching masses.
inline MAProblem assemble_ma(const ConformalChernData& data, const BiTorusGrid& g) {
  data.check(g);
  require((data.eta > 0.0).all(), ErrorKind::InvalidArgument, "eta must be positive");
  // roundoff allowance for data that satisfy the bound with equality
  const double kl = kobayashi_lubke_excess(data);
  const double slack = 1e-12 * wedge_square(data.c1_0).abs().maxCoeff();
  require(kl <= slack, ErrorKind::InvalidArgument,
          "Kobayashi-Lubke bound fails by " + std::to_string(kl));
  const int r = data.r;
  MAProblem prob;
  prob.r = r;
  prob.base = (1.0 / r) * data.c1_0;
  require(min_eigenvalue(prob.base).minCoeff() > 0.0, ErrorKind::InvalidArgument,
          "c1_0 must be positive definite");
  prob.rhs = data.eta - kobayashi_lubke_density(r, data.c1_0, data.c2_0) / (2.0 * r);
  const double rmin = prob.rhs.minCoeff();
  require(rmin > 0.0, ErrorKind::RhsNotPositive,
          "Monge-Ampere right-hand side has minimum " + std::to_string(rmin));
  const double lhs_mass = g.integrate(ma_coefficient(r) * wedge_square(prob.base));
  const double rhs_mass = g.integrate(prob.rhs);
  require(std::abs(lhs_mass - rhs_mass) <= 1e-8 * std::abs(lhs_mass), ErrorKind::MassMismatch,
          "masses differ: " + std::to_string(lhs_mass) + " vs " + std::to_string(rhs_mass));
  return prob;
}

struct MASolution {
  Field phi;
  int iterations = 0;
  double defect = 0.0;  // sup |MA(phi) - rhs| / sup rhs
  std::vector<double> defect_history;
};

/// Damped Newton on log(MA(phi)) - log(rhs) with the mean of phi as a
/// bordering unknown; linear steps by GMRES preconditioned with the
/// constant-coefficient operator of the averaged base form.
inline MASolution solve_ma(const MAProblem& prob, const BiTorusGrid& g, const NewtonOptions& opts,
                           const Field* initial = nullptr) {
  opts.validate();
  g.check_form(prob.base, "base form");
  g.check_field(prob.rhs, "rhs");
  require((prob.rhs > 0.0).all(), ErrorKind::RhsNotPositive, "rhs must be positive");
  const Eigen::Index N = g.size();
  const Field log_rhs = prob.rhs.log();
  const double coef = ma_coefficient(prob.r);

  MASolution sol;
  sol.phi = initial ? *initial : Field::Zero(N);
  g.check_field(sol.phi, "initial phi");

  auto kahler_form = [&](const Field& phi) { return prob.base + g.ddbar(phi); };
  auto equation = [&](const Field& phi, const Form11Field& B) -> Field {
    return (coef * wedge_square(B)).log() - log_rhs + g.mean(phi);
  };

  // preconditioner symbol from the averaged form
  const double m11 = prob.base.b11.mean(), m22 = prob.base.b22.mean();
  const std::complex<double> m12 = prob.base.b12.mean();
  const double mdet = 2.0 * (m11 * m22 - std::norm(m12));
  Field psym = 2.0 *
               (m11 * g.symbol22() + m22 * g.symbol11() -
                2.0 * (m12 * g.symbol12().conjugate()).real()) /
               mdet;
  psym(0) = 1.0;
  const Field pinv = 1.0 / psym;
  auto apply_symbol = [&](const Field& u, const Field& sym) -> Field {
    ComplexField hat = g.forward(u.cast<std::complex<double>>());
    hat *= sym.cast<std::complex<double>>();
    return g.backward(hat).real();
  };

  Form11Field B = kahler_form(sol.phi);
  require(min_eigenvalue(B).minCoeff() > 0.0, ErrorKind::PositivityLost,
          "initial form is not positive definite");
  Field E = equation(sol.phi, B);
  // relative to sup rhs: the discrete mass of MA(phi) drifts at roundoff-times-Nyquist
  // level, which the bordering absorbs as a tiny mean of phi
  const double rhs_scale = prob.rhs.maxCoeff();
  auto defect_of = [&](const Form11Field& BB) {
    return (coef * wedge_square(BB) - prob.rhs).abs().maxCoeff() / rhs_scale;
  };
  sol.defect = defect_of(B);
  sol.defect_history.push_back(sol.defect);

  for (; sol.defect > opts.tol_res || std::abs(g.mean(sol.phi)) > opts.tol_res;
       ++sol.iterations) {
    if (sol.iterations >= opts.max_iter)
      throw Error(ErrorKind::NoConvergence,
                  "Monge-Ampere Newton stalled at defect " + std::to_string(sol.defect));
    const Field wsB = wedge_square(B);
    LinearOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      const Field a = v.array();
      return (2.0 * wedge(B, g.ddbar(a)) / wsB + g.mean(a)).matrix();
    };
    LinearOp P = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return apply_symbol(v.array(), pinv).matrix();
    };
    Eigen::VectorXd step = Eigen::VectorXd::Zero(N);
    gmres(A, P, -E.matrix(), step, opts.krylov_tol, 60, 2000);

    const double e0 = std::sqrt(E.square().mean());
    double t = 1.0;
    bool positive_seen = false;
    for (;;) {
      const Field trial = sol.phi + t * step.array();
      const Form11Field Bt = kahler_form(trial);
      if (min_eigenvalue(Bt).minCoeff() > 0.0) {
        positive_seen = true;
        const Field Et = equation(trial, Bt);
        if (Et.allFinite() && std::sqrt(Et.square().mean()) < (1.0 - 1e-4 * t) * e0) {
          sol.phi = trial;
          B = Bt;
          E = Et;
          break;
        }
      }
      t *= opts.damping;
      if (t < 1e-8) {
        if (!positive_seen)
          throw Error(ErrorKind::PositivityLost,
                      "line search cannot keep the Kahler form positive");
        throw Error(ErrorKind::NoConvergence, "Monge-Ampere line search failed");
      }
    }
    sol.defect = defect_of(B);
    sol.defect_history.push_back(sol.defect);
  }
  sol.phi -= g.mean(sol.phi);
  return sol;
}

struct PositivityReport {
  double min_c1_eigenvalue = 0.0;
  double min_c2 = 0.0;
  double min_segre2 = 0.0;
  bool certified = false;
};

inline PositivityReport certify_positivity(const ConformalChernData& data, const BiTorusGrid& g,
                                           const Field& phi) {
  const ConformalChernForms forms = conformal_chern(data, g, phi);
  PositivityReport rep;
  rep.min_c1_eigenvalue = min_eigenvalue(forms.c1).minCoeff();
  rep.min_c2 = forms.c2.minCoeff();
  rep.min_segre2 = forms.segre2.minCoeff();
  rep.certified = rep.min_c1_eigenvalue > 0.0 && rep.min_c2 > 0.0 && rep.min_segre2 > 0.0;
  return rep;
}

}  // namespace chernlab
