#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"

namespace chernlab {

/// Reduced adjoint-kernel operator acting on q = u - v after eliminating w:
///   A q = 1/2 Delta q - (S/4) w_Sigma q - kappa (S - tau) Delta((S - tau) q / 4),
/// kappa = alpha / ((2pi)^2 K), K = 8 + 2 pi d alpha tau / ((2pi)^2 vol).
/// The additive constant of the second adjoint equation drops under Delta.
class AdjointOperator {
 public:
  AdjointOperator(const CymState& st, const CymConfig& cfg, const SectionData& sec)
      : grid_(sec.grid) {
    const double fp2 = std::pow(2.0 * std::numbers::pi, 2);
    const double K = 8.0 + 2.0 * std::numbers::pi * cfg.d * cfg.alpha * cfg.tau / (fp2 * cfg.vol);
    kappa_ = cfg.alpha / (fp2 * K);
    const Field s = section_norm(sec, st.psi);
    zeroth_ = (s / 4.0) * omega_density(sec.grid, st.phiK);
    gap_ = s - cfg.tau;
  }

  Field apply(const Field& q) const {
    return 0.5 * grid_.laplacian(q) - zeroth_ * q - kappa_ * gap_ * grid_.laplacian(gap_ * q / 4.0);
  }

  Field apply_transpose(const Field& q) const {
    return 0.5 * grid_.laplacian(q) - zeroth_ * q -
           kappa_ * (gap_ / 4.0) * grid_.laplacian(gap_ * q);
  }

  double kappa() const { return kappa_; }

 private:
  TorusGrid grid_;
  double kappa_ = 0.0;
  Field zeroth_;
  Field gap_;
};

namespace detail {

// Orthonormal basis of the zero-mean subspace: columns 1..N-1 of the
// Householder reflector sending e_0 to the normalised constant vector.
inline Eigen::MatrixXd zero_mean_basis(Eigen::Index N) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(N, 1.0 / std::sqrt(double(N)));
  v(0) -= 1.0;
  v.normalize();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(N, N) - 2.0 * v * v.transpose();
  return Q.rightCols(N - 1);
}

}  // namespace detail

/// Smallest singular value of the adjoint operator restricted to zero-mean q,
/// by inverse iteration on the normal equations. A positive value certifies
/// that the discrete adjoint has only the trivial kernel.
inline double adjoint_min_singular_value(const CymState& st, const CymConfig& cfg,
                                         const SectionData& sec, int dense_limit = 32) {
  const double res = residuals(st, cfg, sec).sup_norm();
  require(res <= cfg.tol.newton * 10.0, ErrorKind::NotConverged,
          "state residual " + std::to_string(res) + " exceeds tolerance");
  const AdjointOperator A(st, cfg, sec);
  const TorusGrid& g = sec.grid;
  const Eigen::Index N = g.size();

  if (g.n() <= dense_limit) {
    Eigen::MatrixXd M(N, N);
    Field e = Field::Zero(N);
    for (Eigen::Index j = 0; j < N; ++j) {
      e(j) = 1.0;
      M.col(j) = A.apply(e).matrix();
      e(j) = 0.0;
    }
    const Eigen::MatrixXd B = M * detail::zero_mean_basis(N);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(N - 1).triangularView<Eigen::Upper>();
    const auto Ru = R.triangularView<Eigen::Upper>();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(N - 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += 1e-3 * std::sin(double(i));
    x.normalize();
    double mu = 0.0;
    for (int it = 0; it < 2000; ++it) {
      // y = (R^T R)^{-1} x
      Eigen::VectorXd y = Ru.transpose().solve(x);
      y = Ru.solve(y);
      const double mu_new = x.dot(y);
      x = y.normalized();
      if (it > 5 && std::abs(mu_new - mu) <= 1e-15 * std::abs(mu_new)) {
        mu = mu_new;
        break;
      }
      mu = mu_new;
    }
    // refine with the Rayleigh quotient of R^T R
    const double rq = (R * x).squaredNorm();
    return std::sqrt(std::min(rq, 1.0 / mu));
  }

  // Matrix-free: inverse iteration with conjugate gradients on P0 A^T A P0.
  auto normal = [&](const Field& q) { return g.zero_mean(A.apply_transpose(A.apply(q))); };
  Field x = g.zero_mean(g.sample([](double a, double b) {
    return std::cos(2.0 * std::numbers::pi * a) + 0.3 * std::sin(2.0 * std::numbers::pi * b);
  }));
  x /= std::sqrt(x.square().sum());
  double sigma2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    Field y = Field::Zero(N);
    Field r = x - normal(y);
    Field p = r;
    double rr = r.square().sum();
    const double target = 1e-24 * x.square().sum();
    for (int k = 0; k < 20 * int(N) && rr > target; ++k) {
      const Field Ap = normal(p);
      const double a = rr / (p * Ap).sum();
      y += a * p;
      r -= a * Ap;
      const double rr_new = r.square().sum();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    y = g.zero_mean(y);
    x = y / std::sqrt(y.square().sum());
    const double s2 = (x * normal(x)).sum();
    if (it > 3 && std::abs(s2 - sigma2) <= 1e-13 * s2) {
      sigma2 = s2;
      break;
    }
    sigma2 = s2;
  }
  return std::sqrt(sigma2);
}

}  // namespace chernlab
