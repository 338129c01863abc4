#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace chernlab {

using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning: solves A x = b starting from x.
/// Convergence is declared when ||b - A x|| <= rtol ||b||.
inline KrylovResult gmres(const LinearOp& A, const LinearOp& precond, const Eigen::VectorXd& b,
                          Eigen::VectorXd& x, double rtol, int restart = 60,
                          int max_iter = 600) {
  KrylovResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  while (res.iterations < max_iter) {
    Eigen::VectorXd r = b - A(x);
    double beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= rtol) {
      res.converged = true;
      return res;
    }
    const int m = restart;
    std::vector<Eigen::VectorXd> V;
    std::vector<Eigen::VectorXd> Z;
    V.reserve(m + 1);
    Z.reserve(m);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = beta;
    V.push_back(r / beta);
    int k = 0;
    for (; k < m && res.iterations < max_iter; ++k) {
      ++res.iterations;
      Z.push_back(precond(V[k]));
      Eigen::VectorXd w = A(Z[k]);
      // modified Gram-Schmidt, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= k; ++i) {
          const double h = V[i].dot(w);
          H(i, k) += h;
          w -= h * V[i];
        }
      H(k + 1, k) = w.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
        H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs(k) = denom == 0.0 ? 1.0 : H(k, k) / denom;
      sn(k) = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
      const double hk1 = H(k + 1, k);
      H(k, k) = cs(k) * H(k, k) + sn(k) * hk1;
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      res.relative_residual = std::abs(g(k + 1)) / bnorm;
      if (hk1 > 0.0 && res.relative_residual > rtol) V.push_back(w / hk1);
      if (res.relative_residual <= rtol || hk1 == 0.0) {
        ++k;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y(i) * Z[i];
  }
  const Eigen::VectorXd r = b - A(x);
  res.relative_residual = r.norm() / bnorm;
  res.converged = res.relative_residual <= rtol;
  return res;
}

}  // namespace chernlab
