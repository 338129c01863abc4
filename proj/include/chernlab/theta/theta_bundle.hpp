#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "chernlab/errors.hpp"
#include "chernlab/grid/torus_grid.hpp"

namespace chernlab {

/// Truncated Jacobi theta series sum_{|n|<=trunc} exp(i pi n^2 tau + 2 pi i n z).
inline std::complex<double> theta_value(std::complex<double> z, const Lattice& lat, int trunc) {
  require(trunc >= 1, ErrorKind::InvalidArgument, "theta truncation must be >= 1");
  const std::complex<double> I(0.0, 1.0);
  const double pi = std::numbers::pi;
  std::complex<double> sum = 1.0;
  for (int n = 1; n <= trunc; ++n) {
    const std::complex<double> q = std::exp(I * pi * double(n * n) * lat.tau());
    sum += q * (std::exp(2.0 * pi * I * double(n) * z) + std::exp(-2.0 * pi * I * double(n) * z));
  }
  return sum;
}

/// d/dz of the truncated theta series.
inline std::complex<double> theta_derivative(std::complex<double> z, const Lattice& lat,
                                             int trunc) {
  const std::complex<double> I(0.0, 1.0);
  const double pi = std::numbers::pi;
  std::complex<double> sum = 0.0;
  for (int n = 1; n <= trunc; ++n) {
    const std::complex<double> q = std::exp(I * pi * double(n * n) * lat.tau());
    sum += q * 2.0 * pi * I * double(n) *
           (std::exp(2.0 * pi * I * double(n) * z) - std::exp(-2.0 * pi * I * double(n) * z));
  }
  return sum;
}

/// Smallest truncation whose dropped terms are below exp(-40) relative to 1
/// at height Im z, i.e. pi Im(tau) (n^2 - 2 n |Im z|/Im tau) >= 40.
inline int theta_truncation(std::complex<double> z, const Lattice& lat) {
  const double b = lat.im();
  const double r = std::abs(z.imag()) / b;
  return int(std::ceil(r + std::sqrt(r * r + 40.0 / (std::numbers::pi * b)))) + 1;
}

/// Degree-d line bundle on the torus with background metric
/// h0 = exp(-2 pi d (Im z)^2 / Im tau) and the section
/// phi(z) = prod_k theta(z - w_k), w_k = z_k - (1 + tau)/2, which vanishes at z_k.
class ThetaBundle {
 public:
  /// Zero points default to the lattice centre shifted along the real axis by k/d.
  /// The imaginary parts are forced to sum to d Im(tau)/2 by moving the last
  /// zero vertically; that keeps |phi|^2 h0 doubly periodic.
  ThetaBundle(int degree, Lattice lattice, std::vector<std::complex<double>> zeros = {})
      : degree_(degree), lattice_(lattice), zeros_(std::move(zeros)) {
    require(degree >= 1, ErrorKind::InvalidArgument, "line bundle degree must be >= 1");
    const std::complex<double> centre = 0.5 * (1.0 + lattice_.tau());
    if (zeros_.empty()) {
      for (int k = 0; k < degree; ++k) zeros_.push_back(centre + double(k) / degree);
    }
    require(int(zeros_.size()) == degree, ErrorKind::InvalidArgument,
            "need exactly one zero point per degree");
    double im_sum = 0.0;
    for (auto z : zeros_) im_sum += z.imag();
    zeros_.back() += std::complex<double>(0.0, 0.5 * degree * lattice_.im() - im_sum);
  }

  int degree() const { return degree_; }
  const Lattice& lattice() const { return lattice_; }
  const std::vector<std::complex<double>>& zero_points() const { return zeros_; }

  std::complex<double> section(std::complex<double> z) const {
    std::complex<double> p = 1.0;
    for (auto w : shifts()) p *= theta_value(z - w, lattice_, theta_truncation(z - w, lattice_));
    return p;
  }

  std::complex<double> section_derivative(std::complex<double> z) const {
    const auto ws = shifts();
    std::complex<double> total = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      std::complex<double> term = 1.0;
      for (std::size_t m = 0; m < ws.size(); ++m) {
        const auto u = z - ws[m];
        const int t = theta_truncation(u, lattice_);
        term *= (m == k) ? theta_derivative(u, lattice_, t) : theta_value(u, lattice_, t);
      }
      total += term;
    }
    return total;
  }

  /// Background metric weight h0(z).
  double metric_weight(std::complex<double> z) const {
    return std::exp(-2.0 * std::numbers::pi * degree_ * z.imag() * z.imag() / lattice_.im());
  }

  /// |phi|^2_{h0} at an arbitrary point of the plane.
  double norm_squared(std::complex<double> z) const {
    return std::norm(section(z)) * metric_weight(z);
  }

 private:
  std::vector<std::complex<double>> shifts() const {
    const std::complex<double> centre = 0.5 * (1.0 + lattice_.tau());
    std::vector<std::complex<double>> ws;
    ws.reserve(zeros_.size());
    for (auto z : zeros_) ws.push_back(z - centre);
    return ws;
  }

  int degree_;
  Lattice lattice_;
  std::vector<std::complex<double>> zeros_;
};

/// Sampled section data: S0 = |phi|^2_{h0} and the curvature density
/// rho0 = sqrt(-1) Theta_{h0} / f. Synthetic data (no bundle) is allowed.
struct SectionData {
  TorusGrid grid;
  Field s0;
  Field rho0;
  int degree = 1;
  std::optional<ThetaBundle> bundle;
};

inline SectionData build_section(const ThetaBundle& bundle, const TorusGrid& grid) {
  require(bundle.lattice() == grid.lattice(), ErrorKind::LatticeMismatch,
          "bundle and grid use different lattices");
  Field s0(grid.size());
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j) s0(grid.index(i, j)) = bundle.norm_squared(grid.z(i, j));
  Field rho0 = grid.constant(2.0 * std::numbers::pi * bundle.degree() / grid.vol());
  return SectionData{grid, std::move(s0), std::move(rho0), bundle.degree(), bundle};
}

/// Synthetic section data with the flat background curvature 2 pi d / vol.
inline SectionData synthetic_section(const TorusGrid& grid, Field s0, int degree) {
  grid.check_field(s0, "S0");
  require((s0 >= 0.0).all(), ErrorKind::InvalidArgument, "S0 must be nonnegative");
  Field rho0 = grid.constant(2.0 * std::numbers::pi * degree / grid.vol());
  return SectionData{grid, std::move(s0), std::move(rho0), degree, std::nullopt};
}

/// G = Delta_f S + rho_h S with S = S0 e^{-psi}, rho_h = rho0 + Delta_f psi.
/// By the Bochner identity for |phi|^2_h this is the gradient density
/// |nabla^{1,0} phi|^2_h / f, hence nonnegative.
inline Field weitzenbock_defect(const SectionData& sec, const Field& psi) {
  const TorusGrid& g = sec.grid;
  g.check_field(psi, "psi");
  const Field s = sec.s0 * (-psi).exp();
  const Field rho = sec.rho0 + g.laplacian(psi);
  return g.laplacian(s) + rho * s;
}

/// The same density computed directly from the covariant derivative
/// nabla^{1,0} phi = phi' + phi (2 pi i d Im z / Im tau - d_z psi).
/// Needs the analytic bundle; independent of the Laplacian route.
inline Field gradient_density(const SectionData& sec, const Field& psi) {
  require(sec.bundle.has_value(), ErrorKind::InvalidArgument,
          "gradient density needs an analytic theta bundle");
  const TorusGrid& g = sec.grid;
  const ThetaBundle& bundle = *sec.bundle;
  const ComplexField dpsi = g.d_z(psi);
  const double b = g.lattice().im();
  const double pi = std::numbers::pi;
  const std::complex<double> I(0.0, 1.0);
  Field out(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const auto idx = g.index(i, j);
      const auto z = g.z(i, j);
      const auto phi = bundle.section(z);
      const auto nabla = bundle.section_derivative(z) +
                         phi * (2.0 * pi * I * double(bundle.degree()) * z.imag() / b - dpsi(idx));
      const double h = bundle.metric_weight(z) * std::exp(-psi(idx));
      out(idx) = (2.0 * b / g.vol()) * h * std::norm(nabla);
    }
  return out;
}

}  // namespace chernlab
