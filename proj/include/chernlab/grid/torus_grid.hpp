#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chernlab/errors.hpp"
#include "chernlab/grid/fft.hpp"

namespace chernlab {

using Field = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;

/// Modular parameter of a flat torus C / (Z + tau Z).
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(std::complex<double> tau) : tau_(tau) {
    require(tau.imag() > 0.0, ErrorKind::InvalidArgument,
            "lattice parameter must have positive imaginary part");
  }

  std::complex<double> tau() const { return tau_; }
  double re() const { return tau_.real(); }
  double im() const { return tau_.imag(); }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  std::complex<double> tau_{0.0, 1.0};
};

/// Uniform n x n sampling of a flat complex torus, z = x + tau*y with
/// (x, y) in [0,1)^2. Samples are row-major over (x, y): index i*n + j
/// holds the point (i/n, j/n).
///
/// The background area form is f = vol dx^dy. The Laplacian is the density
/// Delta_f u defined by sqrt(-1) d dbar u = (Delta_f u) f.
class TorusGrid {
 public:
  TorusGrid(int n, Lattice lattice, double vol)
      : n_(n), lattice_(lattice), vol_(vol), plan_({n, n}) {
    require(n >= 8 && n % 2 == 0, ErrorKind::InvalidArgument,
            "torus grid needs an even point count >= 8");
    require(vol > 0.0, ErrorKind::InvalidArgument, "torus area must be positive");
    build_symbols();
  }

  int n() const { return n_; }
  Eigen::Index size() const { return Eigen::Index(n_) * n_; }
  const Lattice& lattice() const { return lattice_; }
  double vol() const { return vol_; }

  /// Euclidean area of the fundamental domain in the z-plane (Im tau).
  double euclidean_area() const { return lattice_.im(); }

  Eigen::Index index(int i, int j) const { return Eigen::Index(i) * n_ + j; }
  double x(int i) const { return double(i) / n_; }
  double y(int j) const { return double(j) / n_; }
  std::complex<double> z(int i, int j) const { return x(i) + lattice_.tau() * y(j); }

  bool same_as(const TorusGrid& o) const {
    return n_ == o.n_ && lattice_ == o.lattice_ && vol_ == o.vol_;
  }

  void check_field(const Field& u, const char* what) const {
    require(u.size() == size(), ErrorKind::GridMismatch,
            std::string(what) + " has " + std::to_string(u.size()) + " samples, grid has " +
                std::to_string(size()));
  }

  template <class Fn>
  Field sample(Fn&& fn) const {
    Field u(size());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) u(index(i, j)) = fn(x(i), y(j));
    return u;
  }

  Field constant(double c) const { return Field::Constant(size(), c); }

  /// Trapezoidal quadrature of u against f; spectrally exact on periodic data.
  double integrate(const Field& u) const {
    check_field(u, "integrand");
    return u.sum() * vol_ / double(size());
  }

  double mean(const Field& u) const { return integrate(u) / vol_; }

  Field zero_mean(const Field& u) const { return u - mean(u); }

  Field laplacian(const Field& u) const { return apply_real_symbol(u, lap_symbol_); }

  /// Zero-mean solution of laplacian(u) = w. Throws NonZeroMean when the
  /// right-hand side is inconsistent; tol_mean < 0 selects 1e-10 * vol.
  Field invert_laplacian(const Field& w, double tol_mean = -1.0) const {
    check_field(w, "poisson right-hand side");
    const double tol = tol_mean < 0.0 ? 1e-10 * vol_ : tol_mean;
    const double mass = integrate(w);
    require(std::abs(mass) <= tol, ErrorKind::NonZeroMean,
            "integral of right-hand side is " + std::to_string(mass));
    return apply_real_symbol(w, inv_lap_symbol_);
  }

  /// (-Delta_f + shift)^{-1} with shift > 0, used as a preconditioner.
  Field solve_shifted(const Field& w, double shift) const {
    Field sym = 1.0 / (shift - lap_symbol_);
    return apply_real_symbol(w, sym);
  }

  /// Complex derivative d/dz of a real field.
  ComplexField d_z(const Field& u) const {
    check_field(u, "field");
    ComplexField hat = forward(u.cast<std::complex<double>>());
    hat *= dz_symbol_;
    return backward(hat);
  }

  /// Fourier symbol of Delta_f, indexed like the samples.
  const Field& laplacian_symbol() const { return lap_symbol_; }

  ComplexField forward(const ComplexField& u) const {
    ComplexField out(size());
    plan_.forward(u.data(), out.data());
    return out;
  }
  ComplexField backward(const ComplexField& u) const {
    ComplexField out(size());
    plan_.backward(u.data(), out.data());
    return out;
  }

  Field apply_real_symbol(const Field& u, const Field& symbol) const {
    check_field(u, "field");
    ComplexField hat = forward(u.cast<std::complex<double>>());
    hat *= symbol.cast<std::complex<double>>();
    return backward(hat).real();
  }

 private:
  void build_symbols() {
    const double pi = std::numbers::pi;
    const double a = lattice_.re();
    const double b = lattice_.im();
    // frame scale: sqrt(-1) dz^dzbar = (1/s2) f
    const double s2 = vol_ / (2.0 * b);
    lap_symbol_.resize(size());
    inv_lap_symbol_.resize(size());
    dz_symbol_.resize(size());
    for (int i = 0; i < n_; ++i) {
      const double k = detail::wavenumber(i, n_);
      const double ko = detail::odd_wavenumber(i, n_);
      for (int j = 0; j < n_; ++j) {
        const double l = detail::wavenumber(j, n_);
        const double lo = detail::odd_wavenumber(j, n_);
        // d_z d_zbar: pure second derivatives keep the Nyquist bin, the
        // mixed x-y term uses odd wavenumbers so the symbol stays even.
        const double dzdzbar =
            -pi * pi * (k * k + (l * l - 2.0 * a * ko * lo + a * a * k * k) / (b * b));
        const Eigen::Index idx = index(i, j);
        lap_symbol_(idx) = dzdzbar / s2;
        inv_lap_symbol_(idx) = (i == 0 && j == 0) ? 0.0 : 1.0 / lap_symbol_(idx);
        dz_symbol_(idx) = std::complex<double>(pi * (lo - a * ko) / b, pi * ko);
      }
    }
  }

  int n_;
  Lattice lattice_;
  double vol_;
  detail::FftPlan plan_;
  Field lap_symbol_;
  Field inv_lap_symbol_;
  ComplexField dz_symbol_;
};

}  // namespace chernlab
