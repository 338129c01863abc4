#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "chernlab/errors.hpp"
#include "chernlab/grid/fft.hpp"
#include "chernlab/grid/torus_grid.hpp"

namespace chernlab {

/// Hermitian-matrix-valued (1,1)-form on a product of two tori, written in
/// the frame e_j with sqrt(-1) e_j ^ conj(e_j) equal to the area form of
/// factor j:  beta = sqrt(-1) sum_{jk} b_{j kbar} e_j ^ conj(e_k).
struct Form11Field {
  Field b11;
  Field b22;
  ComplexField b12;
  ComplexField b21;

  static Form11Field zero(Eigen::Index size) {
    return {Field::Zero(size), Field::Zero(size), ComplexField::Zero(size),
            ComplexField::Zero(size)};
  }

  /// Constant form with the given hermitian matrix entries.
  static Form11Field constant(Eigen::Index size, double m11, double m22,
                              std::complex<double> m12) {
    return {Field::Constant(size, m11), Field::Constant(size, m22),
            ComplexField::Constant(size, m12), ComplexField::Constant(size, std::conj(m12))};
  }

  Eigen::Index size() const { return b11.size(); }

  /// Largest pointwise deviation from hermitian symmetry.
  double hermitian_defect() const { return (b21 - b12.conjugate()).abs().maxCoeff(); }

  Form11Field& operator+=(const Form11Field& o) {
    b11 += o.b11;
    b22 += o.b22;
    b12 += o.b12;
    b21 += o.b21;
    return *this;
  }
  friend Form11Field operator+(Form11Field a, const Form11Field& b) { return a += b; }
  friend Form11Field operator-(Form11Field a, const Form11Field& b) {
    a.b11 -= b.b11;
    a.b22 -= b.b22;
    a.b12 -= b.b12;
    a.b21 -= b.b21;
    return a;
  }
  friend Form11Field operator*(double s, Form11Field a) {
    a.b11 *= s;
    a.b22 *= s;
    a.b12 *= s;
    a.b21 *= s;
    return a;
  }
};

/// Density of alpha ^ beta against the product volume form f1 ^ f2.
inline Field wedge(const Form11Field& a, const Form11Field& b) {
  return a.b11 * b.b22 + a.b22 * b.b11 - (a.b12 * b.b21).real() - (a.b21 * b.b12).real();
}

/// Density of beta ^ beta, i.e. 2 (b11 b22 - b12 b21).
inline Field wedge_square(const Form11Field& b) {
  return 2.0 * (b.b11 * b.b22 - (b.b12 * b.b21).real());
}

/// Smallest eigenvalue of the pointwise hermitian matrix.
inline Field min_eigenvalue(const Form11Field& b) {
  const Field tr = b.b11 + b.b22;
  const Field disc = ((b.b11 - b.b22).square() + 4.0 * b.b12.abs2()).sqrt();
  return 0.5 * (tr - disc);
}

/// Product of two flat tori, sampled n1 x n1 x n2 x n2. Index order is
/// (x1, y1, x2, y2), row-major with x1 slowest. Each factor carries the
/// area form f_j = area_j dx_j ^ dy_j; the volume form is f1 ^ f2.
class BiTorusGrid {
 public:
  BiTorusGrid(int n1, Lattice l1, double area1, int n2, Lattice l2, double area2)
      : n_{n1, n2}, lat_{l1, l2}, area_{area1, area2}, plan_({n1, n1, n2, n2}) {
    for (int f = 0; f < 2; ++f) {
      require(n_[f] >= 4 && n_[f] % 2 == 0, ErrorKind::InvalidArgument,
              "bi-torus factors need an even point count >= 4");
      require(area_[f] > 0.0, ErrorKind::InvalidArgument, "factor areas must be positive");
    }
    build_symbols();
  }

  /// Square lattices, equal resolution, each factor of the given area.
  static BiTorusGrid square(int n, double area = 1.0) {
    return BiTorusGrid(n, Lattice({0.0, 1.0}), area, n, Lattice({0.0, 1.0}), area);
  }

  int n(int factor) const { return n_[factor]; }
  const Lattice& lattice(int factor) const { return lat_[factor]; }
  double area(int factor) const { return area_[factor]; }
  double vol() const { return area_[0] * area_[1]; }
  Eigen::Index size() const {
    return Eigen::Index(n_[0]) * n_[0] * n_[1] * n_[1];
  }

  Eigen::Index index(int i1, int j1, int i2, int j2) const {
    return ((Eigen::Index(i1) * n_[0] + j1) * n_[1] + i2) * n_[1] + j2;
  }

  bool same_as(const BiTorusGrid& o) const {
    return n_ == o.n_ && lat_ == o.lat_ && area_ == o.area_;
  }

  void check_field(const Field& u, const char* what) const {
    require(u.size() == size(), ErrorKind::GridMismatch,
            std::string(what) + " does not match the bi-torus grid");
  }
  void check_form(const Form11Field& b, const char* what) const {
    require(b.b11.size() == size() && b.b22.size() == size() && b.b12.size() == size() &&
                b.b21.size() == size(),
            ErrorKind::GridMismatch, std::string(what) + " does not match the bi-torus grid");
  }

  /// Samples fn(x1, y1, x2, y2) on the grid.
  template <class Fn>
  Field sample(Fn&& fn) const {
    Field u(size());
    for (int i1 = 0; i1 < n_[0]; ++i1)
      for (int j1 = 0; j1 < n_[0]; ++j1)
        for (int i2 = 0; i2 < n_[1]; ++i2)
          for (int j2 = 0; j2 < n_[1]; ++j2)
            u(index(i1, j1, i2, j2)) = fn(double(i1) / n_[0], double(j1) / n_[0],
                                          double(i2) / n_[1], double(j2) / n_[1]);
    return u;
  }

  double integrate(const Field& u) const {
    check_field(u, "integrand");
    return u.sum() * vol() / double(size());
  }
  double mean(const Field& u) const { return integrate(u) / vol(); }

  /// (sqrt(-1)/2pi) d dbar phi in the normalised frame.
  Form11Field ddbar(const Field& phi) const {
    check_field(phi, "potential");
    ComplexField hat = forward(phi.cast<std::complex<double>>());
    Form11Field out;
    out.b11 = backward(hat * s11_.cast<std::complex<double>>()).real();
    out.b22 = backward(hat * s22_.cast<std::complex<double>>()).real();
    out.b12 = backward(hat * s12_);
    out.b21 = out.b12.conjugate();
    return out;
  }

  /// Fourier symbols of the four ddbar components (b21 symbol is conj(s12(-k))).
  const Field& symbol11() const { return s11_; }
  const Field& symbol22() const { return s22_; }
  const ComplexField& symbol12() const { return s12_; }

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

 private:
  void build_symbols() {
    const double pi = std::numbers::pi;
    const Eigen::Index N = size();
    s11_.resize(N);
    s22_.resize(N);
    s12_.resize(N);
    // per-factor: d_z symbol sigma and d_z d_zbar symbol, frame scale s_j^2 = area/(2 Im tau)
    auto factor_symbols = [&](int f, int i, int j, std::complex<double>& sigma, double& lap) {
      const int n = n_[f];
      const double a = lat_[f].re();
      const double b = lat_[f].im();
      const double k = detail::wavenumber(i, n), ko = detail::odd_wavenumber(i, n);
      const double l = detail::wavenumber(j, n), lo = detail::odd_wavenumber(j, n);
      sigma = {pi * (lo - a * ko) / b, pi * ko};
      lap = -pi * pi * (k * k + (l * l - 2.0 * a * ko * lo + a * a * k * k) / (b * b));
    };
    const double sc1 = area_[0] / (2.0 * lat_[0].im());
    const double sc2 = area_[1] / (2.0 * lat_[1].im());
    for (int i1 = 0; i1 < n_[0]; ++i1)
      for (int j1 = 0; j1 < n_[0]; ++j1) {
        std::complex<double> sig1;
        double lap1;
        factor_symbols(0, i1, j1, sig1, lap1);
        for (int i2 = 0; i2 < n_[1]; ++i2)
          for (int j2 = 0; j2 < n_[1]; ++j2) {
            std::complex<double> sig2;
            double lap2;
            factor_symbols(1, i2, j2, sig2, lap2);
            const Eigen::Index idx = index(i1, j1, i2, j2);
            s11_(idx) = lap1 / (2.0 * pi * sc1);
            s22_(idx) = lap2 / (2.0 * pi * sc2);
            // d_z1 d_zbar2 has symbol sigma1 * (-conj(sigma2))
            s12_(idx) = -sig1 * std::conj(sig2) / (2.0 * pi * std::sqrt(sc1 * sc2));
          }
      }
  }

  std::array<int, 2> n_;
  std::array<Lattice, 2> lat_;
  std::array<double, 2> area_;
  detail::FftPlan plan_;
  Field s11_;
  Field s22_;
  ComplexField s12_;
};

}  // namespace chernlab
