#pragma once

#include <string>

#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"

namespace chernlab {

/// Chern-Weil data of a rank-r bundle on the bi-torus model surface, before the
/// conformal change h = h0 e^{-phi}. Top-degree quantities (c2_0, eta) are
/// densities against the volume form f1 ^ f2; c1_0 is in the normalised frame.
struct ConformalChernData {
  int r = 2;
  Form11Field c1_0;
  Field c2_0;
  Field eta;
  double epsilon = 0.0;
  double C = 0.0;  // Kobayashi-Lubke constant, user supplied

  void check(const BiTorusGrid& g) const {
    require(r >= 2, ErrorKind::InvalidArgument, "rank must be >= 2");
    g.check_form(c1_0, "c1_0");
    g.check_field(c2_0, "c2_0");
    g.check_field(eta, "eta");
  }
};

/// (r-1) c1^2 - 2r c2, the density left invariant by conformal rescaling.
inline Field kobayashi_lubke_density(int r, const Form11Field& c1, const Field& c2) {
  return double(r - 1) * wedge_square(c1) - 2.0 * r * c2;
}

/// Largest violation of (r-1) c1_0^2 - 2r c2_0 <= C eps omega^2, where omega is
/// the flat form with identity matrix (omega^2 has density 2). Nonpositive
/// means the gate passes.
inline double kobayashi_lubke_excess(const ConformalChernData& data) {
  const Field lhs = kobayashi_lubke_density(data.r, data.c1_0, data.c2_0);
  return (lhs - 2.0 * data.C * data.epsilon).maxCoeff();
}

struct ConformalChernForms {
  Form11Field c1;
  Field c2;
  Field segre2;
};

/// Chern forms of h = h0 e^{-phi}: Theta_h = Theta_0 + d dbar phi Id gives
/// c1 = c1_0 + r ddc phi and c2 = c2_0 + (r-1) ddc phi ^ c1_0 + r(r-1)/2 (ddc phi)^2.
inline ConformalChernForms conformal_chern(const ConformalChernData& data, const BiTorusGrid& g,
                                           const Field& phi) {
  data.check(g);
  g.check_field(phi, "phi");
  const int r = data.r;
  const Form11Field dd = g.ddbar(phi);
  ConformalChernForms out;
  out.c1 = data.c1_0 + double(r) * dd;
  out.c2 = data.c2_0 + double(r - 1) * wedge(dd, data.c1_0) +
           (0.5 * r * (r - 1)) * wedge_square(dd);
  out.segre2 = wedge_square(out.c1) - out.c2;
  return out;
}

/// The second Segre form rearranged as
///   ((r-1) c1_0^2 - 2r c2_0)/(2r) + r(r+1)/2 (ddc phi + c1_0/r)^2.
inline Field segre2_rearranged(const ConformalChernData& data, const BiTorusGrid& g,
                               const Field& phi) {
  const int r = data.r;
  const Form11Field shifted = g.ddbar(phi) + (1.0 / r) * data.c1_0;
  return kobayashi_lubke_density(r, data.c1_0, data.c2_0) / (2.0 * r) +
         (0.5 * r * (r + 1)) * wedge_square(shifted);
}

/// c2 of the conformally changed metric when phi solves the Monge-Ampere
/// equation: (2r c2_0 - (r-1) c1_0^2 + (r-1) eta) / (r+1).
inline Field c2_closed_form(const ConformalChernData& data) {
  const int r = data.r;
  return (2.0 * r * data.c2_0 - double(r - 1) * wedge_square(data.c1_0) +
          double(r - 1) * data.eta) /
         double(r + 1);
}

}  // namespace chernlab
