#pragma once

#include <algorithm>
#include <cstdint>

#include "chernlab/chern/conformal.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/random_field.hpp"

namespace chernlab {

namespace detail {

// Constant positive-definite matrix plus ddc of a random smooth function,
// halved until the form stays above a third of the constant part.
inline Form11Field random_kahler_form(const BiTorusGrid& g, RandomSmooth& rng, double scale) {
  const double m11 = scale * rng.uniform(1.0, 1.4);
  const double m22 = scale * rng.uniform(1.0, 1.4);
  const std::complex<double> m12(0.15 * scale * rng.uniform(), 0.15 * scale * rng.uniform());
  const Form11Field M = Form11Field::constant(g.size(), m11, m22, m12);
  const double floor = min_eigenvalue(M).minCoeff() / 3.0;
  const Field pot = rng.bitorus(g, 2, 1.0);
  Form11Field dd = g.ddbar(pot);
  double amp = 0.3 * scale / (dd.b11.abs().maxCoeff() + dd.b22.abs().maxCoeff() +
                              dd.b12.abs().maxCoeff());
  Form11Field c = M + amp * dd;
  while (min_eigenvalue(c).minCoeff() < floor) {
    amp *= 0.5;
    c = M + amp * dd;
  }
  return c;
}

inline Field positive_density(const BiTorusGrid& g, RandomSmooth& rng) {
  return 1.0 + rng.bitorus(g, 2, 0.3);
}

}  // namespace detail

/// Synthetic approximately Hermite-Einstein data satisfying the
/// Kobayashi-Lubke bound with slack eps and the Monge-Ampere mass identity:
///   c2_0 = (r-1)/(2r) c1_0^2 - eps p + e,  e of zero mass,
///   eta  = positive shape scaled to the required mass.
/// The returned C is the smallest Kobayashi-Lubke constant the data admit
/// (times 1.01); it does not depend on eps.
inline ConformalChernData synthetic_chern_data(const BiTorusGrid& g, int r, double eps,
                                               std::uint64_t seed) {
  require(r >= 2, ErrorKind::InvalidArgument, "rank must be >= 2");
  require(eps >= 0.0, ErrorKind::InvalidArgument, "eps must be nonnegative");
  RandomSmooth rng(seed);
  ConformalChernData data;
  data.r = r;
  data.epsilon = eps;
  data.c1_0 = detail::random_kahler_form(g, rng, double(r));

  const Field p = detail::positive_density(g, rng);
  Field e = rng.bitorus(g, 2, 1.0);
  e -= g.mean(e);
  e *= 0.25 * p.minCoeff() / e.abs().maxCoeff();
  const Field ws = wedge_square(data.c1_0);
  data.c2_0 = (double(r - 1) / (2.0 * r)) * ws - eps * (p - e);

  const double mass = (double(r + 1) / (2.0 * r)) * g.integrate(ws) + eps * g.integrate(p - e);
  const Field shape = detail::positive_density(g, rng);
  data.eta = shape * (mass / g.integrate(shape));
  // KL density is 2r eps (p - e) and the identity form squares to 2
  data.C = 1.01 * r * (p - e).maxCoeff();
  return data;
}

/// Manufactured identity case: c2_0 = c1_0^2 - eta with
/// eta = (r+1)/(2r) c1_0^2 (1 + eps q), q of zero weighted mass, so that
/// c2(h0) already carries the target Segre form and phi = 0 at eps = 0.
inline ConformalChernData synthetic_identity_case(const BiTorusGrid& g, int r, double eps,
                                                  std::uint64_t seed) {
  require(r >= 2, ErrorKind::InvalidArgument, "rank must be >= 2");
  RandomSmooth rng(seed);
  ConformalChernData data;
  data.r = r;
  data.epsilon = eps;
  data.c1_0 = detail::random_kahler_form(g, rng, double(r));
  const Field ws = wedge_square(data.c1_0);
  Field q = rng.bitorus(g, 2, 1.0);
  q -= g.integrate(ws * q) / g.integrate(ws);
  q /= q.abs().maxCoeff();
  data.eta = (double(r + 1) / (2.0 * r)) * ws * (1.0 + eps * 0.5 * q);
  data.c2_0 = ws - data.eta;
  const Field kl = kobayashi_lubke_density(r, data.c1_0, data.c2_0);
  data.C = eps > 0.0 ? 1.01 * std::max(kl.maxCoeff(), 0.0) / (2.0 * eps) : 0.0;
  return data;
}

}  // namespace chernlab
