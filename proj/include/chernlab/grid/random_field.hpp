#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/torus_grid.hpp"

namespace chernlab {

/// Band-limited random trigonometric polynomials. Modes with |k|,|l| <= max_mode
/// get uniform coefficients damped by exp(-(k^2+l^2)/max_mode); the result is
/// rescaled so that its sup-norm equals amplitude.
class RandomSmooth {
 public:
  explicit RandomSmooth(std::uint64_t seed) : rng_(seed) {}

  Field torus(const TorusGrid& g, int max_mode, double amplitude) {
    const double two_pi = 2.0 * std::numbers::pi;
    Field u = Field::Zero(g.size());
    for (int k = -max_mode; k <= max_mode; ++k)
      for (int l = 0; l <= max_mode; ++l) {
        if (l == 0 && k <= 0) continue;
        const double damp = std::exp(-double(k * k + l * l) / max_mode);
        const double a = damp * uniform(), b = damp * uniform();
        u += g.sample([&](double x, double y) {
          const double t = two_pi * (k * x + l * y);
          return a * std::cos(t) + b * std::sin(t);
        });
      }
    return normalise(u, amplitude);
  }

  Field bitorus(const BiTorusGrid& g, int max_mode, double amplitude) {
    const double two_pi = 2.0 * std::numbers::pi;
    struct Mode {
      int k1, l1, k2, l2;
      double a, b;
    };
    std::vector<Mode> modes;
    for (int k1 = -max_mode; k1 <= max_mode; ++k1)
      for (int l1 = -max_mode; l1 <= max_mode; ++l1)
        for (int k2 = -max_mode; k2 <= max_mode; ++k2)
          for (int l2 = -max_mode; l2 <= max_mode; ++l2) {
            const int r2 = k1 * k1 + l1 * l1 + k2 * k2 + l2 * l2;
            if (r2 == 0 || r2 > max_mode * max_mode) continue;
            // one representative per +-k pair
            const int key[4] = {k1, l1, k2, l2};
            int first = 0;
            while (key[first] == 0) ++first;
            if (key[first] < 0) continue;
            const double damp = std::exp(-double(r2) / max_mode);
            modes.push_back({k1, l1, k2, l2, damp * uniform(), damp * uniform()});
          }
    Field u = g.sample([&](double x1, double y1, double x2, double y2) {
      double s = 0.0;
      for (const Mode& m : modes) {
        const double t = two_pi * (m.k1 * x1 + m.l1 * y1 + m.k2 * x2 + m.l2 * y2);
        s += m.a * std::cos(t) + m.b * std::sin(t);
      }
      return s;
    });
    return normalise(u, amplitude);
  }

  double uniform() { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

 private:
  static Field normalise(Field u, double amplitude) {
    const double m = u.abs().maxCoeff();
    if (m > 0.0) u *= amplitude / m;
    return u;
  }

  std::mt19937_64 rng_;
};

}  // namespace chernlab
