#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "chernlab/cli/commands.hpp"
#include "chernlab/cli/setup.hpp"
#include "chernlab/grid/random_field.hpp"
#include "chernlab/segre/synthetic.hpp"
#include "chernlab/solvers/corrector.hpp"

namespace chernlab::cli {

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

inline Check check_le(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Identity and property suite on a torus of size n and a bi-torus of size
/// min(n, 16). Every check is a pure numerical identity of the library.
inline std::vector<Check> identity_suite(int n, std::uint64_t seed) {
  std::vector<Check> out;
  const double pi = std::numbers::pi;
  const double V = 4.0 * pi * pi;
  RandomSmooth rng(seed);

  // spectral calculus on a skew lattice
  {
    const TorusGrid g(n, Lattice({0.3, 1.1}), 7.0);
    const Field f = rng.torus(g, 4, 1.0);
    const Field u = rng.torus(g, 4, 1.0), v = rng.torus(g, 4, 1.0);
    const Field round = g.laplacian(g.invert_laplacian(f));
    out.push_back(check_le("laplacian round trip", std::sqrt((round - f).square().sum() / f.square().sum()), 1e-10));
    const double a = g.integrate(u * g.laplacian(v)), b = g.integrate(v * g.laplacian(u));
    out.push_back(check_le("integration by parts", std::abs(a - b) / std::abs(a), 1e-10));
    out.push_back(check_le("integral of laplacian", std::abs(g.integrate(g.laplacian(u))), 1e-10));
  }

  // theta bundle
  {
    const Lattice lat({0.2, 1.3});
    const ThetaBundle b(2, lat);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const std::complex<double> z(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.3));
      const double s = b.norm_squared(z);
      worst = std::max({worst, std::abs(b.norm_squared(z + 1.0) - s) / s,
                        std::abs(b.norm_squared(z + lat.tau()) - s) / s});
    }
    out.push_back(check_le("theta double periodicity", worst, 1e-12));
    const TorusGrid g(n, lat, V);
    const SectionData sec = build_section(b, g);
    out.push_back(check_le("curvature integral 2 pi d", std::abs(g.integrate(sec.rho0) - 4.0 * pi), 1e-12));
  }

  // vortex equation
  {
    const TorusGrid g(n, Lattice({0.0, 1.0}), V);
    const CymConfig cfg = flat_config(g, 2.0, 0.0, 1);
    const SectionData flat = synthetic_section(g, g.constant(1.0), 1);
    const Field psi_c = solve_vortex(flat, cfg, NewtonOptions{});
    out.push_back(check_le("constant vortex closed form",
                           (psi_c + std::log(2.0 - 1.0 / pi)).abs().maxCoeff(), 1e-12));
    const SectionData sec = build_section(ThetaBundle(1, g.lattice()), g);
    const CymState st = solve_alpha_zero(cfg, sec, NewtonOptions{});
    const Residuals r = residuals(st, cfg, sec);
    out.push_back(check_le("theta vortex residual", r.sup_norm(), 1e-10));
    out.push_back(check_le("S <= tau", section_norm(sec, st.psi).maxCoeff() / cfg.tau - 1.0, 1e-8));
    const auto [lhs, target] = constraint_integral(st, cfg, sec);
    out.push_back(check_le("constraint identity", std::abs(lhs - target) / std::abs(target), 1e-8));
    const Field G = weitzenbock_defect(sec, st.psi);
    out.push_back(check_le("Weitzenbock nonnegativity", -G.minCoeff() / G.abs().maxCoeff(), 1e-8));

    // integral identity of the first two equations at a random state
    CymConfig c = cfg;
    c.alpha = 5.0;
    const CymState rs{rng.torus(g, 3, 0.2), rng.torus(g, 3, 0.2), rng.torus(g, 3, 0.01)};
    const Residuals rr = residuals(rs, c, sec);
    out.push_back(check_le("integral R1 + R2 = 0", std::abs(g.integrate(rr.r1 + rr.r2)), 1e-9));

    // linearisation against forward differences: error ratio per decade ~ 10
    const CymState dir{rng.torus(g, 3, 1.0), rng.torus(g, 3, 1.0), rng.torus(g, 3, 0.1)};
    const Residuals lin = apply_DT(rs, c, sec, dir);
    std::vector<double> err;
    for (double h : {1e-3, 1e-4}) {
      const CymState p{rs.psi + h * dir.psi, rs.psi2 + h * dir.psi2, rs.phiK + h * dir.phiK};
      const Residuals rp = residuals(p, c, sec);
      err.push_back(std::max({((rp.r1 - rr.r1) / h - lin.r1).abs().maxCoeff(),
                              ((rp.r2 - rr.r2) / h - lin.r2).abs().maxCoeff(),
                              ((rp.r3 - rr.r3) / h - lin.r3).abs().maxCoeff()}));
    }
    out.push_back(check_le("DT finite-difference order deficit", 0.9 - std::log10(err[0] / err[1]), 0.0));

    // ch2 of the vortex state; the pointwise two-route identity needs Delta S
    // resolved near the zero of the section, which takes n >= 48
    const VortexChernForms ch = ch2_form(st, cfg, sec);
    out.push_back(check_le("integral ch2 = 0", std::abs(g.integrate(ch.ch2_density)), 1e-10));
    const TorusGrid gf(std::max(n, 48), g.lattice(), V);
    const CymConfig cf = flat_config(gf, 2.0, 0.0, 1);
    const SectionData sf = build_section(ThetaBundle(1, gf.lattice()), gf);
    const CymState sst = solve_alpha_zero(cf, sf, NewtonOptions{});
    out.push_back(check_le("ch2 two routes",
                           (ch2_form(sst, cf, sf).ch2_density - ch2_block_trace(sst, cf, sf)).abs().maxCoeff(),
                           1e-10));
  }

  // conformal Chern algebra on the bi-torus
  {
    const BiTorusGrid g = BiTorusGrid::square(std::min(n, 16));
    double route = 0.0, invariant = 0.0, mass = 0.0;
    for (int r : {2, 3, 4}) {
      const ConformalChernData data = synthetic_chern_data(g, r, 1e-2, seed + r);
      const Field phi = rng.bitorus(g, 2, 0.05);
      const ConformalChernForms f = conformal_chern(data, g, phi);
      route = std::max(route, (f.segre2 - segre2_rearranged(data, g, phi)).abs().maxCoeff());
      invariant = std::max(invariant, (kobayashi_lubke_density(r, f.c1, f.c2) -
                                       kobayashi_lubke_density(r, data.c1_0, data.c2_0))
                                          .abs()
                                          .maxCoeff());
      const Form11Field base = (1.0 / r) * data.c1_0;
      const double m0 = g.integrate(wedge_square(base));
      mass = std::max(mass, std::abs(g.integrate(wedge_square(base + g.ddbar(phi))) - m0) / m0);
    }
    out.push_back(check_le("Segre two routes", route, 1e-10));
    out.push_back(check_le("Kobayashi-Lubke invariance", invariant, 1e-10));
    out.push_back(check_le("Monge-Ampere mass conservation", mass, 1e-10));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay of stored diagnostics

inline void compare_json(const json& stored, const json& fresh, const std::string& prefix,
                         std::vector<Check>& out) {
  for (auto it = stored.begin(); it != stored.end(); ++it) {
    if (!it->is_number() && !it->is_boolean()) continue;
    const std::string name = prefix + it.key();
    if (!fresh.contains(it.key())) {
      out.push_back({name + " (missing)", 1.0, 0.0, false});
      continue;
    }
    const double a = it->is_boolean() ? double(it->get<bool>()) : it->get<double>();
    const json& f = fresh[it.key()];
    const double b = f.is_boolean() ? double(f.get<bool>()) : f.get<double>();
    out.push_back(check_le(name, rel(a, b), 1e-12));
  }
}

/// Recomputes every stored diagnostic of a CLI output directory from its
/// CWF1 fields and config echo.
inline std::vector<Check> verify_state(const std::filesystem::path& dir) {
  const json m = io::RunManifest::load(dir);
  const std::string cmd = m.at("command");
  const json& echo = m.at("config");
  std::vector<Check> out;
  if (cmd == "vortex-solve" || cmd == "cym-continue" || cmd == "represent-ch2") {
    const TorusGrid g0 = build_torus(echo).grid;
    const Field eta = load_torus_field(g0, dir / "eta.cwf");
    TorusSetup s = build_torus(echo, eta);
    if (cmd == "vortex-solve") {
      const CymState st = read_state(s.grid, dir, "");
      compare_json(m.at("diagnostics"),
                   torus_diagnostics(st, s.cfg, s.sec, m.at("diagnostics").contains("sigma_min")), "",
                   out);
    } else if (cmd == "cym-continue") {
      std::ifstream in(dir / "records.jsonl");
      require(bool(in), ErrorKind::Io, "no records.jsonl in " + dir.string());
      std::string line;
      while (std::getline(in, line)) {
        const json rec = json::parse(line);
        const CymState st = read_state(s.grid, dir, rec.at("prefix"));
        CymConfig c = s.cfg;
        c.alpha = rec.at("alpha");
        const json& d = rec.at("diagnostics");
        compare_json(d, torus_diagnostics(st, c, s.sec, d.contains("sigma_min")),
                     "alpha=" + fmt(c.alpha, "%g") + " ", out);
      }
    } else {
      const Field h1 = load_torus_field(s.grid, dir / "h1.cwf");
      const Field omega = load_torus_field(s.grid, dir / "omega.cwf");
      const Field log_f2 = load_torus_field(s.grid, dir / "log_f2.cwf");
      json stored = m.at("diagnostics");
      stored.erase("shift");
      compare_json(stored, represent_diagnostics(s.cfg, s.sec, h1, omega, log_f2), "", out);
    }
  } else if (cmd == "segre-solve") {
    SegreSetup s = build_segre(echo);
    ConformalChernData data = s.data;
    data.c1_0 = io::form_from(s.grid, io::read_cwf1(dir / "c1_0.cwf"));
    data.c2_0 = io::field_from(s.grid, io::read_cwf1(dir / "c2_0.cwf"));
    data.eta = io::field_from(s.grid, io::read_cwf1(dir / "eta.cwf"));
    const Field phi = io::field_from(s.grid, io::read_cwf1(dir / "phi.cwf"));
    compare_json(m.at("diagnostics"), segre_diagnostics(data, s.grid, phi), "", out);
  } else {
    throw Error(ErrorKind::InvalidArgument, "cannot verify output of command '" + cmd + "'");
  }
  return out;
}

inline bool print_checks(const std::vector<Check>& checks, std::ostream& os) {
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  bool all = true;
  for (const auto& c : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %12.4e  <= %9.2e  %s\n", int(width), c.name.c_str(),
                  c.value, c.tol, c.pass ? "PASS" : "FAIL");
    os << line;
    all = all && c.pass;
  }
  os << (all ? "all checks passed" : "some checks FAILED") << " (" << checks.size() << ")\n";
  return all;
}

}  // namespace chernlab::cli
