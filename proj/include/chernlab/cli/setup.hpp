#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "chernlab/chern/conformal.hpp"
#include "chernlab/cym/system.hpp"
#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/random_field.hpp"
#include "chernlab/grid/torus_grid.hpp"
#include "chernlab/io/config.hpp"
#include "chernlab/io/cwf1.hpp"
#include "chernlab/segre/synthetic.hpp"
#include "chernlab/solvers/adjoint.hpp"
#include "chernlab/solvers/vortex.hpp"
#include "chernlab/theta/theta_bundle.hpp"

namespace chernlab::cli {

using json = nlohmann::json;

/// Command-line values that take precedence over config keys.
struct Overrides {
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

// ---------------------------------------------------------------------------
// Torus problems

inline const std::set<std::string>& torus_keys() {
  static const std::set<std::string> keys{
      "tau",      "alpha",      "d",       "vol",     "n",       "tau_lat_re",
      "tau_lat_im", "eta_file", "section", "s0_const", "tol_newton", "tol_ineq",
      "tol_mean", "alphas",     "seed",    "omega_file", "h1_file"};
  return keys;
}

/// Resolved torus configuration: every key with its effective value. This is
/// the config echo stored in manifests and the input for replay.
inline json resolve_torus(const io::Config& c, const Overrides& ov) {
  c.check_known(torus_keys());
  json e;
  e["tau"] = c.get_double("tau", 2.0);
  e["alpha"] = c.get_double("alpha", 0.0);
  e["d"] = c.get_int("d", 1);
  e["vol"] = c.get_double("vol", 4.0 * std::numbers::pi * std::numbers::pi);
  e["n"] = ov.n ? *ov.n : c.get_int("n", 32);
  e["tau_lat_re"] = c.get_double("tau_lat_re", 0.0);
  e["tau_lat_im"] = c.get_double("tau_lat_im", 1.0);
  e["section"] = c.get_string("section", "theta");
  e["s0_const"] = c.get_double("s0_const", 1.0);
  e["tol_newton"] = ov.tol ? *ov.tol : c.get_double("tol_newton", 1e-10);
  e["tol_ineq"] = c.get_double("tol_ineq", 1e-8);
  e["tol_mean"] = c.get_double("tol_mean", -1.0);
  e["seed"] = ov.seed ? *ov.seed : std::uint64_t(c.get_int("seed", 1));
  e["alphas"] = c.get_doubles("alphas");
  for (const char* k : {"eta_file", "omega_file", "h1_file"})
    e[k] = c.has(k) ? json(c.get_string(k, "")) : json(nullptr);
  const std::string sec = e["section"];
  require(sec == "theta" || sec == "constant", ErrorKind::InvalidArgument,
          "section must be 'theta' or 'constant'");
  return e;
}

struct TorusSetup {
  TorusGrid grid;
  SectionData sec;
  CymConfig cfg;
  NewtonOptions newton;
};

inline Field load_torus_field(const TorusGrid& g, const std::filesystem::path& p) {
  return io::field_from(g, io::read_cwf1(p));
}

/// Builds grid, section and CymConfig from a resolved echo. eta overrides the
/// echo's eta_file (replay reads the stored copy); otherwise eta is flat.
inline TorusSetup build_torus(const json& e, const std::optional<Field>& eta = std::nullopt) {
  const Lattice lat({e["tau_lat_re"].get<double>(), e["tau_lat_im"].get<double>()});
  TorusGrid g(e["n"].get<int>(), lat, e["vol"].get<double>());
  const int d = e["d"].get<int>();
  require(d >= 1, ErrorKind::InvalidArgument, "degree d must be >= 1");
  SectionData sec = e["section"] == "theta"
                        ? build_section(ThetaBundle(d, lat), g)
                        : synthetic_section(g, g.constant(e["s0_const"].get<double>()), d);
  CymConfig cfg = flat_config(g, e["tau"].get<double>(), e["alpha"].get<double>(), d);
  if (eta)
    cfg.f_eta = *eta;
  else if (!e["eta_file"].is_null())
    cfg.f_eta = load_torus_field(g, e["eta_file"].get<std::string>());
  cfg.tol.newton = e["tol_newton"].get<double>();
  cfg.tol.ineq = e["tol_ineq"].get<double>();
  cfg.tol.mean = e["tol_mean"].get<double>();
  cfg.validate(g);
  NewtonOptions opts;
  opts.tol_res = cfg.tol.newton;
  opts.validate();
  return {g, std::move(sec), std::move(cfg), opts};
}

inline json section_sidecar(const SectionData& sec) {
  const TorusGrid& g = sec.grid;
  json zeros = json::array();
  if (sec.bundle)
    for (auto z : sec.bundle->zero_points()) zeros.push_back({z.real(), z.imag()});
  return {{"degree", sec.degree},
          {"tau_lat", {g.lattice().tau().real(), g.lattice().tau().imag()}},
          {"vol", g.vol()},
          {"zero_points", zeros},
          {"kind", sec.bundle ? "theta" : "synthetic"}};
}

/// Diagnostics of a torus state. Each value is recomputable from the stored
/// fields, which is what `verify --state` checks.
inline json torus_diagnostics(const CymState& st, const CymConfig& cfg, const SectionData& sec,
                              bool with_sigma) {
  const TorusGrid& g = sec.grid;
  const Residuals r = residuals(st, cfg, sec);
  const Field s = section_norm(sec, st.psi);
  const auto [lhs, target] = constraint_integral(st, cfg, sec);
  json d;
  d["residual_sup"] = r.sup_norm();
  d["psi_min"] = st.psi.minCoeff();
  d["psi_max"] = st.psi.maxCoeff();
  d["psi2_min"] = st.psi2.minCoeff();
  d["psi2_max"] = st.psi2.maxCoeff();
  d["max_s_minus_tau"] = s.maxCoeff() - cfg.tau;
  d["min_w_sigma"] = omega_density(g, st.phiK).minCoeff();
  d["min_determinant"] = ellipticity_determinant(st, cfg, sec).minCoeff();
  d["constraint_lhs"] = lhs;
  d["constraint_target"] = target;
  d["constraint_gap"] = std::abs(lhs - target);
  d["omega_defect"] = omega_recovery_defect(st, cfg, sec).abs().maxCoeff();
  d["min_weitzenbock"] = weitzenbock_defect(sec, st.psi).minCoeff();
  d["satisfaction_value"] = satisfaction_value(cfg);
  if (with_sigma) d["sigma_min"] = adjoint_min_singular_value(st, cfg, sec);
  return d;
}

/// Random positive torus density with integral vol.
inline Field random_positive_density(const TorusGrid& g, std::uint64_t seed) {
  RandomSmooth rng(seed);
  Field eta = 1.0 + rng.torus(g, 3, 0.3);
  return eta * (g.vol() / g.integrate(eta));
}

// ---------------------------------------------------------------------------
// Bi-torus problems

inline const std::set<std::string>& segre_keys() {
  static const std::set<std::string> keys{"r",     "eps",   "n",    "seed",      "C",
                                          "case",  "area1", "area2", "tol_newton"};
  return keys;
}

inline json resolve_segre(const io::Config& c, const Overrides& ov) {
  c.check_known(segre_keys());
  json e;
  e["r"] = c.get_int("r", 2);
  e["eps"] = c.get_double("eps", 1e-3);
  e["n"] = ov.n ? *ov.n : c.get_int("n", 16);
  e["seed"] = ov.seed ? *ov.seed : std::uint64_t(c.get_int("seed", 1));
  e["C"] = c.has("C") ? json(c.get_double("C", 0.0)) : json(nullptr);
  e["case"] = c.get_string("case", "synthetic");
  e["area1"] = c.get_double("area1", 1.0);
  e["area2"] = c.get_double("area2", 1.0);
  e["tol_newton"] = ov.tol ? *ov.tol : c.get_double("tol_newton", 1e-10);
  const std::string kase = e["case"];
  require(kase == "synthetic" || kase == "identity", ErrorKind::InvalidArgument,
          "case must be 'synthetic' or 'identity'");
  return e;
}

struct SegreSetup {
  BiTorusGrid grid;
  ConformalChernData data;
  NewtonOptions newton;
};

inline SegreSetup build_segre(const json& e) {
  const int n = e["n"].get<int>();
  const Lattice sq({0.0, 1.0});
  BiTorusGrid g(n, sq, e["area1"].get<double>(), n, sq, e["area2"].get<double>());
  const int r = e["r"].get<int>();
  const double eps = e["eps"].get<double>();
  const auto seed = e["seed"].get<std::uint64_t>();
  ConformalChernData data = e["case"] == "identity" ? synthetic_identity_case(g, r, eps, seed)
                                                    : synthetic_chern_data(g, r, eps, seed);
  if (!e["C"].is_null()) data.C = e["C"].get<double>();
  NewtonOptions opts;
  opts.tol_res = e["tol_newton"].get<double>();
  opts.validate();
  return {g, std::move(data), opts};
}

}  // namespace chernlab::cli
