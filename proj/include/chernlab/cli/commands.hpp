#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "chernlab/chern/conformal.hpp"
#include "chernlab/chern/vortex_chern.hpp"
#include "chernlab/cli/setup.hpp"
#include "chernlab/io/manifest.hpp"
#include "chernlab/segre/monge_ampere.hpp"
#include "chernlab/solvers/continuation.hpp"

namespace chernlab::cli {

namespace fs = std::filesystem;

inline std::string fmt(double x, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

/// Sigma_min via dense QR costs O(N^3); above this size the CLI skips it.
constexpr int kSigmaGridLimit = 32;

inline std::string profile_csv(const TorusGrid& g, const std::vector<std::string>& names,
                               const std::vector<const Field*>& fields) {
  std::vector<std::string> headers{"x"};
  std::vector<std::vector<double>> cols(1);
  for (int i = 0; i < g.n(); ++i) cols[0].push_back(g.x(i));
  for (std::size_t k = 0; k < fields.size(); ++k) {
    headers.push_back(names[k]);
    cols.emplace_back();
    for (int i = 0; i < g.n(); ++i) cols.back().push_back((*fields[k])(g.index(i, 0)));
  }
  return io::csv_table(headers, cols);
}

inline void write_state(io::RunManifest& m, const TorusGrid& g, const std::string& prefix,
                        const CymState& st) {
  m.add_field(prefix + "psi.cwf", io::to_array(g, st.psi));
  m.add_field(prefix + "psi2.cwf", io::to_array(g, st.psi2));
  m.add_field(prefix + "phiK.cwf", io::to_array(g, st.phiK));
}

inline CymState read_state(const TorusGrid& g, const fs::path& dir, const std::string& prefix) {
  return {load_torus_field(g, dir / (prefix + "psi.cwf")),
          load_torus_field(g, dir / (prefix + "psi2.cwf")),
          load_torus_field(g, dir / (prefix + "phiK.cwf"))};
}

inline void write_torus_inputs(io::RunManifest& m, const TorusSetup& s) {
  m.add_grid("torus", s.grid);
  m.add_field("s0.cwf", io::to_array(s.grid, s.sec.s0));
  m.add_field("eta.cwf", io::to_array(s.grid, s.cfg.f_eta));
  m.add_text("section.json", section_sidecar(s.sec).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

inline int cmd_vortex_solve(const json& echo, const fs::path& out_dir, std::ostream& out) {
  io::RunManifest m("vortex-solve", out_dir);
  m.config() = echo;
  TorusSetup s = build_torus(echo);
  require(s.cfg.alpha == 0.0, ErrorKind::InvalidArgument,
          "vortex-solve is the alpha = 0 pipeline; use cym-continue for alpha > 0");
  m.mark("setup");
  SolveReport rep;
  const CymState st = solve_alpha_zero(s.cfg, s.sec, s.newton, &rep);
  m.mark("solve");
  m.diagnostics() = torus_diagnostics(st, s.cfg, s.sec, s.grid.n() <= kSigmaGridLimit);
  m.mark("diagnostics");
  write_torus_inputs(m, s);
  write_state(m, s.grid, "", st);
  const Field sn = section_norm(s.sec, st.psi);
  m.add_text("profile.csv", profile_csv(s.grid, {"psi", "psi2", "S"}, {&st.psi, &st.psi2, &sn}));
  m.mark("output");
  m.write();

  const json& d = m.document()["diagnostics"];
  out << "vortex-solve: n=" << s.grid.n() << " newton iterations " << rep.iterations << "\n";
  out << "  psi in [" << fmt(d["psi_min"]) << ", " << fmt(d["psi_max"]) << "]"
      << (d["psi_max"].get<double>() - d["psi_min"].get<double>() < 1e-12 ? " (constant)" : "")
      << "\n";
  out << "  residual sup " << fmt(d["residual_sup"], "%.3e") << ", max S - tau "
      << fmt(d["max_s_minus_tau"], "%.3e") << "\n";
  out << "  constraint: integral S w = " << fmt(d["constraint_lhs"]) << ", target "
      << fmt(d["constraint_target"]) << ", gap " << fmt(d["constraint_gap"], "%.3e") << "\n";
  if (d.contains("sigma_min")) out << "  sigma_min " << fmt(d["sigma_min"], "%.6e") << "\n";
  out << "  wrote " << out_dir.string() << "\n";
  return 0;
}

inline int cmd_cym_continue(const json& echo, const fs::path& out_dir, std::ostream& out) {
  io::RunManifest m("cym-continue", out_dir);
  m.config() = echo;
  const std::vector<double> alphas = echo["alphas"].get<std::vector<double>>();
  require(!alphas.empty(), ErrorKind::InvalidArgument, "cym-continue needs an 'alphas' list");
  TorusSetup s = build_torus(echo);
  m.mark("setup");
  ContinuationOptions opts;
  opts.newton = s.newton;
  opts.compute_sigma = s.grid.n() <= kSigmaGridLimit;
  const ContinuationResult res = continue_in_alpha(s.cfg, s.sec, alphas, opts);
  m.mark("continuation");
  if (res.records.empty())
    throw Error(ErrorKind::NoConvergence, "no state accepted: " + res.message);

  write_torus_inputs(m, s);
  std::string lines;
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    const ContinuationRecord& rec = res.records[k];
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "state_%03zu_", k);
    write_state(m, s.grid, prefix, rec.state);
    CymConfig c = s.cfg;
    c.alpha = rec.alpha;
    json line = {{"index", k},
                 {"alpha", rec.alpha},
                 {"prefix", prefix},
                 {"diagnostics", torus_diagnostics(rec.state, c, s.sec, opts.compute_sigma)},
                 {"newton_iterations", rec.diagnostics.newton_iterations}};
    lines += line.dump() + "\n";
    out << "  alpha " << fmt(rec.alpha, "%-10g") << " residual "
        << fmt(rec.diagnostics.residual, "%.2e") << "  min w " << fmt(rec.diagnostics.min_w_sigma, "%.6f")
        << "  max S-tau " << fmt(rec.diagnostics.max_s_minus_tau, "%.3e") << "  det "
        << fmt(rec.diagnostics.min_determinant, "%.4f");
    if (opts.compute_sigma) out << "  sigma_min " << fmt(rec.diagnostics.sigma_min, "%.4e");
    out << "\n";
  }
  m.add_text("records.jsonl", lines);
  m.diagnostics() = {{"accepted", res.records.size()},
                     {"last_alpha", res.last_alpha()},
                     {"stop", to_string(res.stop)},
                     {"stopped_at", res.stopped_at},
                     {"satisfaction_threshold", satisfaction_threshold(s.cfg)},
                     {"message", res.message}};
  m.mark("output");
  m.write();
  if (res.stop == StopReason::Completed)
    out << "cym-continue: completed, last alpha " << fmt(res.last_alpha()) << "\n";
  else
    out << "cym-continue: truncated at alpha " << fmt(res.stopped_at) << " (" << to_string(res.stop)
        << ": " << res.message << "); last good alpha " << fmt(res.last_alpha()) << "\n";
  return 0;
}

/// Diagnostics of a represent-ch2 result, recomputed from the stored fields.
inline json represent_diagnostics(const CymConfig& cfg, const SectionData& sec, const Field& h1,
                                  const Field& omega, const Field& log_f2) {
  const TorusGrid& g = sec.grid;
  const CymState st{h1 + log_f2, -log_f2, g.constant(0.0)};
  const Field ch2 = ch2_form(st, cfg, sec).ch2_density;
  const Field eta_rec = omega + (cfg.tau * cfg.alpha / 8.0) * ch2;
  return {{"reconstruction_error", (eta_rec - cfg.f_eta).abs().maxCoeff()},
          {"verification", ((8.0 / cfg.tau) * (omega - cfg.f_eta) + cfg.alpha * ch2).abs().maxCoeff()},
          {"ch2_integral", g.integrate(ch2)},
          {"eta_mass", g.integrate(cfg.f_eta)},
          {"omega_mass", g.integrate(omega)},
          {"f2_min", log_f2.exp().minCoeff()},
          {"f2_max", log_f2.exp().maxCoeff()}};
}

struct RepresentInputs {
  Field eta, omega, h1;
};

inline RepresentInputs represent_inputs(const json& echo, const TorusGrid& g) {
  RepresentInputs in;
  in.eta = echo["eta_file"].is_null() ? random_positive_density(g, echo["seed"].get<std::uint64_t>())
                                      : load_torus_field(g, echo["eta_file"].get<std::string>());
  in.omega = echo["omega_file"].is_null() ? g.constant(1.0)
                                          : load_torus_field(g, echo["omega_file"].get<std::string>());
  in.h1 = echo["h1_file"].is_null() ? g.constant(0.0)
                                    : load_torus_field(g, echo["h1_file"].get<std::string>());
  return in;
}

inline int cmd_represent_ch2(const json& echo, const fs::path& out_dir, std::ostream& out) {
  io::RunManifest m("represent-ch2", out_dir);
  m.config() = echo;
  const TorusSetup base = build_torus(echo);
  const RepresentInputs in = represent_inputs(echo, base.grid);
  TorusSetup s = build_torus(echo, in.eta);
  m.mark("setup");
  const RepresentResult r = represent_ch2(s.cfg, s.sec, in.h1, in.omega);
  m.mark("solve");
  m.diagnostics() = represent_diagnostics(s.cfg, s.sec, in.h1, in.omega, r.log_f2);
  m.diagnostics()["shift"] = r.shift;
  write_torus_inputs(m, s);
  m.add_field("omega.cwf", io::to_array(s.grid, in.omega));
  m.add_field("h1.cwf", io::to_array(s.grid, in.h1));
  m.add_field("log_f2.cwf", io::to_array(s.grid, r.log_f2));
  m.add_field("f2.cwf", io::to_array(s.grid, r.f2));
  m.add_text("profile.csv", profile_csv(s.grid, {"eta", "log_f2"}, {&s.cfg.f_eta, &r.log_f2}));
  m.mark("output");
  m.write();
  const json& d = m.document()["diagnostics"];
  out << "represent-ch2: alpha " << fmt(s.cfg.alpha) << ", f2 in [" << fmt(d["f2_min"]) << ", "
      << fmt(d["f2_max"]) << "]\n";
  out << "  sup |omega + (tau alpha/8) ch2 - eta| = " << fmt(d["reconstruction_error"], "%.3e")
      << ", integral ch2 = " << fmt(d["ch2_integral"], "%.3e") << "\n";
  out << "  wrote " << out_dir.string() << "\n";
  return 0;
}

/// Diagnostics of a segre-solve result, recomputed from the stored fields.
inline json segre_diagnostics(const ConformalChernData& data, const BiTorusGrid& g,
                              const Field& phi) {
  const int r = data.r;
  const Form11Field base = (1.0 / r) * data.c1_0;
  const Field rhs = data.eta - kobayashi_lubke_density(r, data.c1_0, data.c2_0) / (2.0 * r);
  const ConformalChernForms f = conformal_chern(data, g, phi);
  const PositivityReport rep = certify_positivity(data, g, phi);
  const Field lhs = ma_coefficient(r) * wedge_square(base + g.ddbar(phi));
  const Field inv0 = kobayashi_lubke_density(r, data.c1_0, data.c2_0);
  const Field inv1 = kobayashi_lubke_density(r, f.c1, f.c2);
  return {{"kl_excess", kobayashi_lubke_excess(data)},
          {"C", data.C},
          {"rhs_min", rhs.minCoeff()},
          {"mass_lhs", g.integrate(ma_coefficient(r) * wedge_square(base))},
          {"mass_rhs", g.integrate(rhs)},
          {"defect", (lhs - rhs).abs().maxCoeff() / rhs.maxCoeff()},
          {"phi_mean", g.mean(phi)},
          {"min_c1_eigenvalue", rep.min_c1_eigenvalue},
          {"min_c2", rep.min_c2},
          {"min_segre2", rep.min_segre2},
          {"certified", rep.certified},
          {"c2_closed_form_error", (f.c2 - c2_closed_form(data)).abs().maxCoeff()},
          {"segre_route_error", (f.segre2 - segre2_rearranged(data, g, phi)).abs().maxCoeff()},
          {"invariant_error", (inv1 - inv0).abs().maxCoeff()}};
}

inline int cmd_segre_solve(const json& echo, const fs::path& out_dir, std::ostream& out) {
  io::RunManifest m("segre-solve", out_dir);
  m.config() = echo;
  const SegreSetup s = build_segre(echo);
  m.add_grid("bitorus", s.grid);
  m.mark("setup");
  const MAProblem prob = assemble_ma(s.data, s.grid);
  const MASolution sol = solve_ma(prob, s.grid, s.newton);
  m.mark("solve");
  m.diagnostics() = segre_diagnostics(s.data, s.grid, sol.phi);
  m.mark("diagnostics");
  const ConformalChernForms f = conformal_chern(s.data, s.grid, sol.phi);
  m.add_field("c1_0.cwf", io::to_array(s.grid, s.data.c1_0));
  m.add_field("c2_0.cwf", io::to_array(s.grid, s.data.c2_0));
  m.add_field("eta.cwf", io::to_array(s.grid, s.data.eta));
  m.add_field("phi.cwf", io::to_array(s.grid, sol.phi));
  m.add_field("c1.cwf", io::to_array(s.grid, f.c1));
  m.add_field("c2.cwf", io::to_array(s.grid, f.c2));
  m.add_field("segre2.cwf", io::to_array(s.grid, f.segre2));
  json conv = {{"ddc", "sqrt(-1)/(2 pi) d dbar"},
               {"top_forms", "densities against f1 ^ f2"},
               {"form11_layout", "b11, b22, Re b12, Im b12"}};
  m.entry("conventions") = conv;
  m.mark("output");
  m.write();
  const json& d = m.document()["diagnostics"];
  out << "segre-solve: r=" << s.data.r << " eps=" << fmt(s.data.epsilon) << " C=" << fmt(s.data.C)
      << " n=" << s.grid.n(0) << ", Newton iterations " << sol.iterations << ", defect "
      << fmt(sol.defect, "%.3e") << "\n";
  out << "  min eig c1 " << fmt(d["min_c1_eigenvalue"]) << ", min c2 " << fmt(d["min_c2"])
      << ", min c1^2 - c2 " << fmt(d["min_segre2"]) << "\n";
  out << "  certificate: " << (d["certified"].get<bool>() ? "PASS" : "FAIL") << "\n";
  out << "  wrote " << out_dir.string() << "\n";
  return 0;
}

}  // namespace chernlab::cli
