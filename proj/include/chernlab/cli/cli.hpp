#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chernlab/cli/commands.hpp"
#include "chernlab/cli/setup.hpp"
#include "chernlab/cli/verify.hpp"
#include "chernlab/io/config.hpp"

namespace chernlab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kValidation = 2, kNonConvergence = 3 };

inline void print_info(std::ostream& os) {
  os << "chernlab " << CHERNLAB_VERSION << "\n"
     << "conventions:\n"
     << "  ddc = sqrt(-1)/(2 pi) d dbar; ddbar fields store the hermitian matrix of ddc phi\n"
     << "  torus: z = x + tau_lat y, (x, y) in [0,1)^2, area form f = vol dx ^ dy\n"
     << "  scalar densities are taken against f (torus) or f1 ^ f2 (bi-torus)\n"
     << "  Delta_f u f = sqrt(-1) d dbar u (half the Riemannian Laplacian of the flat metric f)\n"
     << "  state: h = h0 e^{-psi}, f2 = e^{-psi2}, omega_Sigma = f + sqrt(-1) d dbar phiK\n"
     << "field format CWF1:\n"
     << "  bytes 'CWF1', u32 rank, u32 dims[rank], little-endian f64 values, row-major\n"
     << "  torus fields: rank 2 (n, n), x index slowest\n"
     << "  bi-torus fields: rank 4 (n1, n1, n2, n2); (1,1)-forms: rank 5 with leading\n"
     << "  component axis (b11, b22, Re b12, Im b12)\n"
     << "exit codes: 0 success, 1 verification failed, 2 invalid input, 3 solver failure\n";
}

/// Entry point shared by the executable and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"chernlab: Chern-Weil form and vortex laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CHERNLAB_VERSION));

  std::string config_path, out_dir = "out", state_dir;
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "flat key = value config file");
    if (needs_out) sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--n", n, "grid points per direction (overrides config)");
    sub->add_option("--seed", seed, "seed for synthetic data (overrides config)");
    sub->add_option("--tol", tol, "Newton residual tolerance (overrides config)");
  };
  CLI::App* vortex = app.add_subcommand("vortex-solve", "alpha = 0 vortex pipeline");
  CLI::App* cont = app.add_subcommand("cym-continue", "continuation in the coupling alpha");
  CLI::App* repr = app.add_subcommand("represent-ch2", "represent a volume form by Omega^2 + alpha ch2");
  CLI::App* segre = app.add_subcommand("segre-solve", "second Segre form Monge-Ampere pipeline");
  CLI::App* verify = app.add_subcommand("verify", "identity suite, or replay of a stored run");
  CLI::App* info = app.add_subcommand("info", "print conventions and file format");
  for (CLI::App* s : {vortex, cont, repr, segre}) add_common(s, true);
  add_common(verify, false);
  verify->add_option("--state", state_dir, "re-verify the diagnostics stored in this output directory");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << CHERNLAB_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kValidation;
  }

  const Overrides ov{n, seed, tol};
  try {
    const io::Config cfg = config_path.empty() ? io::Config{} : io::Config::load(config_path);
    if (info->parsed()) {
      print_info(out);
      return kOk;
    }
    if (verify->parsed()) {
      const std::vector<Check> checks =
          state_dir.empty() ? identity_suite(n.value_or(32), seed.value_or(1)) : verify_state(state_dir);
      return print_checks(checks, out) ? kOk : kCheckFailed;
    }
    std::filesystem::create_directories(out_dir);
    if (vortex->parsed()) return cmd_vortex_solve(resolve_torus(cfg, ov), out_dir, out);
    if (cont->parsed()) return cmd_cym_continue(resolve_torus(cfg, ov), out_dir, out);
    if (repr->parsed()) return cmd_represent_ch2(resolve_torus(cfg, ov), out_dir, out);
    if (segre->parsed()) return cmd_segre_solve(resolve_segre(cfg, ov), out_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_solver_failure() ? kNonConvergence : kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed manifest or config: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

inline int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

}  // namespace chernlab::cli
