#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "chernlab/cli/cli.hpp"
#include "chernlab/grid/random_field.hpp"
#include "chernlab/io/config.hpp"
#include "chernlab/io/cwf1.hpp"
#include "chernlab/io/manifest.hpp"

using namespace chernlab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(CHERNLAB_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chernlab_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = chernlab::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

}  // namespace

TEST(Cwf1, ByteLayout) {
  const io::CwfArray a{{2, 1}, {1.0, -2.5}};
  const std::string b = io::encode_cwf1(a);
  ASSERT_EQ(b.size(), 4u + 4u + 8u + 16u);
  EXPECT_EQ(b.substr(0, 4), "CWF1");
  // rank 2, dims 2 and 1, little endian
  EXPECT_EQ(b.substr(4, 12), std::string("\x02\0\0\0\x02\0\0\0\x01\0\0\0", 12));
  // 1.0 = 0x3ff0000000000000, -2.5 = 0xc004000000000000
  EXPECT_EQ(b.substr(16, 8), std::string("\0\0\0\0\0\0\xf0\x3f", 8));
  EXPECT_EQ(b.substr(24, 8), std::string("\0\0\0\0\0\0\x04\xc0", 8));
}

TEST(Cwf1, RoundTripsAndRejectsBadStreams) {
  const TorusGrid g(8, Lattice({0.0, 1.0}), 2.0);
  RandomSmooth rng(3);
  const Field u = rng.torus(g, 3, 1.0);
  const fs::path dir = scratch("roundtrip");
  io::write_cwf1(dir / "u.cwf", io::to_array(g, u));
  const Field v = io::field_from(g, io::read_cwf1(dir / "u.cwf"));
  EXPECT_EQ((u - v).abs().maxCoeff(), 0.0);

  const std::string good = io::encode_cwf1(io::to_array(g, u));
  EXPECT_EQ(kind_of([&] { io::decode_cwf1(good.substr(0, good.size() - 3)); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([&] { io::decode_cwf1("CWF2" + good.substr(4)); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([&] { io::decode_cwf1("CWF"); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([&] { io::read_cwf1(dir / "missing.cwf"); }), ErrorKind::Io);
  const TorusGrid other(16, Lattice({0.0, 1.0}), 2.0);
  EXPECT_EQ(kind_of([&] { io::field_from(other, io::decode_cwf1(good)); }), ErrorKind::GridMismatch);
}

TEST(Cwf1, FormFieldRoundTrip) {
  const BiTorusGrid g(4, Lattice({0.0, 1.0}), 1.0, 6, Lattice({0.3, 0.8}), 2.0);
  RandomSmooth rng(9);
  const Form11Field b = g.ddbar(rng.bitorus(g, 2, 1.0));
  const io::CwfArray a = io::to_array(g, b);
  EXPECT_EQ(a.dims, (std::vector<std::uint32_t>{4, 4, 4, 6, 6}));
  const Form11Field c = io::form_from(g, io::decode_cwf1(io::encode_cwf1(a)));
  EXPECT_EQ((c.b11 - b.b11).abs().maxCoeff(), 0.0);
  EXPECT_EQ((c.b22 - b.b22).abs().maxCoeff(), 0.0);
  EXPECT_EQ((c.b12 - b.b12).abs().maxCoeff(), 0.0);
  EXPECT_LT((c.b21 - b.b21).abs().maxCoeff(), 1e-15);
  const Field u = rng.bitorus(g, 2, 1.0);
  EXPECT_EQ((io::field_from(g, io::to_array(g, u)) - u).abs().maxCoeff(), 0.0);
}

TEST(Config, ParsesAndRejects) {
  const io::Config c = io::Config::parse(
      "# comment\n"
      "tau = 2.5   # trailing\n"
      "\n"
      "alphas = 0, 1.5,3\n"
      "section=theta\n"
      "n = 24\n");
  EXPECT_EQ(c.get_double("tau", 0.0), 2.5);
  EXPECT_EQ(c.get_doubles("alphas"), (std::vector<double>{0.0, 1.5, 3.0}));
  EXPECT_EQ(c.get_string("section", ""), "theta");
  EXPECT_EQ(c.get_int("n", 0), 24);
  EXPECT_EQ(c.get_double("missing", 7.0), 7.0);
  EXPECT_THROW(c.get_int("tau", 0), Error);
  EXPECT_THROW(c.get_double("section", 0.0), Error);
  EXPECT_NO_THROW(c.check_known({"tau", "alphas", "section", "n"}));
  EXPECT_THROW(c.check_known({"tau"}), Error);

  EXPECT_THROW(io::Config::parse("tau = 1\ntau = 2\n"), Error);
  EXPECT_THROW(io::Config::parse("Tau = 1\n"), Error);
  EXPECT_THROW(io::Config::parse("tau =\n"), Error);
  EXPECT_THROW(io::Config::parse("just words\n"), Error);
  EXPECT_THROW(io::Config::parse("tau = 2x\n").get_double("tau", 0.0), Error);
  EXPECT_EQ(kind_of([] { io::Config::load("/nonexistent/chernlab.cfg"); }), ErrorKind::Io);
}

TEST(Manifest, HashAndCsv) {
  EXPECT_EQ(io::hex64(io::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex64(io::fnv1a("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(io::hex64(io::fnv1a("foobar")), "85944171f73967e8");
  EXPECT_EQ(io::csv_table({"x", "y"}, {{0.5, 1.0}, {2.0, -3.0}}), "x,y\n0.5,2\n1,-3\n");
  EXPECT_THROW(io::csv_table({"x", "y"}, {{0.5, 1.0}, {2.0}}), Error);
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}

// ---------------------------------------------------------------------------

TEST(Cli, InfoAndUsageErrors) {
  const CliRun info = invoke({"info"});
  EXPECT_EQ(info.code, 0);
  EXPECT_NE(info.out.find("CWF1"), std::string::npos);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"no-such-command"}).code, 2);
  EXPECT_EQ(invoke({"vortex-solve", "--n", "abc"}).code, 2);
  EXPECT_EQ(invoke({"vortex-solve", "--config", "/nonexistent.cfg"}).code, 2);
}

TEST(Cli, ConfigValidationExitCodes) {
  const fs::path dir = scratch("validation");
  std::ofstream(dir / "bad_key.cfg") << "tau = 2\nbogus = 1\n";
  EXPECT_EQ(invoke({"vortex-solve", "--config", (dir / "bad_key.cfg").string(), "--out", (dir / "a").string()}).code, 2);
  std::ofstream(dir / "infeasible.cfg") << "section = constant\ntau = 2\nd = 20\nn = 16\n";
  EXPECT_EQ(
      invoke({"vortex-solve", "--config", (dir / "infeasible.cfg").string(), "--out", (dir / "b").string()}).code, 2);
}

TEST(Cli, UnreachableToleranceIsSolverFailure) {
  const fs::path dir = scratch("tol");
  const CliRun r = invoke({"vortex-solve", "--config", (kConfigs / "theta.cfg").string(), "--n", "16", "--tol", "1e-30",
                     "--out", dir.string()});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, SmokeAndThresholdNotice) {
  const fs::path dir = scratch("smoke");
  const CliRun r = invoke({"vortex-solve", "--config", (kConfigs / "smoke.cfg").string(), "--out", (dir / "v").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("psi in [-0.519799307845"), std::string::npos) << r.out;

  const CliRun t = invoke({"cym-continue", "--config", (kConfigs / "threshold.cfg").string(), "--out", (dir / "t").string()});
  EXPECT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("truncated at alpha 200"), std::string::npos) << t.out;
  EXPECT_NE(t.out.find("last good alpha 180"), std::string::npos) << t.out;
  const nlohmann::json m = io::RunManifest::load(dir / "t");
  EXPECT_EQ(m["command"], "cym-continue");

  const CliRun v = invoke({"verify", "--state", (dir / "t").string()});
  EXPECT_EQ(v.code, 0) << v.out;
}

TEST(Cli, OutputsAreDeterministic) {
  const fs::path dir = scratch("determinism");
  const std::vector<std::string> base = {"segre-solve", "--config", (kConfigs / "segre.cfg").string(), "--n", "8"};
  for (const char* sub : {"a", "b"}) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out", (dir / sub).string()});
    ASSERT_EQ(invoke(args).code, 0);
  }
  nlohmann::json ma = io::RunManifest::load(dir / "a"), mb = io::RunManifest::load(dir / "b");
  ma.erase("timings");
  mb.erase("timings");
  EXPECT_EQ(ma, mb);
  for (const auto& o : ma["outputs"]) {
    const std::string f = o["file"];
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_EQ(io::hex64(io::fnv1a(slurp(dir / "a" / f))), o["fnv1a"]) << f;
  }
  EXPECT_EQ(invoke({"verify", "--state", (dir / "a").string()}).code, 0);
}

TEST(Cli, TamperedStateFailsVerification) {
  const fs::path dir = scratch("tamper");
  ASSERT_EQ(invoke({"vortex-solve", "--config", (kConfigs / "smoke.cfg").string(), "--out", dir.string()}).code, 0);
  nlohmann::json m = io::RunManifest::load(dir);
  m["diagnostics"]["residual_sup"] = 0.5;
  std::ofstream(dir / "manifest.json") << m.dump(2);
  EXPECT_EQ(invoke({"verify", "--state", dir.string()}).code, 1);
}
