#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/torus_grid.hpp"
#include "chernlab/io/cwf1.hpp"

#ifndef CHERNLAB_VERSION
#define CHERNLAB_VERSION "0.1.0"
#endif

namespace chernlab::io {

using json = nlohmann::json;

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string describe(const TorusGrid& g) {
  return "torus n=" + std::to_string(g.n()) + " tau=" + format_double(g.lattice().tau().real()) +
         "," + format_double(g.lattice().tau().imag()) + " vol=" + format_double(g.vol());
}

inline std::string describe(const BiTorusGrid& g) {
  std::string s = "bitorus";
  for (int f = 0; f < 2; ++f)
    s += " n" + std::to_string(f + 1) + "=" + std::to_string(g.n(f)) + " tau" +
         std::to_string(f + 1) + "=" + format_double(g.lattice(f).tau().real()) + "," +
         format_double(g.lattice(f).tau().imag()) + " area" + std::to_string(f + 1) + "=" +
         format_double(g.area(f));
  return s;
}

/// Record of one CLI run. Everything except "timings" is a pure function of
/// the command and its resolved configuration.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path dir)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["version"] = CHERNLAB_VERSION;
    doc_["config"] = json::object();
    doc_["grids"] = json::object();
    doc_["outputs"] = json::array();
    doc_["diagnostics"] = json::object();
    doc_["timings"] = json::object();
  }

  json& config() { return doc_["config"]; }
  json& diagnostics() { return doc_["diagnostics"]; }
  json& entry(const std::string& key) { return doc_[key]; }
  const json& document() const { return doc_; }
  const std::filesystem::path& dir() const { return dir_; }

  template <class Grid>
  void add_grid(const std::string& name, const Grid& g) {
    const std::string d = describe(g);
    doc_["grids"][name] = {{"description", d}, {"fnv1a", hex64(fnv1a(d))}};
  }

  void add_field(const std::string& file, const CwfArray& a) {
    const std::string bytes = encode_cwf1(a);
    std::ofstream out(dir_ / file, std::ios::binary | std::ios::trunc);
    require(bool(out), ErrorKind::Io, "cannot write " + (dir_ / file).string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
    doc_["outputs"].push_back({{"file", file}, {"fnv1a", hex64(fnv1a(bytes))}});
  }

  void add_text(const std::string& file, const std::string& text) {
    std::ofstream out(dir_ / file, std::ios::binary | std::ios::trunc);
    require(bool(out), ErrorKind::Io, "cannot write " + (dir_ / file).string());
    out << text;
    doc_["outputs"].push_back({{"file", file}, {"fnv1a", hex64(fnv1a(text))}});
  }

  /// Seconds since the previous mark (or construction).
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    doc_["timings"][stage] = std::chrono::duration<double>(now - start_).count();
    start_ = now;
  }

  void write() const {
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    require(bool(out), ErrorKind::Io, "cannot write manifest in " + dir_.string());
    out << doc_.dump(2) << "\n";
  }

  static json load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    require(bool(in), ErrorKind::Io, "no manifest.json in " + dir.string());
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Io, std::string("malformed manifest: ") + e.what());
    }
  }

 private:
  std::filesystem::path dir_;
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

/// Columns of equal length as CSV with a header row.
inline std::string csv_table(const std::vector<std::string>& headers,
                             const std::vector<std::vector<double>>& columns) {
  require(headers.size() == columns.size() && !columns.empty(), ErrorKind::InvalidArgument,
          "one header per column");
  std::string out;
  for (std::size_t c = 0; c < headers.size(); ++c) out += (c ? "," : "") + headers[c];
  out += "\n";
  for (std::size_t r = 0; r < columns[0].size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      require(columns[c].size() == columns[0].size(), ErrorKind::InvalidArgument,
              "ragged CSV columns");
      out += (c ? "," : "") + format_double(columns[c][r]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace chernlab::io
