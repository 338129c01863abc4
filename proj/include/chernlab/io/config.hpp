#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chernlab/errors.hpp"

namespace chernlab::io {

/// Flat key-value configuration.
///
///   # comment to end of line
///   key = value
///   alphas = 0, 2.5, 5
///
/// Keys are [a-z0-9_]+, each may appear once, values are trimmed strings
/// interpreted on access. Lists are comma separated.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>") {
    Config c;
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = source + ":" + std::to_string(lineno);
      require(eq != std::string::npos, ErrorKind::InvalidArgument, where + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      require(valid_key(key), ErrorKind::InvalidArgument, where + ": bad key '" + key + "'");
      require(!value.empty(), ErrorKind::InvalidArgument, where + ": empty value for " + key);
      require(!c.values_.count(key), ErrorKind::InvalidArgument, where + ": duplicate key " + key);
      c.values_[key] = value;
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(bool(in), ErrorKind::Io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && p == s.data() + s.size(), ErrorKind::InvalidArgument,
            "key " + key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
  }

  /// Rejects keys outside the accepted set, so typos do not pass silently.
  void check_known(const std::set<std::string>& accepted) const {
    for (const auto& [k, v] : values_)
      require(accepted.count(k) != 0, ErrorKind::InvalidArgument, "unknown config key " + k);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char ch : k)
      if (!((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_')) return false;
    return true;
  }

  static double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && p == s.data() + s.size() && !s.empty(),
            ErrorKind::InvalidArgument, "key " + key + ": expected a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace chernlab::io
