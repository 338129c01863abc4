#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/torus_grid.hpp"

namespace chernlab::io {

/// Dense f64 array as stored in a CWF1 file: magic "CWF1", u32 rank,
/// u32 dims[rank], then little-endian f64 values in row-major order.
struct CwfArray {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  std::size_t count() const {
    std::size_t c = 1;
    for (auto d : dims) c *= d;
    return c;
  }
};

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(char((v >> (8 * b)) & 0xffu));
}

inline void put_f64(std::string& buf, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  for (int b = 0; b < 8; ++b) buf.push_back(char((bits >> (8 * b)) & 0xffu));
}

inline std::uint64_t get_le(const std::string& buf, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b)
    v |= std::uint64_t(static_cast<unsigned char>(buf[pos + b])) << (8 * b);
  return v;
}

}  // namespace detail

inline std::string encode_cwf1(const CwfArray& a) {
  require(a.values.size() == a.count(), ErrorKind::InvalidArgument,
          "CWF1 value count does not match dims");
  std::string buf = "CWF1";
  detail::put_u32(buf, std::uint32_t(a.dims.size()));
  for (auto d : a.dims) detail::put_u32(buf, d);
  buf.reserve(buf.size() + 8 * a.values.size());
  for (double x : a.values) detail::put_f64(buf, x);
  return buf;
}

inline CwfArray decode_cwf1(const std::string& buf) {
  require(buf.size() >= 8 && buf.compare(0, 4, "CWF1") == 0, ErrorKind::Io, "not a CWF1 stream");
  CwfArray a;
  const auto rank = std::uint32_t(detail::get_le(buf, 4, 4));
  std::size_t pos = 8;
  require(buf.size() >= pos + 4 * std::size_t(rank), ErrorKind::Io, "truncated CWF1 header");
  for (std::uint32_t k = 0; k < rank; ++k, pos += 4)
    a.dims.push_back(std::uint32_t(detail::get_le(buf, pos, 4)));
  const std::size_t count = a.count();
  require(buf.size() == pos + 8 * count, ErrorKind::Io, "CWF1 payload size mismatch");
  a.values.resize(count);
  for (std::size_t i = 0; i < count; ++i, pos += 8) {
    const std::uint64_t bits = detail::get_le(buf, pos, 8);
    std::memcpy(&a.values[i], &bits, sizeof bits);
  }
  return a;
}

inline void write_cwf1(const std::filesystem::path& path, const CwfArray& a) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const std::string buf = encode_cwf1(a);
  out.write(buf.data(), std::streamsize(buf.size()));
  require(bool(out), ErrorKind::Io, "write failed for " + path.string());
}

inline CwfArray read_cwf1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::Io, "cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_cwf1(buf);
}

// Field <-> array adapters. Grid index order already is row-major.

inline CwfArray to_array(const TorusGrid& g, const Field& u) {
  g.check_field(u, "field");
  const auto n = std::uint32_t(g.n());
  return {{n, n}, std::vector<double>(u.data(), u.data() + u.size())};
}

inline CwfArray to_array(const BiTorusGrid& g, const Field& u) {
  g.check_field(u, "field");
  const auto n1 = std::uint32_t(g.n(0)), n2 = std::uint32_t(g.n(1));
  return {{n1, n1, n2, n2}, std::vector<double>(u.data(), u.data() + u.size())};
}

/// Form11Field as a rank-5 array with leading component axis
/// (b11, b22, Re b12, Im b12); b21 is recovered as conj(b12).
inline CwfArray to_array(const BiTorusGrid& g, const Form11Field& b) {
  g.check_form(b, "form");
  const auto n1 = std::uint32_t(g.n(0)), n2 = std::uint32_t(g.n(1));
  CwfArray a{{4, n1, n1, n2, n2}, {}};
  const Eigen::Index N = g.size();
  a.values.resize(4 * std::size_t(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    a.values[i] = b.b11(i);
    a.values[N + i] = b.b22(i);
    a.values[2 * N + i] = b.b12(i).real();
    a.values[3 * N + i] = b.b12(i).imag();
  }
  return a;
}

inline Field field_from(const TorusGrid& g, const CwfArray& a) {
  const auto n = std::uint32_t(g.n());
  require(a.dims == std::vector<std::uint32_t>{n, n}, ErrorKind::GridMismatch,
          "CWF1 dims do not match the torus grid");
  return Eigen::Map<const Field>(a.values.data(), Eigen::Index(a.values.size()));
}

inline Field field_from(const BiTorusGrid& g, const CwfArray& a) {
  const auto n1 = std::uint32_t(g.n(0)), n2 = std::uint32_t(g.n(1));
  require(a.dims == std::vector<std::uint32_t>{n1, n1, n2, n2}, ErrorKind::GridMismatch,
          "CWF1 dims do not match the bi-torus grid");
  return Eigen::Map<const Field>(a.values.data(), Eigen::Index(a.values.size()));
}

inline Form11Field form_from(const BiTorusGrid& g, const CwfArray& a) {
  const auto n1 = std::uint32_t(g.n(0)), n2 = std::uint32_t(g.n(1));
  require(a.dims == std::vector<std::uint32_t>{4, n1, n1, n2, n2}, ErrorKind::GridMismatch,
          "CWF1 dims do not match a (1,1)-form on the bi-torus grid");
  const Eigen::Index N = g.size();
  Form11Field b = Form11Field::zero(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    b.b11(i) = a.values[i];
    b.b22(i) = a.values[N + i];
    b.b12(i) = {a.values[2 * N + i], a.values[3 * N + i]};
  }
  b.b21 = b.b12.conjugate();
  return b;
}

/// FNV-1a over the encoded bytes; used as a content hash in run manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xf];
  return s;
}

}  // namespace chernlab::io
