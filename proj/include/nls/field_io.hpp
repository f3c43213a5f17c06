#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nls/complex_field.hpp"

namespace nls {

// Binary field dump, all integers and floats little-endian:
//   "NLSF" | u32 version (=1) | u8 dim | u64 n_per_axis | f64 half_width
//   | u8 space (0 physical, 1 frequency) | (re, im) f64 pairs, row-major.

inline constexpr std::uint32_t field_format_version = 1;

namespace detail {

template <class UInt>
void put_le(std::ostream& os, UInt v) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  os.write(bytes, sizeof(UInt));
}

template <class UInt>
UInt get_le(std::istream& is) {
  unsigned char bytes[sizeof(UInt)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw std::runtime_error("truncated field dump");
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double x) { put_le(os, std::bit_cast<std::uint64_t>(x)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

}  // namespace detail

inline void write_field(std::ostream& os, const ComplexField& f) {
  const auto& g = f.grid();
  os.write("NLSF", 4);
  detail::put_le<std::uint32_t>(os, field_format_version);
  detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(g.dim()));
  detail::put_le<std::uint64_t>(os, g.n_per_axis());
  detail::put_f64(os, g.half_width());
  detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(f.space()));
  for (const auto& z : f.values()) {
    detail::put_f64(os, z.real());
    detail::put_f64(os, z.imag());
  }
  if (!os) throw std::runtime_error("failed writing field dump");
}

inline ComplexField read_field(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NLSF", 4) != 0) {
    throw std::runtime_error("not a field dump (bad magic)");
  }
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != field_format_version) {
    throw std::runtime_error("unsupported field dump version " + std::to_string(version));
  }
  const int dim = detail::get_le<std::uint8_t>(is);
  const auto n = detail::get_le<std::uint64_t>(is);
  const double half_width = detail::get_f64(is);
  const auto tag = detail::get_le<std::uint8_t>(is);
  if (tag > 1) throw std::runtime_error("bad space tag in field dump");

  SpectralGrid grid(dim, n, half_width);
  ComplexField f(grid, tag == 0 ? Space::physical : Space::frequency);
  for (auto& z : f.values()) {
    const double re = detail::get_f64(is);
    const double im = detail::get_f64(is);
    z = Complex(re, im);
  }
  return f;
}

inline void save_field(const std::filesystem::path& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(os, f);
}

inline ComplexField load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_field(is);
}

}  // namespace nls
