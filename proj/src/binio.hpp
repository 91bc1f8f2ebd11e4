#pragma once

// Little-endian primitives for the SGBG / SGSM containers.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

#include "sigseg/error.hpp"

namespace sigseg::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

inline void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::MalformedFile, "truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::MalformedFile, "truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char b[4] = {};
  if (!in.read(b, 4) || std::string_view(b, 4) != magic) {
    throw Error(ErrorCode::MalformedFile, "expected magic " + std::string(magic));
  }
}

}  // namespace sigseg::binio
