#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "bullysig/error.hpp"

namespace bullysig {

// 64-bit identifiers (fingerprints, hashes) are written as 16 lowercase hex
// digits so that JSON readers without 64-bit integers keep them intact.
inline std::string to_hex(std::uint64_t v) {
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = "0123456789abcdef"[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::uint64_t from_hex(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(0, "invalid hex identifier '" + std::string(s) + "'");
  return v;
}

}  // namespace bullysig
