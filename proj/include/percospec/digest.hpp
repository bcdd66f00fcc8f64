#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace percospec {

/// 64-bit FNV-1a; identifies inputs in reports, not a security hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_digest(std::string_view bytes) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buffer;
}

}  // namespace percospec
