#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace culr {

// 64-bit FNV-1a. Stable across platforms, used for feature hashing.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hex SHA-1 of `"blob <size>\0" + content`, i.e. the id git assigns to a file.
std::string git_blob_hash(std::string_view content);

std::string to_hex(std::uint64_t value);

}  // namespace culr
