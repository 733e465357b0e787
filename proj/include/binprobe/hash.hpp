#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <openssl/evp.h>

namespace binprobe {

/// 64-bit FNV-1a. Stable across platforms, used for seeded corpus splits
/// and fixture keys where cryptographic strength is not needed.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Mix a 64-bit value (splitmix64 finalizer). Turns hash outputs into
/// well-distributed uniform bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Map a (seed, key) pair to a uniform double in [0,1).
inline double hash_to_unit(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = mix64(fnv1a64(key) ^ mix64(seed));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// SHA-256 hex digest; content-addressed cache keys and fixture filenames.
inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace binprobe
