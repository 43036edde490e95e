#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace grue {

// 64-bit FNV-1a. Used everywhere a stable, platform-independent digest is
// needed (state hashes, cell keys, config digests, feature hashing).
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ull;

constexpr std::uint64_t fnv1a64(const unsigned char* data, std::size_t size,
                                std::uint64_t seed = kFnvOffset) noexcept {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<std::uint64_t>(data[i]);
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = kFnvOffset) noexcept {
  return fnv1a64(reinterpret_cast<const unsigned char*>(s.data()), s.size(), seed);
}

// Incremental hasher so composite values can be folded field by field.
class Hasher {
 public:
  void mix_bytes(const void* data, std::size_t size) noexcept {
    h_ = fnv1a64(static_cast<const unsigned char*>(data), size, h_);
  }
  void mix(std::string_view s) noexcept {
    mix_u32(static_cast<std::uint32_t>(s.size()));
    mix_bytes(s.data(), s.size());
  }
  void mix_u8(std::uint8_t v) noexcept { mix_bytes(&v, 1); }
  void mix_u32(std::uint32_t v) noexcept { mix_bytes(&v, 4); }
  void mix_u64(std::uint64_t v) noexcept { mix_bytes(&v, 8); }
  void mix_i64(std::int64_t v) noexcept { mix_u64(static_cast<std::uint64_t>(v)); }
  std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = kFnvOffset;
};

// Order-sensitive combination of two digests (splitmix-style finalizer).
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace grue
