#pragma once

#include <cstdint>
#include <string_view>

namespace fattree {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Folds run coordinates into one hash, order-sensitive.
class SeedHasher {
 public:
  SeedHasher& add(std::uint64_t v) {
    state_ = splitmix64(state_ ^ splitmix64(v));
    return *this;
  }
  SeedHasher& add(std::string_view s) { return add(fnv1a(s)); }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0x6A09E667F3BCC908ULL;
};

// base_seed XOR hash(coordinates).
template <typename... Coords>
std::uint64_t derive_seed(std::uint64_t base_seed, const Coords&... coords) {
  SeedHasher h;
  (h.add(coords), ...);
  return base_seed ^ h.value();
}

}  // namespace fattree
