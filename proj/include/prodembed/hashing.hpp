#pragma once

#include <cstdint>
#include <string_view>

namespace prodembed::hashing {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b));
}

// Maps 64 random bits onto the open interval (-1, 1). The numerator is an odd
// integer in [-(2^53 - 1), 2^53 - 1], so both conversion and division are exact.
constexpr double to_open_unit_interval(std::uint64_t bits) noexcept {
  const auto r = static_cast<std::int64_t>(bits >> 11);
  constexpr std::int64_t two53 = std::int64_t{1} << 53;
  return static_cast<double>(2 * r + 1 - two53) / static_cast<double>(two53);
}

// Small deterministic generator used wherever the library needs a stream of
// random integers (synthetic markets, random baseline). Fully specified, so
// output does not depend on the standard library implementation.
class SplitMixStream {
 public:
  explicit constexpr SplitMixStream(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection; bound must be positive.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  // Uniform double in [0, 1).
  constexpr double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace prodembed::hashing
