#pragma once

// Seeding and random streams.
//
// All randomness derives from a 64-bit master seed. Child seeds are obtained
// with derive_seed(parent, ids...), which folds each id through the
// SplitMix64 finalizer; a layer, a layer pair, a sweep cell or a realization
// each get their own child seed, so no stream depends on how many numbers
// another stream consumed. Engines are std::mt19937_64 (sequence fixed by the
// standard); the bounded-integer and unit-interval helpers below are written
// out because the std distributions are not portable across library vendors.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace mdthresh {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent) noexcept { return parent; }

template <class... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id, Ids... rest) noexcept {
  return derive_seed(splitmix64(parent ^ splitmix64(id + 0x632BE59BD9B4E019ULL)),
                     static_cast<std::uint64_t>(rest)...);
}

/// FNV-1a, for turning stream tags into ids.
constexpr std::uint64_t tag_id(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stateless uniform in [0,1) keyed by (key, a, b).
constexpr double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  return to_unit(splitmix64(splitmix64(key ^ splitmix64(a)) + b));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return to_unit(engine_()); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mdthresh
