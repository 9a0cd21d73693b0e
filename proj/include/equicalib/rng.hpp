#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace equicalib {

/// SplitMix64 finalizer; used as the mixing function of the counter-based
/// seed tree below.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A node in a splittable seed tree. Children are derived purely from
/// (parent seed, child key), so the seed a task receives never depends on the
/// order in which other tasks were scheduled.
class SeedTree {
public:
  constexpr explicit SeedTree(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] constexpr SeedTree child(std::uint64_t key) const noexcept {
    return SeedTree(splitmix64(seed_ ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
  }
  [[nodiscard]] constexpr SeedTree child(std::string_view tag) const noexcept {
    return child(hash_tag(tag));
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] std::mt19937_64 engine() const { return std::mt19937_64(splitmix64(seed_)); }

private:
  std::uint64_t seed_;
};

} // namespace equicalib
