#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace ram {

// Anything a kernel draws randomness from. Tests substitute scripted sources
// to force specific paths through a kernel.
template <class R>
concept RandomSource = requires(R& r) {
  { r.uniform() } -> std::convertible_to<double>;
  { r.normal() } -> std::convertible_to<double>;
};

// Per-chain random stream. The stream is fully determined by (seed, stream),
// so replicate k of a run always sees the same numbers regardless of which
// thread executes it.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/seed_seq(seed,stream)/53-bit-uniform/std::normal_distribution";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ram
