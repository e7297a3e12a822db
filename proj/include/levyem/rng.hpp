#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace levyem {

// Locates a draw inside the reproducible random-number layout: every chain
// owns one stream derived from (master_seed, chain_index); step_index is the
// position of a chain step, carried for diagnostics (abort reports).
struct SeedPath {
  std::uint64_t master_seed = 0;
  std::uint64_t chain_index = 0;
  std::uint64_t step_index = 0;
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream key for chain `chain_index` under `master_seed`:
//   key = mix64(master_seed ^ mix64(chain_index * phi + c))
// The key then seeds the four xoshiro words through a SplitMix64 sequence.
constexpr std::uint64_t derive_stream_key(std::uint64_t master_seed,
                                          std::uint64_t chain_index) noexcept {
  return mix64(master_seed ^
               mix64(chain_index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

// xoshiro256++ generator. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  static constexpr const char* kGeneratorName = "xoshiro256++ (SplitMix64-seeded)";
  static constexpr const char* kDerivation =
      "key = mix64(seed ^ mix64(chain * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03)); "
      "state[i] = mix64(key + i * 0x9E3779B97F4A7C15), i = 0..3";

  explicit Stream(std::uint64_t key) noexcept {
    for (std::uint64_t i = 0; i < 4; ++i) s_[i] = mix64(key + i * 0x9E3779B97F4A7C15ULL);
  }

  static Stream for_chain(std::uint64_t master_seed, std::uint64_t chain_index) noexcept {
    return Stream(derive_stream_key(master_seed, chain_index));
  }
  static Stream for_path(const SeedPath& path) noexcept {
    return for_chain(path.master_seed, path.chain_index);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept { return to_open_unit((*this)()); }

  static double to_open_unit(std::uint64_t bits) noexcept {
    // 52 bits so that the largest value, 1 - 2^-53, is representable
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
  }

  double exponential() noexcept { return -std::log(uniform()); }

  // Box-Muller; the second variate is discarded so draws stay position-aligned.
  double normal() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * M_PI * uniform());
  }

  void discard(std::uint64_t n) noexcept {
    for (std::uint64_t i = 0; i < n; ++i) (*this)();
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace levyem
