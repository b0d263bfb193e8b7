#pragma once

#include <cstddef>
#include <cstdint>

// Keyed randomness primitives shared by the partition function, the mock LM
// and every seeded experiment. Constants and draw order are pinned in
// PROTOCOL.md; changing any of them changes the watermark wire format.

namespace semamark {

inline constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t len);

struct Digest128 {
  std::uint64_t h1 = 0;
  std::uint64_t h2 = 0;
};

// MurmurHash3 x64 128, reference constants.
Digest128 murmur3_x64_128(const void* data, std::size_t len, std::uint64_t seed);

// Seed for stream index i of a batch run (splitmix64 sequence of `base`).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base + (stream + 1) * kGolden64);
}

// xorshift64* stream. All consumers draw through the helpers below so a
// given seed yields one well-defined sequence on every platform.
class Rng64 {
 public:
  explicit Rng64(std::uint64_t seed);

  std::uint64_t next();

  // [0, 1), 53-bit resolution.
  double uniform01();

  // Unbiased integer in [0, n). n must be nonzero.
  std::uint64_t bounded(std::uint64_t n);

  // Standard normal via Box-Muller; second deviate of each pair is cached.
  double gaussian();

 private:
  std::uint64_t state_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace semamark
