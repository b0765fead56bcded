#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lrp {

// Keyed counter generator: output(i) = finalize(key + i*GOLDEN), the
// splitmix64 stream with initial state `key`. The algorithm is pinned by id
// so serialized fixtures stay valid across library upgrades.
inline constexpr std::string_view kRngAlgorithm = "sm64ctr/v1";

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Seed record: generator id plus root value. Streams for replicas/purposes
// are derived, never shared.
struct SeedRecord {
  std::uint64_t seed = 0;
  std::string algorithm = std::string(kRngAlgorithm);

  void require_supported() const {
    if (algorithm != kRngAlgorithm)
      throw std::invalid_argument("unsupported rng algorithm id: " + algorithm);
  }
};

// Key derivation: fold tag words/bytes into the parent key through the same
// finalizer. derive(k, a) != derive(k, b) for a != b with overwhelming
// probability; the tree (root -> experiment -> replica -> purpose) is the
// documented seed-derivation scheme.
inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t word) {
  return mix64(parent ^ (word + kGolden + (parent << 6) + (parent >> 2)));
}

inline std::uint64_t derive_key(std::uint64_t parent, std::string_view tag) {
  std::uint64_t k = mix64(parent ^ 0x243f6a8885a308d3ULL);
  for (unsigned char c : tag) k = derive_key(k, c);
  return derive_key(k, tag.size());
}

class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}
  explicit Rng(const SeedRecord& rec) : key_(rec.seed) { rec.require_supported(); }

  std::uint64_t next_u64() { return mix64(key_ + kGolden * ++ctr_); }

  // uniform in [0,1), 53-bit resolution
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1], safe as a log() argument
  double next_unit_pos() { return 1.0 - next_unit(); }

  bool bernoulli(double p) { return next_unit() < p; }

  // unbiased uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = next_u64(); } while (x >= limit);
    return x % n;
  }

  // number of failures before the next success in Bernoulli(p) trials
  std::uint64_t geometric_gap(double p) {
    if (p >= 1.0) return 0;
    const double g = std::floor(std::log(next_unit_pos()) / std::log1p(-p));
    if (g >= 9.2e18) return UINT64_MAX;
    return static_cast<std::uint64_t>(g);
  }

  // Knuth product method; intended for the small per-cell means of the
  // continuum sampler.
  std::uint64_t poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson mean < 0");
    if (mean > 64.0) throw std::invalid_argument("poisson mean too large for product method");
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = next_unit_pos();
    while (prod > limit) {
      ++k;
      prod *= next_unit_pos();
    }
    return k;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace lrp
