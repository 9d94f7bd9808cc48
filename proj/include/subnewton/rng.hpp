#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace subnewton {

/// Counter-based SplitMix64 stream: output k is mix(key + k * golden_gamma).
/// Streams are reproducible bit for bit across platforms; child streams are
/// keyed by hashing the parent key with a label.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent child stream identified by a label and an optional index.
  Rng derive(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  /// +1 or -1 with equal probability.
  double rademacher();

  /// k distinct indices from [0, n) in sampling order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  void shuffle(std::vector<std::size_t>& v);

  static std::uint64_t mix64(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Integer seed for a labelled child stream, for places that store plain
/// seeds (configs, grid cells). Rng(derive_seed(s, label, i)) is reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

}  // namespace subnewton
