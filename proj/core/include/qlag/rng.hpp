#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string_view>

namespace qlag {

/// Seeded random stream. Every logical task owns one; streams are never shared.
///
/// Substreams are derived from a root seed plus a list of tags (experiment id,
/// replicate, purpose, ...) by hashing, so any grid point or Monte-Carlo oracle
/// can be regenerated on its own without replaying unrelated draws.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Substream keyed by a purpose label and an optional counter.
  static RandomStream derive(std::uint64_t root, std::string_view purpose,
                             std::uint64_t index = 0);
  static RandomStream derive(std::uint64_t root,
                             std::initializer_list<std::string_view> tags,
                             std::uint64_t index = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit mixing used for substream derivation.
std::uint64_t mix_seed(std::uint64_t state, std::string_view tag);
std::uint64_t mix_seed(std::uint64_t state, std::uint64_t value);

}  // namespace qlag
