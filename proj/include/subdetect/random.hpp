#pragma once
// Counter-based random streams.
//
// Philox4x32-10 keyed by a 64-bit seed. The 128-bit counter is split into a
// 64-bit stream id and a 64-bit block index, so every (seed, stream) pair is
// an independent sequence and any replication or restart can be regenerated
// without touching the others.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace subdetect {

class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// The raw bijection: 10 Philox rounds of `counter` under `key`.
  static Block encrypt(Block counter, Key key) noexcept;

private:
  void refill() noexcept;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned used_ = 4;
};

/// SplitMix64 finalizer, a bijective 64-bit mixer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for a labelled sub-task (tag) and index pair. Distinct
/// (tag, i, j) give unrelated seeds; the mapping depends only on its inputs.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t i,
                                        std::uint64_t j = 0) noexcept;

/// Uniform integer in [0, bound) without modulo bias.
[[nodiscard]] std::uint64_t uniform_below(Philox4x32& rng, std::uint64_t bound) noexcept;

/// `k` distinct indices drawn uniformly from [0, n), returned sorted.
[[nodiscard]] std::vector<std::size_t> sample_without_replacement(Philox4x32& rng, std::size_t n,
                                                                  std::size_t k);

/// Standard normal draw (Box-Muller on two uniforms; no hidden cache).
[[nodiscard]] double standard_normal(Philox4x32& rng) noexcept;

}  // namespace subdetect
