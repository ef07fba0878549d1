#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apd/core.hpp"

namespace apd {

/// Philox4x32-10 (Salmon et al., SC'11). Stateless: output is a pure
/// function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Uniform in [2^-53, 1 - 2^-53] keyed by (seed, c0, c1, c2, stream).
double counter_uniform(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                       std::uint32_t stream = 0) noexcept;

/// Independent child seed for trial `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Noise streams. Target noise only differs from proposal noise when a
/// decode asks for independent draws.
enum class NoiseStream : std::uint32_t { kShared = 0, kIndependentTarget = 1 };

/// One iteration's worth of standard Gumbel noise, [positions x vocab].
class GumbelDraw {
 public:
  std::uint64_t seed_tag() const noexcept { return seed_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  std::size_t positions() const noexcept { return positions_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::span<const double> row(std::size_t position) const;

  bool operator==(const GumbelDraw&) const = default;

 private:
  friend class GumbelBuilder;
  std::uint64_t seed_ = 0;
  std::uint64_t iteration_ = 0;
  std::size_t positions_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<double> noise_;
};

/// Entry (i, v) is -log(-log u) with u = counter_uniform(seed, iteration, i, v).
/// Row i depends only on (seed, iteration, i), so a wider draw extends a
/// narrower one.
GumbelDraw fresh_gumbel(std::uint64_t seed, std::uint64_t iteration, std::size_t positions,
                        const Vocab& vocab, NoiseStream stream = NoiseStream::kShared);

/// Noise for sequence positions start, start + 1, ...: entry (i, v) uses
/// u = counter_uniform(seed, start + i, 0, v). A position gets the same row
/// in every iteration that covers it. At start == iteration and one
/// position this equals fresh_gumbel.
GumbelDraw positional_gumbel(std::uint64_t seed, std::uint64_t iteration, std::size_t start,
                             std::size_t positions, const Vocab& vocab,
                             NoiseStream stream = NoiseStream::kShared);

}  // namespace apd
