#include "apd/gumbel.hpp"

#include <cmath>
#include <stdexcept>

namespace apd {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr double kEps = 0x1p-53;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double counter_uniform(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                       std::uint32_t stream) noexcept {
  const auto out = philox4x32({c0, c1, c2, stream},
                              {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const double u = static_cast<double>(bits >> 11) * 0x1p-53;
  if (u < kEps) return kEps;
  if (u > 1.0 - kEps) return 1.0 - kEps;
  return u;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  const auto out = philox4x32({static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(index >> 32), 0u, 0xFFFFFFFFu},
                              {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::span<const double> GumbelDraw::row(std::size_t position) const {
  if (position >= positions_) throw std::out_of_range("gumbel row out of range");
  return std::span<const double>(noise_).subspan(position * vocab_size_, vocab_size_);
}

class GumbelBuilder {
 public:
  template <typename Key>
  static GumbelDraw build(std::uint64_t seed, std::uint64_t iteration, std::size_t positions,
                          const Vocab& vocab, NoiseStream stream, Key key) {
    if (positions < 1) throw ValidationError("gumbel draw needs at least one position");
    GumbelDraw draw;
    draw.seed_ = seed;
    draw.iteration_ = iteration;
    draw.positions_ = positions;
    draw.vocab_size_ = vocab.size();
    draw.noise_.resize(positions * vocab.size());
    for (std::size_t i = 0; i < positions; ++i) {
      const auto [c0, c1] = key(i);
      for (std::size_t v = 0; v < vocab.size(); ++v) {
        const double u = counter_uniform(seed, c0, c1, static_cast<std::uint32_t>(v),
                                         static_cast<std::uint32_t>(stream));
        draw.noise_[i * vocab.size() + v] = -std::log(-std::log(u));
      }
    }
    return draw;
  }
};

GumbelDraw fresh_gumbel(std::uint64_t seed, std::uint64_t iteration, std::size_t positions,
                        const Vocab& vocab, NoiseStream stream) {
  return GumbelBuilder::build(seed, iteration, positions, vocab, stream, [&](std::size_t i) {
    return std::pair{static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(i)};
  });
}

GumbelDraw positional_gumbel(std::uint64_t seed, std::uint64_t iteration, std::size_t start,
                             std::size_t positions, const Vocab& vocab, NoiseStream stream) {
  return GumbelBuilder::build(seed, iteration, positions, vocab, stream, [&](std::size_t i) {
    return std::pair{static_cast<std::uint32_t>(start + i), std::uint32_t{0}};
  });
}

}  // namespace apd
