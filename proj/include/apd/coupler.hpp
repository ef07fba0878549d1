#pragma once

#include <cstdint>
#include <span>

#include "apd/core.hpp"

namespace apd {

/// Weight R of the marginal model in the multiplicative mixture.
class MixtureWeight {
 public:
  explicit MixtureWeight(double r);
  double value() const noexcept { return r_; }

 private:
  double r_;
};

/// Gumbel-argmax: argmax_i (log p_i + noise_i). Zero-probability entries
/// never win; ties resolve to the lowest index.
TokenId coupled_sample(const TokenDistribution& dist, std::span<const double> noise_row);

/// Thrown when the two mixture components share no support.
class DisjointSupports : public DegenerateDistribution {
 public:
  DisjointSupports() : DegenerateDistribution("disjoint supports") {}
};

/// Normalized p_marginal^R * p_joint^(1-R). A weight of exactly 0 drops its
/// component, so R = 0 returns `joint` and R = 1 returns `marginal` verbatim.
TokenDistribution mixture_logits(const TokenDistribution& marginal, const TokenDistribution& joint,
                                 MixtureWeight R);

/// Fraction of `samples` shared noise rows on which coupled_sample(p, .)
/// and coupled_sample(q, .) disagree.
double coupling_disagreement_rate(const TokenDistribution& p, const TokenDistribution& q,
                                  std::uint64_t samples, std::uint64_t seed);

}  // namespace apd
