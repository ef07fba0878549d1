#include "apd/coupler.hpp"

#include "apd/gumbel.hpp"

namespace apd {

MixtureWeight::MixtureWeight(double r) : r_(r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("mixture weight must lie in [0, 1]");
}

TokenId coupled_sample(const TokenDistribution& dist, std::span<const double> noise_row) {
  const auto lp = dist.log_probs();
  if (noise_row.size() != lp.size()) throw ValidationError("noise row length differs from vocab");
  TokenId best = 0;
  double best_score = kNegInf;
  bool found = false;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (lp[i] == kNegInf) continue;
    const double score = lp[i] + noise_row[i];
    if (!found || score > best_score) {
      best = static_cast<TokenId>(i);
      best_score = score;
      found = true;
    }
  }
  return best;
}

TokenDistribution mixture_logits(const TokenDistribution& marginal, const TokenDistribution& joint,
                                 MixtureWeight weight) {
  if (marginal.size() != joint.size()) throw ValidationError("mixture over different vocabularies");
  const double R = weight.value();
  if (R == 0.0) return joint;
  if (R == 1.0) return marginal;
  const auto m = marginal.log_probs();
  const auto j = joint.log_probs();
  std::vector<double> raw(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    raw[i] = (m[i] == kNegInf || j[i] == kNegInf) ? kNegInf : R * m[i] + (1.0 - R) * j[i];
  }
  try {
    return normalize_logits(raw);
  } catch (const DegenerateDistribution&) {
    throw DisjointSupports();
  }
}

double coupling_disagreement_rate(const TokenDistribution& p, const TokenDistribution& q,
                                  std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("need at least one sample");
  if (p.size() != q.size()) throw ValidationError("distributions over different vocabularies");
  const Vocab vocab = Vocab::anonymous(p.size());
  std::uint64_t disagreements = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const GumbelDraw draw = fresh_gumbel(seed, s, 1, vocab);
    if (coupled_sample(p, draw.row(0)) != coupled_sample(q, draw.row(0))) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(samples);
}

}  // namespace apd
