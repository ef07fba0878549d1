#include "apd/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace apd {

Vocab::Vocab(std::vector<std::string> names, std::optional<TokenId> eos)
    : names_(std::move(names)), eos_(eos) {
  if (names_.size() < 2) {
    throw ValidationError("vocabulary needs at least 2 tokens");
  }
  if (eos_ && *eos_ >= names_.size()) {
    throw ValidationError("eos id outside vocabulary");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ValidationError("empty token name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw ValidationError("duplicate token name '" + names_[i] + "'");
    }
  }
}

Vocab Vocab::anonymous(std::size_t size, std::optional<TokenId> eos) {
  std::vector<std::string> names;
  names.reserve(size);
  for (std::size_t i = 0; i < size; ++i) names.push_back("t" + std::to_string(i));
  return Vocab(std::move(names), eos);
}

const std::string& Vocab::name(TokenId id) const {
  if (!contains(id)) throw ValidationError("token id " + std::to_string(id) + " out of vocabulary");
  return names_[id];
}

TokenId Vocab::id_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown token '" + name + "'");
  return static_cast<TokenId>(it - names_.begin());
}

void Vocab::check_sequence(std::span<const TokenId> tokens) const {
  for (TokenId t : tokens) {
    if (!contains(t)) {
      throw ValidationError("token id " + std::to_string(t) + " out of vocabulary of size " +
                            std::to_string(size()));
    }
  }
}

double logsumexp(std::span<const double> xs) noexcept {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) {
    if (x != kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}

TokenDistribution TokenDistribution::from_log_probs(std::vector<double> log_probs) {
  double total = 0.0;
  for (double lp : log_probs) {
    if (std::isnan(lp) || lp > 0.0) throw ValidationError("log-probability out of range");
    total += std::exp(lp);
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw ValidationError("distribution does not sum to 1");
  }
  return TokenDistribution(std::move(log_probs));
}

TokenDistribution TokenDistribution::from_probs(std::span<const double> probs) {
  std::vector<double> lp;
  lp.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability out of range");
    lp.push_back(p == 0.0 ? kNegInf : std::log(p));
  }
  return from_log_probs(std::move(lp));
}

TokenDistribution TokenDistribution::point_mass(std::size_t size, TokenId token) {
  std::vector<double> lp(size, kNegInf);
  lp.at(token) = 0.0;
  return TokenDistribution(std::move(lp));
}

TokenDistribution TokenDistribution::uniform(std::size_t size) {
  return TokenDistribution(std::vector<double>(size, -std::log(static_cast<double>(size))));
}

double TokenDistribution::prob(TokenId id) const { return std::exp(log_probs_.at(id)); }

std::vector<double> TokenDistribution::probs() const {
  std::vector<double> p(log_probs_.size());
  std::transform(log_probs_.begin(), log_probs_.end(), p.begin(),
                 [](double lp) { return std::exp(lp); });
  return p;
}

TokenId TokenDistribution::argmax() const noexcept {
  return static_cast<TokenId>(std::max_element(log_probs_.begin(), log_probs_.end()) -
                              log_probs_.begin());
}

std::optional<TokenId> TokenDistribution::point_mass_token() const noexcept {
  const TokenId top = argmax();
  if (log_probs_[top] != 0.0) return std::nullopt;
  for (std::size_t i = 0; i < log_probs_.size(); ++i) {
    if (i != top && log_probs_[i] != kNegInf) return std::nullopt;
  }
  return top;
}

TokenDistribution normalize_logits(std::span<const double> raw) {
  const double z = logsumexp(raw);
  if (z == kNegInf) throw DegenerateDistribution("degenerate distribution");
  std::vector<double> lp(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    lp[i] = raw[i] == kNegInf ? kNegInf : raw[i] - z;
  }
  return TokenDistribution(std::move(lp));
}

TokenDistribution apply_temperature_top_p(const TokenDistribution& dist, double temperature,
                                          double top_p) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("top_p must lie in (0, 1]");

  std::vector<double> lp(dist.log_probs().begin(), dist.log_probs().end());
  if (temperature != 1.0) {
    for (double& x : lp) x /= temperature;
  }
  TokenDistribution scaled = normalize_logits(lp);
  if (top_p == 1.0) return scaled;

  std::vector<std::size_t> order(lp.size());
  std::iota(order.begin(), order.end(), 0);
  const auto slp = scaled.log_probs();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return slp[a] > slp[b]; });

  std::vector<double> kept(lp.size(), kNegInf);
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    kept[idx] = slp[idx];
    cumulative += std::exp(slp[idx]);
    if (cumulative >= top_p - 1e-12) break;
  }
  return normalize_logits(kept);
}

double total_variation(const TokenDistribution& p, const TokenDistribution& q) {
  if (p.size() != q.size()) throw ValidationError("distributions over different vocabularies");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::abs(std::exp(p.log_probs()[i]) - std::exp(q.log_probs()[i]));
  }
  return 0.5 * s;
}

void DecoderConfig::validate() const {
  if (!(R >= 0.0 && R <= 1.0)) throw ValidationError("R must lie in [0, 1]");
  if (W < 1) throw ValidationError("W must be at least 1");
  if (M < 1) throw ValidationError("M must be at least 1");
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  if (M > n_max) throw ValidationError("M must not exceed n_max");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("top_p must lie in (0, 1]");
}

double DecodeTrace::total_cost() const noexcept {
  return std::accumulate(iteration_costs.begin(), iteration_costs.end(), 0.0);
}

double DecodeTrace::mean_parallel_tokens() const noexcept {
  if (groups.empty()) return 0.0;
  return static_cast<double>(tokens.size()) / static_cast<double>(groups.size());
}

void DecodeTrace::check_invariants() const {
  if (groups.size() != accepted_counts.size()) {
    throw std::logic_error("trace: groups and accepted counts differ in length");
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Group& g = groups[i];
    if (g.start != next || g.end < g.start) throw std::logic_error("trace: groups not contiguous");
    if (accepted_counts[i] != g.width()) throw std::logic_error("trace: count disagrees with group");
    next = g.end + 1;
  }
  if (next != tokens.size()) throw std::logic_error("trace: groups do not cover the tokens");
}

}  // namespace apd
