#include "apd/metrics.hpp"

#include <cmath>
#include <limits>

namespace apd {
namespace {

void check_space(const SequenceTable& p, const SequenceTable& q) {
  if (!p.same_space(q)) throw ValidationError("tables over different sequence spaces");
}

TokenDistribution processed(TokenDistribution d, const DecoderConfig& config) {
  if (config.temperature == 1.0 && config.top_p == 1.0) return d;
  return apply_temperature_top_p(d, config.temperature, config.top_p);
}

/// Enumerates the product of independent per-position factors.
SequenceTable product_table(std::span<const TokenDistribution> factors, std::size_t vocab_size,
                            std::size_t horizon, std::optional<TokenId> eos) {
  checked_space_size(vocab_size, factors.size());
  SequenceTable table(vocab_size, horizon);
  Sequence seq;
  auto visit = [&](auto&& self, double weight) -> void {
    if (seq.size() == factors.size()) {
      Sequence out = seq;
      truncate_at_eos(out, eos);
      table.add(out, weight);
      return;
    }
    const auto probs = factors[seq.size()].probs();
    for (std::size_t v = 0; v < probs.size(); ++v) {
      if (probs[v] == 0.0) continue;
      seq.push_back(static_cast<TokenId>(v));
      self(self, weight * probs[v]);
      seq.pop_back();
    }
  };
  visit(visit, 1.0);
  return table;
}

}  // namespace

double kl_divergence(const SequenceTable& p, const SequenceTable& q) {
  check_space(p, q);
  double s = 0.0;
  for (const auto& [seq, pv] : p.entries()) {
    if (pv == 0.0) continue;
    const double qv = q.prob(seq);
    if (qv == 0.0) return std::numeric_limits<double>::infinity();
    s += pv * std::log(pv / qv);
  }
  return std::max(0.0, s);
}

double total_variation(const SequenceTable& p, const SequenceTable& q) {
  check_space(p, q);
  double s = 0.0;
  for (const auto& [seq, pv] : p.entries()) s += std::abs(pv - q.prob(seq));
  for (const auto& [seq, qv] : q.entries()) {
    if (!p.entries().contains(seq)) s += std::abs(qv);
  }
  return 0.5 * s;
}

double total_variation_standard_error(const SequenceTable& empirical,
                                      const SequenceTable& reference, std::size_t samples) {
  check_space(empirical, reference);
  if (samples == 0) return 0.0;
  // Influence of one draw x on TV is sign(p_hat(x) - p(x)) / 2.
  double mean = 0.0;
  double second = 0.0;
  for (const auto& [seq, pv] : empirical.entries()) {
    const double d = pv - reference.prob(seq);
    const double h = d > 0.0 ? 0.5 : (d < 0.0 ? -0.5 : 0.0);
    mean += pv * h;
    second += pv * h * h;
  }
  const double var = std::max(0.0, second - mean * mean);
  return std::sqrt(var / static_cast<double>(samples));
}

SequenceTable marginal_product(const SequenceModel& model) {
  const auto factors = model.marginal_query({}, model.horizon());
  return product_table(factors, model.vocab().size(), model.horizon(), std::nullopt);
}

double mutual_info_gap(const SequenceModel& model) {
  return kl_divergence(model.exact_sequence_distribution(), marginal_product(model));
}

SequenceTable ar_reference_law(const SequenceModel& model, const DecoderConfig& config) {
  config.validate();
  if (config.n_max > model.horizon()) throw ValidationError("n_max exceeds model horizon");
  checked_space_size(model.vocab().size(), config.n_max);
  const auto eos = model.vocab().eos_id();
  SequenceTable table(model.vocab().size(), config.n_max);
  Sequence seq;
  auto visit = [&](auto&& self, double weight) -> void {
    if (seq.size() == config.n_max || (eos && !seq.empty() && seq.back() == *eos)) {
      table.add(seq, weight);
      return;
    }
    const auto probs = processed(model.marginal_query(seq, 1)[0], config).probs();
    for (std::size_t v = 0; v < probs.size(); ++v) {
      if (probs[v] == 0.0) continue;
      seq.push_back(static_cast<TokenId>(v));
      self(self, weight * probs[v]);
      seq.pop_back();
    }
  };
  visit(visit, 1.0);
  return table;
}

SequenceTable one_shot_reference_law(const SequenceModel& model, const DecoderConfig& config) {
  config.validate();
  if (config.n_max > model.horizon()) throw ValidationError("n_max exceeds model horizon");
  auto factors = model.marginal_query({}, config.n_max);
  for (auto& f : factors) f = processed(std::move(f), config);
  return product_table(factors, model.vocab().size(), config.n_max, model.vocab().eos_id());
}

}  // namespace apd
