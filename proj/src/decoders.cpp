#include "apd/decoders.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "apd/coupler.hpp"
#include "apd/parallel.hpp"

namespace apd {
namespace {

void check_models(const SequenceModel& p_D, const SequenceModel* p_hat,
                  const DecoderConfig& config) {
  config.validate();
  if (config.n_max > p_D.horizon()) {
    throw ValidationError("n_max " + std::to_string(config.n_max) + " exceeds model horizon " +
                          std::to_string(p_D.horizon()));
  }
  if (p_hat != nullptr) {
    if (p_hat->vocab() != p_D.vocab()) {
      throw ValidationError("vocabulary mismatch between marginal and verifier models");
    }
    if (config.n_max > p_hat->horizon()) {
      throw ValidationError("n_max " + std::to_string(config.n_max) +
                            " exceeds verifier horizon " + std::to_string(p_hat->horizon()));
    }
  }
}

std::vector<TokenDistribution> processed_marginals(const SequenceModel& p_D,
                                                   std::span<const TokenId> prefix,
                                                   std::size_t lookahead,
                                                   const DecoderConfig& config) {
  auto marginals = p_D.marginal_query(prefix, lookahead);
  if (config.temperature != 1.0 || config.top_p != 1.0) {
    for (auto& m : marginals) m = apply_temperature_top_p(m, config.temperature, config.top_p);
  }
  return marginals;
}

GumbelDraw iteration_noise(const DecoderConfig& config, std::size_t iteration, std::size_t start,
                           std::size_t positions, const Vocab& vocab,
                           NoiseStream stream = NoiseStream::kShared) {
  if (config.fresh_noise_per_iteration) {
    return fresh_gumbel(config.seed, iteration, positions, vocab, stream);
  }
  return positional_gumbel(config.seed, iteration, start, positions, vocab, stream);
}

/// Appends `accepted` to the trace, cutting at the first eos. Returns true
/// once decoding must stop.
bool commit(DecodeTrace& trace, Sequence accepted, std::optional<TokenId> eos,
            std::size_t masked_len, double cost) {
  truncate_at_eos(accepted, eos);
  const bool hit_eos = eos && !accepted.empty() && accepted.back() == *eos;
  const std::size_t start = trace.tokens.size();
  trace.groups.push_back({start, start + accepted.size() - 1});
  trace.accepted_counts.push_back(accepted.size());
  trace.iteration_costs.push_back(cost);
  trace.masked_lengths.push_back(masked_len);
  trace.tokens.insert(trace.tokens.end(), accepted.begin(), accepted.end());
  return hit_eos;
}

}  // namespace

DecoderKind DecoderKind::semi_ar(std::size_t k) {
  if (k < 1) throw ValidationError("semi-autoregressive block size must be at least 1");
  return {DecoderType::kSemiAR, k};
}

DecoderKind DecoderKind::parse(const std::string& text) {
  if (text == "ar") return ar();
  if (text == "oneshot") return one_shot();
  if (text == "apd") return apd();
  if (text.starts_with("semi:")) {
    std::size_t k = 0;
    const char* first = text.data() + 5;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc() || ptr != last || first == last) {
      throw ValidationError("bad block size in decoder '" + text + "'");
    }
    return semi_ar(k);
  }
  throw ValidationError("unknown decoder '" + text + "' (expected ar, semi:<k>, oneshot, apd)");
}

std::string DecoderKind::name() const {
  switch (type) {
    case DecoderType::kAR: return "ar";
    case DecoderType::kSemiAR: return "semi:" + std::to_string(k);
    case DecoderType::kOneShot: return "oneshot";
    case DecoderType::kAPD: return "apd";
  }
  return "?";
}

DecodeTrace ar_decode(const SequenceModel& p_D, const DecoderConfig& config,
                      const CostModelParams& cost) {
  check_models(p_D, nullptr, config);
  const auto eos = p_D.vocab().eos_id();
  DecodeTrace trace;
  for (std::size_t it = 0; trace.tokens.size() < config.n_max; ++it) {
    const std::size_t t = trace.tokens.size();
    const auto next = processed_marginals(p_D, trace.tokens, 1, config);
    const GumbelDraw noise = iteration_noise(config, it, t, 1, p_D.vocab());
    const TokenId tok = coupled_sample(next[0], noise.row(0));
    const std::size_t masked = config.n_max - t;
    if (commit(trace, {tok}, eos, masked, iteration_cost(t, masked, config.W, config.M, cost))) {
      break;
    }
  }
  return trace;
}

DecodeTrace semi_ar_decode(const SequenceModel& p_D, std::size_t k, const DecoderConfig& config,
                           const CostModelParams& cost) {
  if (k < 1) throw ValidationError("semi-autoregressive block size must be at least 1");
  check_models(p_D, nullptr, config);
  const auto eos = p_D.vocab().eos_id();
  // A block of k needs k masked rows even when M is smaller.
  const std::size_t M_eff = std::max(config.M, k);
  DecodeTrace trace;
  for (std::size_t it = 0; trace.tokens.size() < config.n_max; ++it) {
    const std::size_t t = trace.tokens.size();
    const std::size_t block = std::min(k, config.n_max - t);
    const auto marginals = processed_marginals(p_D, trace.tokens, block, config);
    const GumbelDraw noise = iteration_noise(config, it, t, block, p_D.vocab());
    Sequence proposal(block);
    for (std::size_t j = 0; j < block; ++j) proposal[j] = coupled_sample(marginals[j], noise.row(j));
    const std::size_t masked = config.n_max - t;
    if (commit(trace, std::move(proposal), eos, masked,
               iteration_cost(t, masked, config.W, M_eff, cost))) {
      break;
    }
  }
  return trace;
}

DecodeTrace one_shot_decode(const SequenceModel& p_D, const DecoderConfig& config,
                            const CostModelParams& cost) {
  return semi_ar_decode(p_D, config.n_max, config, cost);
}

std::size_t accepted_length(std::span<const TokenId> proposal, std::span<const TokenId> target) {
  const std::size_t n = std::min(proposal.size(), target.size());
  if (n == 0) return 0;
  std::size_t k = 1;
  while (k < n && proposal[k] == target[k]) ++k;
  return k;
}

DecodeTrace apd_decode(const SequenceModel& p_D, const SequenceModel& p_hat,
                       const DecoderConfig& config, const CostModelParams& cost,
                       const NoiseObserver& observer) {
  check_models(p_D, &p_hat, config);
  const MixtureWeight R(config.R);
  const auto eos = p_D.vocab().eos_id();
  DecodeTrace trace;
  for (std::size_t it = 0; trace.tokens.size() < config.n_max; ++it) {
    const std::size_t t = trace.tokens.size();
    const std::size_t lookahead = std::min(config.M, config.n_max - t);

    const auto marginals = processed_marginals(p_D, trace.tokens, lookahead, config);
    const GumbelDraw shared = iteration_noise(config, it, t, lookahead, p_D.vocab());
    Sequence proposal(lookahead);
    for (std::size_t j = 0; j < lookahead; ++j) {
      proposal[j] = coupled_sample(marginals[j], shared.row(j));
    }

    auto joint = p_hat.joint_score(trace.tokens, proposal);
    if (config.process_small_model) {
      for (auto& d : joint) d = apply_temperature_top_p(d, config.temperature, config.top_p);
    }

    std::optional<GumbelDraw> independent;
    if (config.independent_draws) {
      independent = iteration_noise(config, it, t, lookahead, p_D.vocab(),
                                    NoiseStream::kIndependentTarget);
    }
    const GumbelDraw& target_noise = independent ? *independent : shared;
    if (observer) observer(it, shared, target_noise);

    // Target samples are only needed up to the first disagreement; a
    // position whose mixture has no support cannot agree.
    Sequence target(lookahead);
    target[0] = proposal[0];
    for (std::size_t j = 1; j < lookahead; ++j) {
      try {
        target[j] = coupled_sample(mixture_logits(marginals[j], joint[j], R), target_noise.row(j));
      } catch (const DisjointSupports&) {
        target[j] = p_D.vocab().mask_id();
      }
      if (target[j] != proposal[j]) break;
    }
    const std::size_t k = accepted_length(proposal, target);
    proposal.resize(k);

    const std::size_t masked = config.n_max - t;
    if (commit(trace, std::move(proposal), eos, masked,
               iteration_cost(t, masked, config.W, config.M, cost))) {
      break;
    }
  }
  return trace;
}

DecodeTrace decode(const DecoderKind& kind, const SequenceModel& p_D, const SequenceModel* p_hat,
                   const DecoderConfig& config, const CostModelParams& cost) {
  switch (kind.type) {
    case DecoderType::kAR: return ar_decode(p_D, config, cost);
    case DecoderType::kSemiAR: return semi_ar_decode(p_D, kind.k, config, cost);
    case DecoderType::kOneShot: return one_shot_decode(p_D, config, cost);
    case DecoderType::kAPD:
      if (p_hat == nullptr) throw ValidationError("apd needs a small model");
      return apd_decode(p_D, *p_hat, config, cost);
  }
  throw std::logic_error("unhandled decoder type");
}

std::vector<DecodeTrace> run_trials(const DecoderKind& kind, const SequenceModel& p_D,
                                    const SequenceModel* p_hat, const DecoderConfig& config,
                                    std::size_t trials, const CostModelParams& cost) {
  config.validate();
  cost.validate();
  if (kind.needs_small_model() && p_hat == nullptr) {
    throw ValidationError("apd needs a small model");
  }
  std::vector<DecodeTrace> traces(trials);
  parallel_for(trials, [&](std::size_t i) {
    DecoderConfig trial = config;
    trial.seed = derive_seed(config.seed, i);
    traces[i] = decode(kind, p_D, p_hat, trial, cost);
  });
  return traces;
}

SequenceTable empirical_law(std::span<const DecodeTrace> traces, std::size_t vocab_size,
                            std::size_t n_max) {
  SequenceTable table(vocab_size, n_max);
  std::map<Sequence, std::size_t> counts;
  for (const auto& tr : traces) ++counts[tr.tokens];
  const double n = static_cast<double>(traces.size());
  for (const auto& [seq, c] : counts) table.add(seq, static_cast<double>(c) / n);
  return table;
}

SequenceTable decode_distribution_mc(const DecoderKind& kind, const SequenceModel& p_D,
                                     const SequenceModel* p_hat, const DecoderConfig& config,
                                     std::size_t trials) {
  checked_space_size(p_D.vocab().size(), config.n_max);
  const auto traces = run_trials(kind, p_D, p_hat, config, trials);
  return empirical_law(traces, p_D.vocab().size(), config.n_max);
}

}  // namespace apd
