#include "apd/models.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "apd/gumbel.hpp"

namespace apd {
namespace {

TokenDistribution from_masses(std::span<const double> masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (!(total > 0.0)) return TokenDistribution::uniform(masses.size());
  std::vector<double> lp(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) {
    lp[i] = masses[i] > 0.0 ? std::log(masses[i]) : kNegInf;
  }
  return normalize_logits(lp);
}

std::vector<TokenDistribution> masses_to_distributions(
    const std::vector<std::vector<double>>& masses) {
  std::vector<TokenDistribution> out;
  out.reserve(masses.size());
  for (const auto& m : masses) out.push_back(from_masses(m));
  return out;
}

void check_table(std::span<const double> probs, const char* what) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError(std::string(what) + ": negative or non-finite probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw ValidationError(std::string(what) + ": probabilities sum to " + std::to_string(total));
  }
}

}  // namespace

std::size_t checked_space_size(std::size_t vocab_size, std::size_t length) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (n > kEnumerationGuard / vocab_size) {
      throw TooLargeToEnumerate("too large to enumerate: " + std::to_string(vocab_size) + "^" +
                                std::to_string(length) + " sequences");
    }
    n *= vocab_size;
  }
  return n;
}

// ---------------------------------------------------------------------------
// SequenceModel

SequenceModel::SequenceModel(Vocab vocab, std::size_t horizon)
    : vocab_(std::move(vocab)), horizon_(horizon) {
  if (horizon_ < 1) throw ValidationError("model horizon must be at least 1");
}

void SequenceModel::check_context(std::span<const TokenId> context, std::size_t extra) const {
  vocab_.check_sequence(context);
  if (context.size() + extra > horizon_) {
    throw ValidationError("query of length " + std::to_string(context.size() + extra) +
                          " exceeds model horizon " + std::to_string(horizon_));
  }
}

std::vector<TokenDistribution> SequenceModel::marginal_query(std::span<const TokenId> prefix,
                                                             std::size_t lookahead) const {
  if (lookahead < 1) throw ValidationError("lookahead must be at least 1");
  check_context(prefix, lookahead);
  checked_space_size(vocab_.size(), lookahead - 1);

  const std::size_t V = vocab_.size();
  std::vector<std::vector<double>> masses(lookahead, std::vector<double>(V, 0.0));
  Sequence context(prefix.begin(), prefix.end());

  // Depth-first over futures with positive probability.
  auto visit = [&](auto&& self, std::size_t depth, double weight) -> void {
    const auto probs = conditional(context).probs();
    for (std::size_t v = 0; v < V; ++v) masses[depth][v] += weight * probs[v];
    if (depth + 1 == lookahead) return;
    for (std::size_t v = 0; v < V; ++v) {
      if (probs[v] == 0.0) continue;
      context.push_back(static_cast<TokenId>(v));
      self(self, depth + 1, weight * probs[v]);
      context.pop_back();
    }
  };
  visit(visit, 0, 1.0);
  return masses_to_distributions(masses);
}

std::vector<TokenDistribution> SequenceModel::joint_score(std::span<const TokenId> prefix,
                                                          std::span<const TokenId> proposal) const {
  check_context(prefix, proposal.size());
  vocab_.check_sequence(proposal);
  Sequence context(prefix.begin(), prefix.end());
  std::vector<TokenDistribution> out;
  out.reserve(proposal.size());
  for (TokenId tok : proposal) {
    out.push_back(conditional(context));
    context.push_back(tok);
  }
  return out;
}

SequenceTable SequenceModel::exact_sequence_distribution() const {
  checked_space_size(vocab_.size(), horizon_);
  SequenceTable table(vocab_.size(), horizon_);
  Sequence context;
  auto visit = [&](auto&& self, double weight) -> void {
    if (context.size() == horizon_) {
      table.add(context, weight);
      return;
    }
    const auto probs = conditional(context).probs();
    for (std::size_t v = 0; v < probs.size(); ++v) {
      if (probs[v] == 0.0) continue;
      context.push_back(static_cast<TokenId>(v));
      self(self, weight * probs[v]);
      context.pop_back();
    }
  };
  visit(visit, 1.0);
  return table;
}

// ---------------------------------------------------------------------------
// TabularJointModel

TabularJointModel::TabularJointModel(Vocab vocab, std::size_t n, std::vector<double> probs)
    : SequenceModel(std::move(vocab), n), probs_(std::move(probs)) {
  const std::size_t V = this->vocab().size();
  const std::size_t space = checked_space_size(V, n);
  if (probs_.size() != space) {
    throw ValidationError("tabular model needs " + std::to_string(space) + " entries, got " +
                          std::to_string(probs_.size()));
  }
  check_table(probs_, "tabular model");
  strides_.resize(n);
  std::size_t stride = 1;
  for (std::size_t i = n; i-- > 0;) {
    strides_[i] = stride;
    stride *= V;
  }
}

TabularJointModel TabularJointModel::independent(Vocab vocab,
                                                 std::span<const TokenDistribution> factors) {
  const std::size_t V = vocab.size();
  const std::size_t n = factors.size();
  const std::size_t space = checked_space_size(V, n);
  std::vector<double> probs(space, 1.0);
  for (std::size_t idx = 0; idx < space; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = n; i-- > 0;) {
      probs[idx] *= factors[i].prob(static_cast<TokenId>(rest % V));
      rest /= V;
    }
  }
  return TabularJointModel(std::move(vocab), n, std::move(probs));
}

TabularJointModel TabularJointModel::deterministic(Vocab vocab, const Sequence& seq) {
  vocab.check_sequence(seq);
  const std::size_t space = checked_space_size(vocab.size(), seq.size());
  std::vector<double> probs(space, 0.0);
  std::size_t idx = 0;
  for (TokenId t : seq) idx = idx * vocab.size() + t;
  probs[idx] = 1.0;
  return TabularJointModel(std::move(vocab), seq.size(), std::move(probs));
}

std::size_t TabularJointModel::block_offset(std::span<const TokenId> prefix) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) offset += prefix[i] * strides_[i];
  return offset;
}

std::size_t TabularJointModel::index_of(std::span<const TokenId> seq) const {
  if (seq.size() != horizon()) throw ValidationError("sequence length differs from horizon");
  vocab().check_sequence(seq);
  return block_offset(seq);
}

Sequence TabularJointModel::sequence_at(std::size_t index) const {
  Sequence seq(horizon());
  for (std::size_t i = 0; i < horizon(); ++i) {
    seq[i] = static_cast<TokenId>((index / strides_[i]) % vocab().size());
  }
  return seq;
}

TokenDistribution TabularJointModel::conditional(std::span<const TokenId> context) const {
  check_context(context, 1);
  const std::size_t V = vocab().size();
  const std::size_t t = context.size();
  const std::size_t base = block_offset(context);
  const std::size_t sub = strides_[t];
  std::vector<double> masses(V, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    const std::size_t start = base + v * sub;
    for (std::size_t j = 0; j < sub; ++j) masses[v] += probs_[start + j];
  }
  return from_masses(masses);
}

std::vector<TokenDistribution> TabularJointModel::marginal_query(std::span<const TokenId> prefix,
                                                                 std::size_t lookahead) const {
  if (lookahead < 1) throw ValidationError("lookahead must be at least 1");
  check_context(prefix, lookahead);
  const std::size_t V = vocab().size();
  const std::size_t t = prefix.size();
  const std::size_t base = block_offset(prefix);
  const std::size_t block = t == 0 ? probs_.size() : strides_[t - 1];
  std::vector<std::vector<double>> masses(lookahead, std::vector<double>(V, 0.0));
  for (std::size_t j = 0; j < block; ++j) {
    const double p = probs_[base + j];
    if (p == 0.0) continue;
    for (std::size_t q = 0; q < lookahead; ++q) {
      masses[q][(j / strides_[t + q]) % V] += p;
    }
  }
  return masses_to_distributions(masses);
}

SequenceTable TabularJointModel::exact_sequence_distribution() const {
  SequenceTable table(vocab().size(), horizon());
  for (std::size_t idx = 0; idx < probs_.size(); ++idx) table.add(sequence_at(idx), probs_[idx]);
  return table;
}

// ---------------------------------------------------------------------------
// MarkovModel

MarkovModel::MarkovModel(Vocab vocab, std::size_t order, std::size_t horizon,
                         std::vector<double> initial,
                         std::vector<std::optional<TokenDistribution>> rows)
    : SequenceModel(std::move(vocab), horizon), order_(order), initial_(std::move(initial)) {
  const std::size_t V = this->vocab().size();
  if (order_ > horizon) throw ValidationError("markov order exceeds horizon");
  num_contexts_ = checked_space_size(V, order_);
  if (initial_.size() != num_contexts_) {
    throw ValidationError("markov initial distribution needs " + std::to_string(num_contexts_) +
                          " entries");
  }
  check_table(initial_, "markov initial distribution");
  if (rows.size() != num_contexts_) {
    throw ValidationError("markov model needs " + std::to_string(num_contexts_) + " rows");
  }
  for (const auto& r : rows) {
    if (r && r->size() != V) throw ValidationError("markov row size differs from vocabulary");
  }

  // Contexts that can occur as the last m tokens before some predicted position.
  std::set<std::size_t> reachable;
  if (horizon > order_) {
    std::set<std::size_t> frontier;
    for (std::size_t c = 0; c < num_contexts_; ++c) {
      if (initial_[c] > 0.0) frontier.insert(c);
    }
    for (std::size_t step = order_; step < horizon; ++step) {
      std::set<std::size_t> next;
      for (std::size_t c : frontier) {
        if (!reachable.insert(c).second) continue;
        if (!rows[c]) {
          throw ValidationError("markov model lacks a row for reachable context " +
                                std::to_string(c));
        }
        for (std::size_t v = 0; v < V; ++v) {
          if (rows[c]->log_probs()[v] != kNegInf) next.insert((c * V + v) % num_contexts_);
        }
      }
      frontier = std::move(next);
    }
  }

  rows_.reserve(num_contexts_);
  for (auto& r : rows) rows_.push_back(r ? std::move(*r) : TokenDistribution::uniform(V));
}

std::size_t MarkovModel::context_index(std::span<const TokenId> last_m) const {
  std::size_t c = 0;
  for (TokenId t : last_m) c = c * vocab().size() + t;
  return c;
}

TokenDistribution MarkovModel::initial_conditional(std::span<const TokenId> context) const {
  const std::size_t V = vocab().size();
  const std::size_t t = context.size();
  std::size_t sub = 1;
  for (std::size_t i = t + 1; i < order_; ++i) sub *= V;
  const std::size_t base = context_index(context) * sub * V;
  std::vector<double> masses(V, 0.0);
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t j = 0; j < sub; ++j) masses[v] += initial_[base + v * sub + j];
  }
  return from_masses(masses);
}

TokenDistribution MarkovModel::conditional(std::span<const TokenId> context) const {
  check_context(context, 1);
  if (context.size() < order_) return initial_conditional(context);
  return rows_[context_index(context.last(order_))];
}

std::vector<TokenDistribution> MarkovModel::marginal_query(std::span<const TokenId> prefix,
                                                           std::size_t lookahead) const {
  if (lookahead < 1) throw ValidationError("lookahead must be at least 1");
  check_context(prefix, lookahead);
  const std::size_t V = vocab().size();
  const std::size_t t = prefix.size();
  std::vector<std::vector<double>> masses(lookahead, std::vector<double>(V, 0.0));

  // Law of the first full context (positions 0..m-1) given the prefix.
  std::vector<double> state(num_contexts_, 0.0);
  if (t >= order_) {
    state[context_index(prefix.last(order_))] = 1.0;
  } else {
    std::size_t sub = 1;
    for (std::size_t i = t; i < order_; ++i) sub *= V;
    const std::size_t base = context_index(prefix) * sub;
    double total = 0.0;
    for (std::size_t j = 0; j < sub; ++j) total += initial_[base + j];
    for (std::size_t j = 0; j < sub; ++j) {
      state[base + j] = total > 0.0 ? initial_[base + j] / total : 1.0 / static_cast<double>(sub);
    }
    // Positions inside the initial block read straight from that law.
    for (std::size_t q = 0; q < lookahead && t + q < order_; ++q) {
      std::size_t stride = 1;
      for (std::size_t i = t + q + 1; i < order_; ++i) stride *= V;
      for (std::size_t c = 0; c < num_contexts_; ++c) {
        masses[q][(c / stride) % V] += state[c];
      }
    }
  }

  const std::size_t first_chain = std::max(t, order_);
  for (std::size_t pos = first_chain; pos < t + lookahead; ++pos) {
    std::vector<double> next(num_contexts_, 0.0);
    auto& out = masses[pos - t];
    for (std::size_t c = 0; c < num_contexts_; ++c) {
      if (state[c] == 0.0) continue;
      const auto lp = rows_[c].log_probs();
      for (std::size_t v = 0; v < V; ++v) {
        if (lp[v] == kNegInf) continue;
        const double w = state[c] * std::exp(lp[v]);
        out[v] += w;
        next[(c * V + v) % num_contexts_] += w;
      }
    }
    state = std::move(next);
  }
  return masses_to_distributions(masses);
}

TokenDistribution MarkovModel::windowed_conditional(std::span<const TokenId> context,
                                                    std::size_t W) const {
  const std::size_t len = context.size();
  if (W >= len || W >= order_) return conditional(context);
  const std::size_t V = vocab().size();
  const auto visible = context.last(W);

  if (len < order_) {
    // Marginalize the initial block over the hidden positions [0, len - W).
    std::size_t sub = 1;
    for (std::size_t i = len + 1; i < order_; ++i) sub *= V;
    std::vector<double> masses(V, 0.0);
    for (std::size_t c = 0; c < num_contexts_; ++c) {
      bool match = true;
      for (std::size_t k = 0; k < W && match; ++k) {
        std::size_t stride = 1;
        for (std::size_t i = len - W + k + 1; i < order_; ++i) stride *= V;
        match = (c / stride) % V == visible[k];
      }
      if (match) masses[(c / sub) % V] += initial_[c];
    }
    return from_masses(masses);
  }

  // Full-order contexts whose last W tokens match, weighted by the initial law.
  std::size_t tail_mod = 1;
  for (std::size_t i = 0; i < W; ++i) tail_mod *= V;
  const std::size_t tail = context_index(visible);
  std::vector<double> weights;
  std::vector<std::size_t> matches;
  double total = 0.0;
  for (std::size_t c = 0; c < num_contexts_; ++c) {
    if (c % tail_mod != tail) continue;
    matches.push_back(c);
    weights.push_back(initial_[c]);
    total += initial_[c];
  }
  std::vector<double> masses(V, 0.0);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const double w = total > 0.0 ? weights[i] / total : 1.0 / static_cast<double>(matches.size());
    if (w == 0.0) continue;
    const auto lp = rows_[matches[i]].log_probs();
    for (std::size_t v = 0; v < V; ++v) masses[v] += w * std::exp(lp[v]);
  }
  return from_masses(masses);
}

std::vector<TokenDistribution> MarkovModel::windowed_joint_score(std::span<const TokenId> prefix,
                                                                 std::span<const TokenId> proposal,
                                                                 std::size_t W) const {
  if (W < 1) throw ValidationError("W must be at least 1");
  check_context(prefix, proposal.size());
  vocab().check_sequence(proposal);
  Sequence context(prefix.begin(), prefix.end());
  std::vector<TokenDistribution> out;
  out.reserve(proposal.size());
  for (TokenId tok : proposal) {
    out.push_back(windowed_conditional(context, W));
    context.push_back(tok);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PerturbedModel

namespace {
const SequenceModel& require(const ModelPtr& base) {
  if (!base) throw ValidationError("perturbed model needs a base");
  return *base;
}
}  // namespace

PerturbedModel::PerturbedModel(ModelPtr base, double delta, std::uint64_t seed)
    : SequenceModel(require(base).vocab(), require(base).horizon()),
      base_(std::move(base)),
      delta_(delta),
      seed_(seed) {
  if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
    throw ValidationError("perturbation scale must be finite and non-negative");
  }
}

TokenDistribution PerturbedModel::conditional(std::span<const TokenId> context) const {
  TokenDistribution row = base_->conditional(context);
  if (delta_ == 0.0) return row;
  std::uint64_t key = derive_seed(seed_, context.size());
  for (TokenId t : context) key = derive_seed(key, t);
  std::vector<double> lp(row.log_probs().begin(), row.log_probs().end());
  for (std::size_t v = 0; v < lp.size(); ++v) {
    if (lp[v] == kNegInf) continue;
    const double u1 = counter_uniform(key, static_cast<std::uint32_t>(v), 0, 0);
    const double u2 = counter_uniform(key, static_cast<std::uint32_t>(v), 1, 0);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    lp[v] += delta_ * z;
  }
  return normalize_logits(lp);
}

std::vector<TokenDistribution> PerturbedModel::marginal_query(std::span<const TokenId> prefix,
                                                              std::size_t lookahead) const {
  if (delta_ == 0.0) return base_->marginal_query(prefix, lookahead);
  return SequenceModel::marginal_query(prefix, lookahead);
}

SequenceTable PerturbedModel::exact_sequence_distribution() const {
  if (delta_ == 0.0) return base_->exact_sequence_distribution();
  return SequenceModel::exact_sequence_distribution();
}

}  // namespace apd
