#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apd/core.hpp"
#include "apd/sequence_table.hpp"

namespace apd {

/// Upper bound on vocab^n for anything that enumerates sequences.
inline constexpr std::size_t kEnumerationGuard = 10'000'000;

/// Returns vocab^length, or throws TooLargeToEnumerate past kEnumerationGuard.
std::size_t checked_space_size(std::size_t vocab_size, std::size_t length);

/// An exact generative model over sequences of length `horizon()`.
///
/// One object can play every role a decode needs: marginal_query() is the
/// masked-LM view (per-position marginals given a prefix), joint_score()
/// is the autoregressive verifier view (conditionals along a proposed path),
/// and exact_sequence_distribution() is the ground truth.
///
/// Conditionals on a zero-probability context fall back to uniform so that
/// verifier scoring along an impossible proposal stays defined.
///
/// Implementations are immutable; every query is safe to call concurrently.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t horizon() const noexcept { return horizon_; }
  virtual std::string kind() const = 0;

  /// p(x_t | x_{<t} = context), |context| < horizon.
  virtual TokenDistribution conditional(std::span<const TokenId> context) const = 0;

  /// Entry j is p(x_{t+j} | x_{<t} = prefix), each position marginalized
  /// independently of the others. The base version enumerates futures.
  virtual std::vector<TokenDistribution> marginal_query(std::span<const TokenId> prefix,
                                                        std::size_t lookahead) const;

  /// Entry i is p(x_{t+i} | prefix, proposal[0..i)).
  std::vector<TokenDistribution> joint_score(std::span<const TokenId> prefix,
                                             std::span<const TokenId> proposal) const;

  /// Full joint over vocab^horizon by the chain rule. Sequences with zero
  /// probability may be absent.
  virtual SequenceTable exact_sequence_distribution() const;

 protected:
  SequenceModel(Vocab vocab, std::size_t horizon);
  void check_context(std::span<const TokenId> context, std::size_t extra) const;

 private:
  Vocab vocab_;
  std::size_t horizon_;
};

using ModelPtr = std::shared_ptr<const SequenceModel>;

/// Explicit probability table over every sequence of length n.
/// Index layout is mixed radix with position 0 most significant.
class TabularJointModel final : public SequenceModel {
 public:
  /// `probs` has vocab.size()^n entries; rejected unless it sums to 1
  /// within kNormTolerance.
  TabularJointModel(Vocab vocab, std::size_t n, std::vector<double> probs);

  /// Product of independent per-position distributions.
  static TabularJointModel independent(Vocab vocab, std::span<const TokenDistribution> factors);
  /// All mass on `seq`.
  static TabularJointModel deterministic(Vocab vocab, const Sequence& seq);

  std::string kind() const override { return "tabular"; }
  TokenDistribution conditional(std::span<const TokenId> context) const override;
  std::vector<TokenDistribution> marginal_query(std::span<const TokenId> prefix,
                                                std::size_t lookahead) const override;
  SequenceTable exact_sequence_distribution() const override;

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t index_of(std::span<const TokenId> seq) const;
  Sequence sequence_at(std::size_t index) const;

 private:
  std::size_t block_offset(std::span<const TokenId> prefix) const;

  std::vector<double> probs_;
  std::vector<std::size_t> strides_;  // strides_[i] = V^(n-1-i)
};

/// Order-m Markov chain: an initial joint over the first m tokens and one
/// transition row per length-m context.
class MarkovModel final : public SequenceModel {
 public:
  /// `initial` has V^m entries (a single 1.0 for m = 0). `rows` has V^m
  /// entries indexed like `initial`; rows may be missing only for contexts
  /// that are unreachable within the horizon (they read as uniform).
  MarkovModel(Vocab vocab, std::size_t order, std::size_t horizon, std::vector<double> initial,
              std::vector<std::optional<TokenDistribution>> rows);

  std::size_t order() const noexcept { return order_; }
  std::span<const double> initial() const noexcept { return initial_; }
  const TokenDistribution& row(std::size_t context_index) const { return rows_.at(context_index); }
  std::size_t context_index(std::span<const TokenId> last_m) const;

  std::string kind() const override { return "markov"; }
  TokenDistribution conditional(std::span<const TokenId> context) const override;
  std::vector<TokenDistribution> marginal_query(std::span<const TokenId> prefix,
                                                std::size_t lookahead) const override;

  /// Like joint_score, but each position sees at most the last W tokens of
  /// its context. Contexts shorter than the order are completed by weighting
  /// the full-order contexts with the initial distribution.
  std::vector<TokenDistribution> windowed_joint_score(std::span<const TokenId> prefix,
                                                      std::span<const TokenId> proposal,
                                                      std::size_t W) const;

 private:
  TokenDistribution initial_conditional(std::span<const TokenId> context) const;
  TokenDistribution windowed_conditional(std::span<const TokenId> context, std::size_t W) const;

  std::size_t order_;
  std::size_t num_contexts_;
  std::vector<double> initial_;
  std::vector<TokenDistribution> rows_;
};

/// A base model whose conditionals carry deterministic log-space noise of
/// scale delta, keyed by (seed, full context, token). Supports are kept.
class PerturbedModel final : public SequenceModel {
 public:
  PerturbedModel(ModelPtr base, double delta, std::uint64_t seed);

  const SequenceModel& base() const noexcept { return *base_; }
  double delta() const noexcept { return delta_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::string kind() const override { return "perturbed"; }
  TokenDistribution conditional(std::span<const TokenId> context) const override;
  std::vector<TokenDistribution> marginal_query(std::span<const TokenId> prefix,
                                                std::size_t lookahead) const override;
  SequenceTable exact_sequence_distribution() const override;

 private:
  ModelPtr base_;
  double delta_;
  std::uint64_t seed_;
};

}  // namespace apd
