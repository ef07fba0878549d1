#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apd/error.hpp"

namespace apd {

using TokenId = std::uint32_t;
using Sequence = std::vector<TokenId>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNormTolerance = 1e-9;

/// Finite token alphabet. Ids are [0, size); mask_id() == size is a
/// placeholder that is never emitted or scored.
class Vocab {
 public:
  Vocab(std::vector<std::string> names, std::optional<TokenId> eos = std::nullopt);

  /// Anonymous vocabulary "t0", "t1", ...
  static Vocab anonymous(std::size_t size, std::optional<TokenId> eos = std::nullopt);

  std::size_t size() const noexcept { return names_.size(); }
  std::optional<TokenId> eos_id() const noexcept { return eos_; }
  TokenId mask_id() const noexcept { return static_cast<TokenId>(names_.size()); }
  bool contains(TokenId id) const noexcept { return id < names_.size(); }

  const std::string& name(TokenId id) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  TokenId id_of(const std::string& name) const;

  void check_sequence(std::span<const TokenId> tokens) const;

  bool operator==(const Vocab&) const = default;

 private:
  std::vector<std::string> names_;
  std::optional<TokenId> eos_;
};

double logsumexp(std::span<const double> xs) noexcept;

/// Normalized categorical distribution stored as log-probabilities.
/// Zero probability is exactly -inf.
class TokenDistribution {
 public:
  /// Validates that exp(log_probs) sums to 1 within kNormTolerance.
  static TokenDistribution from_log_probs(std::vector<double> log_probs);
  /// Validates and takes logs; probabilities must sum to 1 within kNormTolerance.
  static TokenDistribution from_probs(std::span<const double> probs);
  static TokenDistribution point_mass(std::size_t size, TokenId token);
  static TokenDistribution uniform(std::size_t size);

  std::size_t size() const noexcept { return log_probs_.size(); }
  std::span<const double> log_probs() const noexcept { return log_probs_; }
  double log_prob(TokenId id) const { return log_probs_.at(id); }
  double prob(TokenId id) const;
  std::vector<double> probs() const;
  TokenId argmax() const noexcept;
  /// Token with probability exactly 1, if any.
  std::optional<TokenId> point_mass_token() const noexcept;

  bool operator==(const TokenDistribution&) const = default;

 private:
  explicit TokenDistribution(std::vector<double> lp) : log_probs_(std::move(lp)) {}
  friend TokenDistribution normalize_logits(std::span<const double> raw);

  std::vector<double> log_probs_;
};

/// raw - logsumexp(raw). Throws DegenerateDistribution if every entry is -inf.
TokenDistribution normalize_logits(std::span<const double> raw);

/// Temperature scaling followed by nucleus truncation. The most probable
/// token always survives; ties in the sort go to the lower index.
TokenDistribution apply_temperature_top_p(const TokenDistribution& dist, double temperature,
                                          double top_p);

double total_variation(const TokenDistribution& p, const TokenDistribution& q);

struct DecoderConfig {
  double R = 0.5;
  std::size_t W = 16;
  std::size_t M = 8;
  std::size_t n_max = 8;
  double temperature = 1.0;
  double top_p = 1.0;
  std::uint64_t seed = 0;
  /// Apply temperature/top-p to the verifier's conditionals too.
  bool process_small_model = false;
  /// Draw target noise independently of the proposal noise (ablation).
  bool independent_draws = false;
  /// Key noise by iteration instead of by sequence position, so a position
  /// rejected in one iteration is redrawn with new noise in the next.
  bool fresh_noise_per_iteration = false;

  /// Throws ValidationError on any out-of-range field.
  void validate() const;
};

struct Group {
  std::size_t start = 0;  // inclusive, 0-based
  std::size_t end = 0;    // inclusive
  std::size_t width() const noexcept { return end - start + 1; }
  bool operator==(const Group&) const = default;
};

struct DecodeTrace {
  std::vector<Group> groups;
  std::vector<std::size_t> accepted_counts;
  std::vector<double> iteration_costs;
  /// Masked positions still ahead of each iteration (before capping by M).
  std::vector<std::size_t> masked_lengths;
  Sequence tokens;

  std::size_t iterations() const noexcept { return groups.size(); }
  double total_cost() const noexcept;
  double mean_parallel_tokens() const noexcept;

  /// Throws std::logic_error if contiguity/coverage invariants are broken.
  void check_invariants() const;

  bool operator==(const DecodeTrace&) const = default;
};

}  // namespace apd
