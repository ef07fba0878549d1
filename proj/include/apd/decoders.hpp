#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apd/core.hpp"
#include "apd/cost_model.hpp"
#include "apd/gumbel.hpp"
#include "apd/models.hpp"
#include "apd/sequence_table.hpp"

namespace apd {

enum class DecoderType { kAR, kSemiAR, kOneShot, kAPD };

struct DecoderKind {
  DecoderType type = DecoderType::kAR;
  std::size_t k = 1;  // block size, SemiAR only

  static DecoderKind ar() { return {DecoderType::kAR, 1}; }
  static DecoderKind semi_ar(std::size_t k);
  static DecoderKind one_shot() { return {DecoderType::kOneShot, 0}; }
  static DecoderKind apd() { return {DecoderType::kAPD, 0}; }

  /// "ar", "semi:<k>", "oneshot" or "apd".
  static DecoderKind parse(const std::string& text);
  std::string name() const;
  bool needs_small_model() const noexcept { return type == DecoderType::kAPD; }

  bool operator==(const DecoderKind&) const = default;
};

/// Called once per APD iteration with the draws consumed by the proposal
/// and by the target. They are the same object unless independent draws
/// were requested.
using NoiseObserver = std::function<void(std::size_t iteration, const GumbelDraw& proposal_noise,
                                         const GumbelDraw& target_noise)>;

/// One token per iteration, each from the next-token marginal.
DecodeTrace ar_decode(const SequenceModel& p_D, const DecoderConfig& config,
                      const CostModelParams& cost = {});

/// Blocks of k tokens, each sampled independently from its marginal given
/// all previously accepted tokens.
DecodeTrace semi_ar_decode(const SequenceModel& p_D, std::size_t k, const DecoderConfig& config,
                           const CostModelParams& cost = {});

/// Every position from its marginal in a single block of n_max.
DecodeTrace one_shot_decode(const SequenceModel& p_D, const DecoderConfig& config,
                            const CostModelParams& cost = {});

/// Adaptive parallel decoding. Each iteration proposes up to min(M, rest)
/// tokens from p_D's marginals with shared Gumbel noise, resamples the
/// product-of-experts target with the same noise, and accepts the first
/// token plus the longest agreeing run after it.
DecodeTrace apd_decode(const SequenceModel& p_D, const SequenceModel& p_hat,
                       const DecoderConfig& config, const CostModelParams& cost = {},
                       const NoiseObserver& observer = {});

/// 1 + length of the run of positions 1, 2, ... where proposal == target.
std::size_t accepted_length(std::span<const TokenId> proposal, std::span<const TokenId> target);

/// Dispatches on `kind`. `p_hat` is only read for APD and must then be set.
DecodeTrace decode(const DecoderKind& kind, const SequenceModel& p_D, const SequenceModel* p_hat,
                   const DecoderConfig& config, const CostModelParams& cost = {});

/// `trials` decodes; trial i runs with seed derive_seed(config.seed, i).
/// Results are indexed by trial, independent of the worker count.
std::vector<DecodeTrace> run_trials(const DecoderKind& kind, const SequenceModel& p_D,
                                    const SequenceModel* p_hat, const DecoderConfig& config,
                                    std::size_t trials, const CostModelParams& cost = {});

/// Empirical output law of `trials` seeded decodes over sequences of length
/// at most n_max. Empty when trials == 0.
SequenceTable decode_distribution_mc(const DecoderKind& kind, const SequenceModel& p_D,
                                     const SequenceModel* p_hat, const DecoderConfig& config,
                                     std::size_t trials);

/// Frequency table of the emitted token sequences.
SequenceTable empirical_law(std::span<const DecodeTrace> traces, std::size_t vocab_size,
                            std::size_t n_max);

}  // namespace apd
