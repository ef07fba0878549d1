#pragma once

#include <cstddef>

#include "apd/core.hpp"
#include "apd/models.hpp"
#include "apd/sequence_table.hpp"

namespace apd {

/// sum p log(p / q) in nats, with 0 log(0/q) = 0. +inf when p puts mass
/// where q has none. Throws ValidationError on tables over different spaces.
double kl_divergence(const SequenceTable& p, const SequenceTable& q);

/// Half the L1 distance. Throws ValidationError on tables over different spaces.
double total_variation(const SequenceTable& p, const SequenceTable& q);

/// Delta-method standard error of total_variation(empirical, reference)
/// when `empirical` is a frequency table of `samples` draws.
double total_variation_standard_error(const SequenceTable& empirical,
                                      const SequenceTable& reference, std::size_t samples);

/// Product over positions of the unconditional marginals p(x_i), as a table
/// over full-length sequences.
SequenceTable marginal_product(const SequenceModel& model);

/// KL(exact joint || product of unconditional marginals): what one-shot
/// sampling from the marginals loses.
double mutual_info_gap(const SequenceModel& model);

/// Exact output law of autoregressive decoding of `model` under `config`:
/// temperature/top-p applied to every next-token conditional, the first
/// n_max tokens kept, each sequence cut after its first eos.
SequenceTable ar_reference_law(const SequenceModel& model, const DecoderConfig& config);

/// Exact output law of one-shot decoding with the same conventions. With
/// an identity temperature/top-p this is marginal_product truncated.
SequenceTable one_shot_reference_law(const SequenceModel& model, const DecoderConfig& config);

}  // namespace apd
