#pragma once

#include <cstddef>

#include "apd/core.hpp"

namespace apd {

/// Attention-shaped cost proxy for one forward pass of the marginal model.
/// Units are arbitrary; only ratios between configurations mean anything.
struct CostModelParams {
  double alpha = 1.0;  // cost per (query row x key row)
  double beta = 0.0;   // fixed per-iteration overhead

  void validate() const;
};

/// alpha * q_rows * k_rows + beta, where
///   q_rows = min(W, prefix_len) + min(M, masked_len)   rows recomputed this pass
///   k_rows = prefix_len + min(M, masked_len)           rows attended to
/// `masked_len` is the number of undecoded positions ahead of the prefix.
double iteration_cost(std::size_t prefix_len, std::size_t masked_len, std::size_t W,
                      std::size_t M, const CostModelParams& params);

/// Recomputes every iteration cost of `trace` under a different (W, M).
/// The trace's acceptance pattern is kept as is.
DecodeTrace retime_trace(DecodeTrace trace, std::size_t W, std::size_t M,
                         const CostModelParams& params);

}  // namespace apd
