#include "apd/cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace apd {

void CostModelParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be non-negative");
}

double iteration_cost(std::size_t prefix_len, std::size_t masked_len, std::size_t W,
                      std::size_t M, const CostModelParams& params) {
  const double lookahead = static_cast<double>(std::min(M, masked_len));
  const double q_rows = static_cast<double>(std::min(W, prefix_len)) + lookahead;
  const double k_rows = static_cast<double>(prefix_len) + lookahead;
  return params.alpha * q_rows * k_rows + params.beta;
}

DecodeTrace retime_trace(DecodeTrace trace, std::size_t W, std::size_t M,
                         const CostModelParams& params) {
  if (trace.masked_lengths.size() != trace.groups.size()) {
    throw ValidationError("trace lacks per-iteration masked lengths");
  }
  for (std::size_t i = 0; i < trace.groups.size(); ++i) {
    trace.iteration_costs[i] =
        iteration_cost(trace.groups[i].start, trace.masked_lengths[i], W, M, params);
  }
  return trace;
}

}  // namespace apd
