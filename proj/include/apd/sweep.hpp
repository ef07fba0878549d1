#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apd/core.hpp"
#include "apd/cost_model.hpp"
#include "apd/decoders.hpp"
#include "apd/models.hpp"

namespace apd {

struct SweepSpec {
  DecoderKind kind;
  DecoderConfig config;
};

struct SweepPoint {
  DecoderKind kind;
  DecoderConfig config;
  std::size_t trials = 0;
  double mean_parallel_tokens = 0.0;  // mean over trials of tokens / iterations
  double se_parallel_tokens = 0.0;
  double quality_tv = 0.0;  // TV(empirical law, exact AR law)
  double se_quality_tv = 0.0;
  double simulated_throughput = 0.0;  // total tokens / total cost
  double se_throughput = 0.0;
};

/// Mean and standard error of tokens/iterations across traces.
std::pair<double, double> parallel_tokens_stats(std::span<const DecodeTrace> traces);

/// Total tokens over total cost, with a ratio-estimator standard error.
std::pair<double, double> throughput_stats(std::span<const DecodeTrace> traces);

/// Throughput of the same traces re-costed under (W, M).
double retimed_throughput(std::span<const DecodeTrace> traces, std::size_t W, std::size_t M,
                          const CostModelParams& params);

/// Cartesian product of decoders x R x W x M over `base`. R only varies
/// for APD; other decoders get one point per (W, M).
std::vector<SweepSpec> expand_grid(std::span<const DecoderKind> decoders,
                                   std::span<const double> Rs, std::span<const std::size_t> Ws,
                                   std::span<const std::size_t> Ms, const DecoderConfig& base);

/// Orders by (decoder name, R, W, M); R counts as -1 for non-APD decoders.
void sort_grid(std::vector<SweepSpec>& grid);

/// Runs `trials` decodes per grid point. Points are returned in grid order.
std::vector<SweepPoint> run_sweep(const SequenceModel& p_D, const SequenceModel* p_hat,
                                  std::span<const SweepSpec> grid, std::size_t trials,
                                  const CostModelParams& cost = {});

}  // namespace apd
