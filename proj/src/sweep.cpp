#include "apd/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "apd/metrics.hpp"

namespace apd {

std::pair<double, double> parallel_tokens_stats(std::span<const DecodeTrace> traces) {
  if (traces.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(traces.size());
  double sum = 0.0;
  for (const auto& t : traces) sum += t.mean_parallel_tokens();
  const double mean = sum / n;
  if (traces.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const auto& t : traces) {
    const double d = t.mean_parallel_tokens() - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::pair<double, double> throughput_stats(std::span<const DecodeTrace> traces) {
  if (traces.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(traces.size());
  double tokens = 0.0;
  double cost = 0.0;
  for (const auto& t : traces) {
    tokens += static_cast<double>(t.tokens.size());
    cost += t.total_cost();
  }
  if (cost <= 0.0) return {0.0, 0.0};
  const double ratio = tokens / cost;
  if (traces.size() < 2) return {ratio, 0.0};
  double ss = 0.0;
  for (const auto& t : traces) {
    const double r = static_cast<double>(t.tokens.size()) - ratio * t.total_cost();
    ss += r * r;
  }
  const double mean_cost = cost / n;
  return {ratio, std::sqrt(ss / (n - 1.0) / n) / mean_cost};
}

double retimed_throughput(std::span<const DecodeTrace> traces, std::size_t W, std::size_t M,
                          const CostModelParams& params) {
  double tokens = 0.0;
  double cost = 0.0;
  for (const auto& t : traces) {
    tokens += static_cast<double>(t.tokens.size());
    cost += retime_trace(t, W, M, params).total_cost();
  }
  return cost > 0.0 ? tokens / cost : 0.0;
}

std::vector<SweepSpec> expand_grid(std::span<const DecoderKind> decoders,
                                   std::span<const double> Rs, std::span<const std::size_t> Ws,
                                   std::span<const std::size_t> Ms, const DecoderConfig& base) {
  std::vector<SweepSpec> grid;
  for (const auto& kind : decoders) {
    const bool varies_R = kind.type == DecoderType::kAPD;
    const std::vector<double> r_values =
        varies_R ? std::vector<double>(Rs.begin(), Rs.end()) : std::vector<double>{base.R};
    for (double R : r_values) {
      for (std::size_t W : Ws) {
        for (std::size_t M : Ms) {
          DecoderConfig c = base;
          c.R = R;
          c.W = W;
          c.M = M;
          c.validate();
          grid.push_back({kind, c});
        }
      }
    }
  }
  return grid;
}

void sort_grid(std::vector<SweepSpec>& grid) {
  auto key = [](const SweepSpec& s) {
    const double R = s.kind.type == DecoderType::kAPD ? s.config.R : -1.0;
    return std::make_tuple(s.kind.name(), R, s.config.W, s.config.M);
  };
  std::stable_sort(grid.begin(), grid.end(),
                   [&](const SweepSpec& a, const SweepSpec& b) { return key(a) < key(b); });
}

std::vector<SweepPoint> run_sweep(const SequenceModel& p_D, const SequenceModel* p_hat,
                                  std::span<const SweepSpec> grid, std::size_t trials,
                                  const CostModelParams& cost) {
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (const auto& spec : grid) {
    const auto traces = run_trials(spec.kind, p_D, p_hat, spec.config, trials, cost);
    const auto reference = ar_reference_law(p_D, spec.config);
    const auto law = empirical_law(traces, p_D.vocab().size(), spec.config.n_max);

    SweepPoint pt;
    pt.kind = spec.kind;
    pt.config = spec.config;
    pt.trials = trials;
    std::tie(pt.mean_parallel_tokens, pt.se_parallel_tokens) = parallel_tokens_stats(traces);
    if (trials > 0) {
      pt.quality_tv = total_variation(law, reference);
      pt.se_quality_tv = total_variation_standard_error(law, reference, trials);
    }
    std::tie(pt.simulated_throughput, pt.se_throughput) = throughput_stats(traces);
    points.push_back(pt);
  }
  return points;
}

}  // namespace apd
