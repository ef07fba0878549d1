#include <random>

#include "apd/builtin_models.hpp"
#include "apd/cost_model.hpp"
#include "apd/decoders.hpp"
#include "apd/error.hpp"
#include "apd/sweep.hpp"
#include "doctest.h"

using namespace apd;

TEST_CASE("iteration cost formula") {
  const CostModelParams p{2.0, 1.0};
  // q = min(3,5) + min(2,4) = 5, k = 5 + 2 = 7
  CHECK(iteration_cost(5, 4, 3, 2, p) == 2.0 * 5 * 7 + 1.0);
  CHECK(iteration_cost(0, 4, 3, 8, p) == 2.0 * 4 * 4 + 1.0);
  CHECK_THROWS_AS((CostModelParams{0.0, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((CostModelParams{1.0, -1.0}.validate()), ValidationError);
}

TEST_CASE("property: cost is monotone in W and M") {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<std::size_t> d(0, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t prefix = d(gen), masked = 1 + d(gen), W = 1 + d(gen), M = 1 + d(gen);
    const double c = iteration_cost(prefix, masked, W, M, {});
    CHECK(iteration_cost(prefix, masked, W + 1, M, {}) >= c);
    CHECK(iteration_cost(prefix, masked, W, M + 1, {}) >= c);
  }
}

TEST_CASE("retiming preserves acceptance and recomputes costs") {
  const auto m = builtin_model("chain8");
  DecoderConfig c;
  c.n_max = 8;
  c.M = 8;
  c.W = 8;
  c.seed = 4;
  const auto tr = apd_decode(*m, *m, c);
  const auto re = retime_trace(tr, 2, 3, {});
  CHECK(re.tokens == tr.tokens);
  CHECK(re.accepted_counts == tr.accepted_counts);
  std::size_t prefix = 0;
  for (std::size_t i = 0; i < tr.iterations(); ++i) {
    CHECK(re.iteration_costs[i] == iteration_cost(prefix, tr.masked_lengths[i], 2, 3, {}));
    prefix += tr.accepted_counts[i];
  }
  CHECK(retime_trace(tr, 8, 8, {}).iteration_costs == tr.iteration_costs);
}

TEST_CASE("grid expansion varies R only for apd") {
  DecoderConfig base;
  base.n_max = 4;
  const std::vector<DecoderKind> kinds = {DecoderKind::ar(), DecoderKind::apd()};
  const std::vector<double> Rs = {0.0, 0.5, 1.0};
  const std::vector<std::size_t> Ws = {1, 2};
  const std::vector<std::size_t> Ms = {4};
  auto grid = expand_grid(kinds, Rs, Ws, Ms, base);
  CHECK(grid.size() == 2 + 6);
  sort_grid(grid);
  CHECK(grid.front().kind == DecoderKind::apd());
  CHECK(grid.front().config.R == 0.0);
  CHECK(grid.back().kind == DecoderKind::ar());
  const std::vector<std::size_t> too_big = {5};
  CHECK_THROWS_AS(expand_grid(kinds, Rs, Ws, too_big, base), ValidationError);
}

TEST_CASE("sweep statistics on a deterministic model") {
  const auto m = builtin_model("determ4");
  DecoderConfig base;
  base.n_max = 4;
  base.M = 4;
  base.W = 4;
  const std::vector<DecoderKind> kinds = {DecoderKind::ar(), DecoderKind::apd()};
  const std::vector<double> Rs = {0.5};
  const std::vector<std::size_t> Ws = {4};
  const std::vector<std::size_t> Ms = {4};
  const auto grid = expand_grid(kinds, Rs, Ws, Ms, base);
  const auto points = run_sweep(*m, m.get(), grid, 50);
  REQUIRE(points.size() == 2);
  CHECK(points[0].mean_parallel_tokens == 1.0);
  CHECK(points[0].se_parallel_tokens == 0.0);
  CHECK(points[0].quality_tv == 0.0);
  CHECK(points[1].mean_parallel_tokens == 4.0);
  CHECK(points[1].simulated_throughput > points[0].simulated_throughput);
}

TEST_CASE("throughput helpers agree with trace totals") {
  const auto m = builtin_model("dep4");
  DecoderConfig c;
  c.n_max = 4;
  c.M = 4;
  c.W = 4;
  const auto traces = run_trials(DecoderKind::apd(), *m, m.get(), c, 100);
  double tokens = 0, cost = 0;
  for (const auto& t : traces) {
    tokens += static_cast<double>(t.tokens.size());
    cost += t.total_cost();
  }
  CHECK(throughput_stats(traces).first == doctest::Approx(tokens / cost));
  CHECK(retimed_throughput(traces, 4, 4, {}) == doctest::Approx(tokens / cost));
}

TEST_CASE("standard errors shrink like one over root trials") {
  const auto m = builtin_model("dep4");
  DecoderConfig c;
  c.n_max = 4;
  c.M = 4;
  c.W = 4;
  const std::vector<DecoderKind> kinds = {DecoderKind::apd()};
  const std::vector<double> Rs = {0.5};
  const std::vector<std::size_t> Ws = {4};
  const std::vector<std::size_t> Ms = {4};
  const auto grid = expand_grid(kinds, Rs, Ws, Ms, c);
  const auto small = run_sweep(*m, m.get(), grid, 1000);
  const auto large = run_sweep(*m, m.get(), grid, 16000);
  const double ratio = small[0].se_parallel_tokens / large[0].se_parallel_tokens;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
  const double tv_ratio = small[0].se_quality_tv / large[0].se_quality_tv;
  CHECK(tv_ratio == doctest::Approx(4.0).epsilon(0.2));
}
