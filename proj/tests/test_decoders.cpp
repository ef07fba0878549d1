#include <cmath>

#include "apd/builtin_models.hpp"
#include "apd/decoders.hpp"
#include "apd/error.hpp"
#include "apd/metrics.hpp"
#include "doctest.h"

using namespace apd;

namespace {

DecoderConfig config_for(const SequenceModel& m, std::uint64_t seed) {
  DecoderConfig c;
  c.n_max = m.horizon();
  c.W = c.n_max;
  c.M = c.n_max;
  c.seed = seed;
  return c;
}

bool same_trace(const DecodeTrace& a, const DecodeTrace& b) {
  if (a.groups.size() != b.groups.size()) return false;
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    if (a.groups[i].start != b.groups[i].start || a.groups[i].end != b.groups[i].end) return false;
  }
  return a.tokens == b.tokens && a.accepted_counts == b.accepted_counts &&
         a.iteration_costs == b.iteration_costs && a.masked_lengths == b.masked_lengths;
}

}  // namespace

TEST_CASE("decoder names parse and print") {
  for (const char* name : {"ar", "semi:3", "oneshot", "apd"}) {
    CHECK(DecoderKind::parse(name).name() == name);
  }
  CHECK_THROWS_AS(DecoderKind::parse("semi:0"), ValidationError);
  CHECK_THROWS_AS(DecoderKind::parse("semi:x"), ValidationError);
  CHECK_THROWS_AS(DecoderKind::parse("beam"), ValidationError);
}

TEST_CASE("accepted length counts the agreeing run after the first token") {
  const Sequence p = {1, 2, 3, 4};
  CHECK(accepted_length(p, Sequence{9, 2, 3, 0}) == 3);
  CHECK(accepted_length(p, Sequence{1, 0, 3, 4}) == 1);
  CHECK(accepted_length(p, p) == 4);
  CHECK(accepted_length(Sequence{}, Sequence{}) == 0);
}

TEST_CASE("semi-ar with k=1 is bitwise ar") {
  const auto m = builtin_model("chain8");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = config_for(*m, seed);
    CHECK(same_trace(ar_decode(*m, c), semi_ar_decode(*m, 1, c)));
  }
}

TEST_CASE("apd with R=1 is semi-ar with k=M") {
  const auto m = builtin_model("dep4");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto c = config_for(*m, seed);
    c.R = 1.0;
    c.M = 2;
    CHECK(same_trace(apd_decode(*m, *m, c), semi_ar_decode(*m, 2, c)));
  }
}

TEST_CASE("apd proposal and target see one noise object") {
  const auto m = builtin_model("dep4");
  auto c = config_for(*m, 5);
  std::size_t calls = 0;
  bool identical = true;
  apd_decode(*m, *m, c, {}, [&](std::size_t, const GumbelDraw& a, const GumbelDraw& b) {
    ++calls;
    identical = identical && (&a == &b);
  });
  CHECK(calls >= 1);
  CHECK(identical);

  c.independent_draws = true;
  bool distinct = true;
  apd_decode(*m, *m, c, {}, [&](std::size_t, const GumbelDraw& a, const GumbelDraw& b) {
    distinct = distinct && !(a == b);
  });
  CHECK(distinct);
}

TEST_CASE("traces satisfy their invariants on every builtin") {
  for (const auto& name : builtin_model_names()) {
    CAPTURE(name);
    const auto m = builtin_model(name);
    for (const char* dec : {"ar", "semi:2", "oneshot", "apd"}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = config_for(*m, seed);
        c.M = std::min<std::size_t>(3, c.n_max);
        c.W = 2;
        const auto tr = decode(DecoderKind::parse(dec), *m, m.get(), c);
        CHECK_NOTHROW(tr.check_invariants());
        CHECK(tr.tokens.size() <= c.n_max);
        CHECK(tr.masked_lengths.size() == tr.iterations());
        const std::size_t cap = std::string(dec) == "oneshot" ? c.n_max
                                : std::string(dec) == "semi:2" ? 2
                                                               : c.M;
        for (std::size_t k : tr.accepted_counts) CHECK(k <= cap);
      }
    }
  }
}

TEST_CASE("decoding stops at eos") {
  const auto m = builtin_model("eos5");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto tr = apd_decode(*m, *m, config_for(*m, seed));
    for (std::size_t i = 0; i + 1 < tr.tokens.size(); ++i) CHECK(tr.tokens[i] != 2);
  }
}

TEST_CASE("deterministic model decodes to its sequence with one iteration under apd") {
  const auto m = builtin_model("determ4");
  const auto tr = apd_decode(*m, *m, config_for(*m, 1));
  CHECK(tr.tokens == Sequence{0, 2, 1, 0});
  CHECK(tr.iterations() == 1);
}

TEST_CASE("run_trials is independent of the worker count") {
  const auto m = builtin_model("dep4");
  const auto c = config_for(*m, 77);
  setenv("APD_THREADS", "1", 1);
  const auto one = run_trials(DecoderKind::apd(), *m, m.get(), c, 200);
  setenv("APD_THREADS", "4", 1);
  const auto four = run_trials(DecoderKind::apd(), *m, m.get(), c, 200);
  unsetenv("APD_THREADS");
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(same_trace(one[i], four[i]));
}

TEST_CASE("model and config checks") {
  const auto m = builtin_model("dep4");
  auto c = config_for(*m, 0);
  c.n_max = 5;
  c.M = 5;
  CHECK_THROWS_AS(ar_decode(*m, c), ValidationError);
  const auto other = builtin_model("j1");
  CHECK_THROWS_AS(apd_decode(*m, *other, config_for(*m, 0)), ValidationError);
  CHECK_THROWS_AS(decode(DecoderKind::apd(), *m, nullptr, config_for(*m, 0)), ValidationError);
  CHECK(decode_distribution_mc(DecoderKind::ar(), *m, nullptr, config_for(*m, 0), 0).empty());
}

TEST_CASE("property: apd with the exact verifier at R=0 emits the ar tokens") {
  for (const auto& name : builtin_model_names()) {
    CAPTURE(name);
    const auto m = builtin_model(name);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto c = config_for(*m, seed);
      c.R = 0.0;
      c.M = 1 + seed % c.n_max;
      CHECK(apd_decode(*m, *m, c).tokens == ar_decode(*m, c).tokens);
    }
  }
}

TEST_CASE("apd with the exact verifier at R=0 reproduces the ar law") {
  const auto m = builtin_model("order2");
  auto c = config_for(*m, 3);
  c.R = 0.0;
  const auto law = decode_distribution_mc(DecoderKind::apd(), *m, m.get(), c, 20000);
  CHECK(total_variation(law, ar_reference_law(*m, c)) < 0.03);
}

TEST_CASE("per-iteration noise redraws rejected positions and biases the R=0 law") {
  // On j1 the redraw gives P(x2=A | x1=A) = 0.5 + 0.3 * 0.8 = 0.74, not 0.8.
  const auto m = builtin_model("j1");
  auto c = config_for(*m, 8);
  c.R = 0.0;
  c.fresh_noise_per_iteration = true;
  const auto law = decode_distribution_mc(DecoderKind::apd(), *m, m.get(), c, 100000);
  const double p_aa = law.prob({0, 0}) / (law.prob({0, 0}) + law.prob({0, 1}));
  CHECK(std::abs(p_aa - 0.74) < 0.01);
}

TEST_CASE("ar ignores the noise keying") {
  const auto m = builtin_model("chain8");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = config_for(*m, seed);
    const auto a = ar_decode(*m, c);
    c.fresh_noise_per_iteration = true;
    CHECK(same_trace(a, ar_decode(*m, c)));
  }
}

TEST_CASE("ar law on j1 matches the joint table") {
  const auto m = builtin_model("j1");
  const auto law = decode_distribution_mc(DecoderKind::ar(), *m, nullptr, config_for(*m, 1), 100000);
  CHECK(total_variation(law, m->exact_sequence_distribution()) <= 0.01);
}

TEST_CASE("semi-ar k=2 on j1 samples the marginal product") {
  const auto m = builtin_model("j1");
  const auto law =
      decode_distribution_mc(DecoderKind::semi_ar(2), *m, nullptr, config_for(*m, 1), 100000);
  CHECK(total_variation(law, marginal_product(*m)) <= 0.01);
  CHECK(total_variation(law, m->exact_sequence_distribution()) > 0.25);
}

TEST_CASE("semi-ar with k=n is one-shot") {
  const auto m = builtin_model("dep4");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = config_for(*m, seed);
    const auto one = one_shot_decode(*m, c);
    CHECK(same_trace(one, semi_ar_decode(*m, 4, c)));
    CHECK(one.iterations() == 1);
  }
}

TEST_CASE("monte-carlo law converges with more trials") {
  const auto m = builtin_model("dep4");
  const auto c = config_for(*m, 2);
  const auto exact = m->exact_sequence_distribution();
  const auto small = decode_distribution_mc(DecoderKind::ar(), *m, nullptr, c, 1000);
  const auto large = decode_distribution_mc(DecoderKind::ar(), *m, nullptr, c, 100000);
  CHECK(total_variation(large, exact) < total_variation(small, exact));
  CHECK(large.total() == doctest::Approx(1.0).epsilon(1e-12));
}
