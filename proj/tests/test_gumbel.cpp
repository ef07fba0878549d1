#include <cmath>
#include <set>

#include "apd/gumbel.hpp"
#include "doctest.h"

using namespace apd;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using Ctr = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  CHECK(philox4x32(Ctr{0, 0, 0, 0}, Key{0, 0}) ==
        Ctr{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(Ctr{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                   Key{0xffffffff, 0xffffffff}) ==
        Ctr{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(Ctr{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                   Key{0xa4093822, 0x299f31d0}) ==
        Ctr{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter uniforms stay strictly inside (0, 1)") {
  for (std::uint32_t i = 0; i < 100000; ++i) {
    const double u = counter_uniform(5, i, 0, 0);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("counter uniforms are keyed by every coordinate") {
  const double base = counter_uniform(1, 2, 3, 4, 0);
  CHECK(base == counter_uniform(1, 2, 3, 4, 0));
  CHECK(base != counter_uniform(2, 2, 3, 4, 0));
  CHECK(base != counter_uniform(1, 3, 3, 4, 0));
  CHECK(base != counter_uniform(1, 2, 4, 4, 0));
  CHECK(base != counter_uniform(1, 2, 3, 5, 0));
  CHECK(base != counter_uniform(1, 2, 3, 4, 1));
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  CHECK(derive_seed(42, 3) != derive_seed(43, 3));
}

TEST_CASE("gumbel mean is the Euler-Mascheroni constant") {
  const Vocab vocab = Vocab::anonymous(10);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t it = 0; it < 100000; ++it) {
    const auto draw = fresh_gumbel(9, it, 1, vocab);
    for (double g : draw.row(0)) {
      sum += g;
      ++count;
    }
  }
  CHECK(count == 1000000);
  CHECK(std::abs(sum / static_cast<double>(count) - 0.5772156649015329) < 0.01);
}

TEST_CASE("a wider draw extends a narrower one") {
  const Vocab vocab = Vocab::anonymous(4);
  const auto narrow = fresh_gumbel(3, 7, 2, vocab);
  const auto wide = fresh_gumbel(3, 7, 5, vocab);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t v = 0; v < 4; ++v) CHECK(narrow.row(i)[v] == wide.row(i)[v]);
  }
  const auto other = fresh_gumbel(3, 7, 2, vocab, NoiseStream::kIndependentTarget);
  CHECK(other.row(0)[0] != narrow.row(0)[0]);
  CHECK_THROWS(fresh_gumbel(3, 7, 0, vocab));
  CHECK_THROWS(narrow.row(2));
}

TEST_CASE("positional draws repeat rows across iterations") {
  const Vocab vocab = Vocab::anonymous(3);
  const auto first = positional_gumbel(4, 0, 2, 3, vocab);
  const auto later = positional_gumbel(4, 1, 3, 2, vocab);
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(first.row(1)[v] == later.row(0)[v]);
    CHECK(first.row(2)[v] == later.row(1)[v]);
  }
  const auto single = positional_gumbel(4, 5, 5, 1, vocab);
  const auto fresh = fresh_gumbel(4, 5, 1, vocab);
  for (std::size_t v = 0; v < 3; ++v) CHECK(single.row(0)[v] == fresh.row(0)[v]);
}
