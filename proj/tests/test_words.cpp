#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "chaosgame/errors.hpp"
#include "chaosgame/words.hpp"

using namespace chaosgame;

namespace {

// Independent oracle: smallest prefix length containing every m-word, found
// by scanning all windows with a std::set.
std::optional<std::uint64_t> brute_coverage(const std::vector<int>& s, int k, int m) {
  std::set<std::vector<int>> seen;
  const auto total = static_cast<std::size_t>(std::llround(std::pow(k, m)));
  for (std::size_t end = static_cast<std::size_t>(m); end <= s.size(); ++end) {
    seen.insert(std::vector<int>(s.begin() + static_cast<long>(end - m), s.begin() + static_cast<long>(end)));
    if (seen.size() == total) return end;
  }
  return std::nullopt;
}

std::map<std::vector<int>, int> factor_counts(const std::vector<int>& s, int m) {
  std::map<std::vector<int>, int> counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(m) <= s.size(); ++i)
    ++counts[std::vector<int>(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i) + m)];
  return counts;
}

__int128 champernowne_formula(int k, int m) {
  __int128 km1 = 1, km2;
  for (int i = 0; i < m + 1; ++i) km1 *= k;
  km2 = km1 * k;
  return (k - km1 * (m + 1) + m * km2) / ((k - 1) * (k - 1));
}

std::vector<int> prefix(DriverStream d, std::size_t n) { return d.take(n).symbols; }

}  // namespace

TEST_CASE("champernowne prefixes") {
  CHECK(prefix(champernowne(2), 10) == std::vector<int>{1, 2, 1, 1, 1, 2, 2, 1, 2, 2});
  CHECK(prefix(champernowne(3), 3) == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(champernowne(1), ValidationError);
}

TEST_CASE("word coverage on champernowne") {
  auto d = champernowne(2);
  CHECK(*word_coverage(d, 1).n == 2);
  d = champernowne(2);
  CHECK(*word_coverage(d, 2).n == 7);
  CHECK(*brute_coverage(prefix(champernowne(2), 40), 2, 2) == 7);

  for (int k : {2, 3}) {
    const int m_max = k == 2 ? 10 : 6;
    for (int m = 1; m <= m_max; ++m) {
      auto drv = champernowne(k);
      const auto stat = word_coverage(drv, m);
      REQUIRE(stat.n);
      CHECK(static_cast<__int128>(*stat.n) <= champernowne_formula(k, m));
      if (m <= 6) {
        const auto ref = brute_coverage(prefix(champernowne(k), *stat.n + 5), k, m);
        CHECK(ref == stat.n);
      }
    }
  }
}

TEST_CASE("champernowne bound formula agrees with the series") {
  for (int k : {2, 3, 5}) {
    for (int m = 1; m <= 8; ++m) {
      __int128 series = 0, km = 1;
      for (int j = 1; j <= m; ++j) {
        km *= k;
        series += j * km;
      }
      CHECK(series == champernowne_formula(k, m));
      CHECK(static_cast<__int128>(champernowne_coverage_bound(k, m)) == series);
    }
  }
}

TEST_CASE("word coverage monotone in m and respects the de Bruijn floor") {
  std::vector<DriverStream (*)()> makers = {
      [] { return champernowne(2); }, [] { return infinite_de_bruijn(2); },
      [] { return random_driver(2, 7); }};
  for (auto make : makers) {
    std::uint64_t prev = 0;
    for (int m = 1; m <= 8; ++m) {
      auto d = make();
      const auto stat = word_coverage(d, m);
      REQUIRE(stat.n);
      CHECK(*stat.n >= prev);
      CHECK(*stat.n >= (std::uint64_t{1} << m) + m - 1);
      prev = *stat.n;
    }
  }
}

TEST_CASE("word coverage caps and budget") {
  auto lit = literal_driver(Word{{1, 1, 1, 1}, 2});
  CHECK_THROWS_AS(word_coverage(lit, 2), CapExceeded);
  auto c = champernowne(2);
  const auto stat = word_coverage(c, 5, 20);
  CHECK_FALSE(stat.n);
  CHECK(stat.cap == 20);
  auto big = champernowne(3);
  CHECK_THROWS_AS(word_coverage(big, 20, 1000, 1 << 20), BudgetExceeded);
}

TEST_CASE("de Bruijn words") {
  const auto w1 = de_bruijn_word(2, 1);
  CHECK(w1.size() == 2);
  CHECK(factor_counts(w1.symbols, 1).size() == 2);

  const auto w2 = de_bruijn_word(2, 2);
  CHECK(w2.size() == 5);
  const auto counts = factor_counts(w2.symbols, 2);
  CHECK(counts.size() == 4);
  for (const auto& [word, n] : counts) CHECK(n == 1);

  CHECK(de_bruijn_word(2, 3).size() == 10);

  for (int k : {2, 3, 4}) {
    for (int m = 1; std::pow(k, m) <= 4096; ++m) {
      const auto w = de_bruijn_word(k, m);
      const auto km = static_cast<std::uint64_t>(std::llround(std::pow(k, m)));
      CHECK(w.size() == km + m - 1);
      const auto fc = factor_counts(w.symbols, m);
      CHECK(fc.size() == km);
      CHECK(de_bruijn_order(w) == m);
      auto lit = literal_driver(w);
      CHECK(*word_coverage(lit, m).n == km + m - 1);
    }
  }
  CHECK_THROWS_AS(de_bruijn_word(2, 30, 1 << 20), BudgetExceeded);
}

TEST_CASE("de Bruijn order detection rejects non de Bruijn words") {
  CHECK_FALSE(de_bruijn_order(Word{{1, 1, 2, 2}, 2}));
  CHECK(de_bruijn_order(Word{{1, 1, 2, 2, 1}, 2}) == 2);
  CHECK(de_bruijn_order(Word{{2, 1}, 2}) == 1);
}

TEST_CASE("de Bruijn extension keeps the prefix") {
  for (const auto& start : {Word{{1, 2, 3}, 3}, Word{{3, 1, 2}, 3}, Word{{2, 1, 3}, 3}}) {
    const auto ext = extend_de_bruijn(start);
    CHECK(ext.size() == 10);
    CHECK(std::equal(start.symbols.begin(), start.symbols.end(), ext.symbols.begin()));
    CHECK(de_bruijn_order(ext) == 2);
  }
  for (const auto& start : {Word{{1, 1, 2, 2, 1}, 2}, Word{{2, 2, 1, 1, 2}, 2}, Word{{1, 2, 2, 1, 1}, 2}}) {
    const auto ext = extend_de_bruijn(start);
    CHECK(ext.size() == 19);
    CHECK(std::equal(start.symbols.begin(), start.symbols.end(), ext.symbols.begin()));
    CHECK(de_bruijn_order(ext) == 4);
  }
  // A single step is not always possible for K = 2.
  bool some_failed = false;
  for (const auto& start : {Word{{1, 1, 2, 2, 1}, 2}, Word{{1, 2, 2, 1, 1}, 2}}) {
    try {
      const auto ext = extend_de_bruijn_to(start, 3);
      CHECK(de_bruijn_order(ext) == 3);
    } catch (const InvariantViolation&) {
      some_failed = true;
    }
  }
  CHECK(some_failed);
  CHECK_THROWS_AS(extend_de_bruijn(Word{{1, 1, 2}, 2}), ValidationError);
}

TEST_CASE("infinite de Bruijn prefixes") {
  CHECK(de_bruijn_order(Word{prefix(infinite_de_bruijn(3), 3), 3}) == 1);
  CHECK(de_bruijn_order(Word{prefix(infinite_de_bruijn(2), 5), 2}) == 2);

  auto c = infinite_de_bruijn(2);
  CHECK(*word_coverage(c, 3).n <= 19);

  // Prefix stability: reading further never changes earlier symbols.
  const auto long_prefix = prefix(infinite_de_bruijn(2), (1 << 10) + 9);
  for (int m = 2; m <= 10; m += 2) {
    const std::size_t len = (std::size_t{1} << m) + m - 1;
    const auto shortp = prefix(infinite_de_bruijn(2), len);
    CHECK(std::equal(shortp.begin(), shortp.end(), long_prefix.begin()));
    CHECK(de_bruijn_order(Word{shortp, 2}) == m);
  }
  const auto p3 = prefix(infinite_de_bruijn(3), 3 * 3 * 3 * 3 * 3 + 4);
  for (int m = 1; m <= 5; ++m) {
    const std::size_t len = static_cast<std::size_t>(std::llround(std::pow(3, m))) + m - 1;
    CHECK(de_bruijn_order(Word{{p3.begin(), p3.begin() + static_cast<long>(len)}, 3}) == m);
  }
}

TEST_CASE("example4 layout and driver") {
  const auto lay = example4_layout(1.0);
  CHECK(lay.k0 == 1);
  CHECK(lay.first_block() == 2);
  CHECK(lay.block_start(2) == 8);
  CHECK(lay.block_start(3) == 24);

  const auto s = prefix(example4_driver(1.0), 5000);
  for (int n = 1; n <= 7; ++n) CHECK(s[n - 1] == 2);
  CHECK(s[7] == 1);
  CHECK(s[8] == 1);
  CHECK(s[9] == 2);
  CHECK(s[23] == 1);
  CHECK(s[25] == 1);
  CHECK(s[26] == 2);

  // Position n carries 1 iff floor(k 2^k) <= n <= floor(k 2^k) + k - 1, k >= 2.
  for (std::uint64_t n = 1; n <= s.size(); ++n) {
    bool in_block = false;
    for (std::uint64_t k = 2; k * (1ull << k) <= n; ++k)
      if (n <= k * (1ull << k) + k - 1) in_block = true;
    CHECK((s[n - 1] == 1) == in_block);
  }

  // Blocks are disjoint.
  for (double z : {1.0, 0.5, 0.25}) {
    const auto l = example4_layout(z);
    for (int k = l.first_block(); k < l.first_block() + 40; ++k)
      CHECK(l.block_start(k) + static_cast<std::uint64_t>(k) <= l.block_start(k + 1));
  }
  CHECK_THROWS_AS(example4_driver(0.0), ValidationError);
  CHECK_THROWS_AS(example4_driver(-1.0), ValidationError);
}

TEST_CASE("example4 k0 conditions") {
  for (double z : {0.25, 0.5, 1.0, 2.0}) {
    const auto l = example4_layout(z);
    CHECK(l.k0 == std::max(l.k1, l.k2));
    for (int k = l.k1; k < l.k1 + 200; ++k) CHECK(k < std::exp2(k * z));
    if (l.k1 > 1) CHECK_FALSE(l.k1 - 1 < std::exp2((l.k1 - 1) * z));
    for (int k = l.k2; k < l.k2 + 200; ++k) CHECK((k + 1) * std::exp2(k * z) > 1.0 / (std::exp2(z) - 1.0));
  }
}

TEST_CASE("random driver") {
  CHECK(prefix(random_driver(3, 42), 10) == prefix(random_driver(3, 42), 10));
  CHECK(prefix(random_driver(3, 42), 20) != prefix(random_driver(3, 43), 20));
  for (int s : prefix(random_driver(1, 5), 50)) CHECK(s == 1);
  auto d = random_driver(2, 9);
  std::uint64_t ones = 0;
  constexpr std::uint64_t kDraws = 1'000'000;
  for (std::uint64_t i = 0; i < kDraws; ++i) ones += d.next() == 1;
  CHECK(std::abs(static_cast<double>(ones) / kDraws - 0.5) <= 0.01);
}

TEST_CASE("stream cursor semantics") {
  auto d = champernowne(2);
  d.take(5);
  CHECK(d.position() == 5);
  auto c = d.clone();
  CHECK(c.position() == 5);
  CHECK(d.take(7) == c.take(7));
  auto lit = literal_driver(Word{{1, 2}, 2});
  lit.next();
  lit.next();
  CHECK_THROWS_AS(lit.next(), CapExceeded);
  CHECK_THROWS_AS(literal_driver(Word{{1, 3}, 2}), ValidationError);
}

TEST_CASE("checked power") {
  CHECK(checked_power(2, 10) == 1024);
  CHECK_FALSE(checked_power(2, 64));
  CHECK_FALSE(checked_power(3, 5, 200));
  CHECK(de_bruijn_step(2) == 2);
  CHECK(de_bruijn_step(3) == 1);
}
