#include <doctest.h>

#include "densideal/errors.hpp"
#include "densideal/sets.hpp"
#include "random_sets.hpp"

using namespace densideal;

namespace {

// (2k!, 3k!] for k >= 1, written half-open.
OmegaSubset eu_blocks(int p = 2, int q = 3) {
  auto gen = [p, q](std::size_t j) -> std::optional<Interval> {
    Integer f = factorial(j + 1);
    return Interval{p * f + 1, q * f + 1};
  };
  return OmegaSubset::blocks(gen, json{{"kind", "blocks"}});
}

std::vector<Integer> ints(std::initializer_list<long> xs) {
  std::vector<Integer> out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

std::vector<Integer> members(const OmegaSubset& s, long below) { return s.elements_below(below); }

}  // namespace

TEST_CASE("membership on small presentations") {
  auto f = OmegaSubset::finite(ints({7, 2, 5}));
  CHECK(f.contains(5));
  CHECK_FALSE(f.contains(6));
  CHECK(eu_blocks().contains(5));
  CHECK_FALSE(eu_blocks().contains(4));
  auto evens = OmegaSubset::periodic(2, ints({0}));
  CHECK_FALSE(set_complement(evens).contains(4));
  CHECK(set_complement(evens).contains(7));
}

TEST_CASE("prefix counts") {
  auto f = OmegaSubset::finite(ints({2, 5, 7}));
  CHECK(f.prefix_count(6) == 2);
  CHECK(f.prefix_count(0) == 0);
  CHECK(eu_blocks().prefix_count(7) == 3);
  CHECK(members(eu_blocks(), 7) == ints({3, 5, 6}));

  // independent oracle: clip each interval by hand
  Integer n = 3 * factorial(8) + 1;
  Integer expected = 0;
  for (unsigned long k = 1; k <= 8; ++k) expected += factorial(k);
  CHECK(eu_blocks().prefix_count(n) == expected);
  Integer clipped = 0;
  for (unsigned long k = 1; k <= 12; ++k) {
    Integer lo = 2 * factorial(k) + 1, hi = 3 * factorial(k) + 1;
    if (lo >= n) break;
    clipped += (hi < n ? hi : n) - lo;
  }
  CHECK(clipped == expected);
}

TEST_CASE("positions beyond 64 bits") {
  Integer big = 3 * factorial(25) + 1;
  auto s = eu_blocks();
  CHECK(s.contains(big - 1));
  CHECK_FALSE(s.contains(big));
  Integer sum = 0;
  for (unsigned long k = 1; k <= 25; ++k) sum += factorial(k);
  CHECK(s.prefix_count(big) == sum);
  CHECK(s.nth(sum - 1, big * 2) == big - 1);
}

TEST_CASE("prefix domination examples") {
  auto c = eu_blocks(2, 3);
  auto b = eu_blocks(1, 2);
  auto r = dominates_prefixwise(c, b, 100000);
  CHECK(r.holds);
  CHECK(dominates_prefixwise(c, c, 12345).holds);
  auto bad = dominates_prefixwise(OmegaSubset::finite(ints({3})), OmegaSubset::finite(ints({4})), 5);
  CHECK_FALSE(bad.holds);
  REQUIRE(bad.first_failure);
  CHECK(*bad.first_failure == 4);
  // B dominates C but not the other way round
  auto back = dominates_prefixwise(b, c, 100);
  CHECK_FALSE(back.holds);
  CHECK(*back.first_failure == 3);  // 2 is in B, 3 in C
  CHECK_THROWS_AS(dominates_prefixwise(b, c, 0), validation_error);
}

TEST_CASE("split along the enumeration") {
  auto omega = OmegaSubset::omega();
  auto r = split_mod(omega, 2, 10);
  REQUIRE(r.classes.size() == 2);
  CHECK(members(r.classes[0], 100) == ints({2, 4, 6, 8}));
  CHECK(members(r.classes[1], 100) == ints({3, 5, 7, 9}));
  CHECK(members(r.leftover, 100) == ints({0, 1}));

  auto evens = OmegaSubset::periodic(2, ints({0}));
  auto e = split_mod(evens, 3, 20);
  CHECK(members(e.classes[0], 100) == ints({6, 12, 18}));
  CHECK(members(e.classes[1], 100) == ints({8, 14}));
  CHECK(members(e.classes[2], 100) == ints({10, 16}));
  CHECK(members(e.leftover, 100) == ints({0, 2, 4}));

  auto one = split_mod(OmegaSubset::finite(ints({4, 9, 11})), 1, 50);
  CHECK(members(one.classes[0], 100) == ints({9, 11}));

  CHECK_THROWS_AS(split_mod(OmegaSubset::finite(ints({1, 2})), 2, 50), degenerate_input_error);
}

TEST_CASE("split classes stay under the ceiling share") {
  testing::SetSampler sampler(77, 2000);
  for (int t = 0; t < 40; ++t) {
    auto s = sampler.draw(2);
    long total = 0;
    for (char c : s.bits) total += c;
    std::size_t d = static_cast<std::size_t>(sampler.pick(1, 5));
    if (total < static_cast<long>(d) + 1) {
      CHECK_THROWS_AS(split_mod(s.set, d, 2000), degenerate_input_error);
      continue;
    }
    auto r = split_mod(s.set, d, 2000);
    Integer joined = r.leftover.prefix_count(2000);
    for (const auto& cls : r.classes) joined += cls.prefix_count(2000);
    CHECK(joined == total);
    for (long n = 0; n <= 2000; n += 7) {
      Integer whole = s.set.prefix_count(n);
      for (const auto& cls : r.classes) CHECK(cls.prefix_count(n) <= ceil_div(whole, Integer(long(d))));
    }
  }
}

TEST_CASE("random presentations agree with enumeration") {
  const long limit = 10000;
  testing::SetSampler sampler(20240611, limit);
  for (int t = 0; t < 60; ++t) {
    auto a = sampler.draw();
    auto b = sampler.draw();
    long ca = 0, cb = 0, cu = 0, ci = 0;
    auto u = set_union(a.set, b.set);
    auto i = set_intersection(a.set, b.set);
    for (long n = 0; n <= limit; ++n) {
      if (n % 97 == 0 || n == limit) {
        CHECK(a.set.prefix_count(n) == ca);
        CHECK(u.prefix_count(n) + i.prefix_count(n) == a.set.prefix_count(n) + b.set.prefix_count(n));
        CHECK(u.prefix_count(n) == cu);
        CHECK(i.prefix_count(n) == ci);
      }
      if (n < limit) {
        if (n % 13 == 0) CHECK(a.set.contains(n) == bool(a.bits[n]));
        ca += a.bits[n];
        cb += b.bits[n];
        cu += a.bits[n] || b.bits[n];
        ci += a.bits[n] && b.bits[n];
      }
    }
    long h = sampler.pick(1, limit);
    auto expect = testing::brute_first_failure(a.bits, b.bits, h);
    auto got = dominates_prefixwise(a.set, b.set, h);
    CHECK(got.holds == !expect.has_value());
    if (expect) CHECK(*got.first_failure == *expect);
  }
}

TEST_CASE("nth inverts prefix count") {
  testing::SetSampler sampler(5, 3000);
  for (int t = 0; t < 30; ++t) {
    auto s = sampler.draw(2);
    auto elems = s.set.elements_below(3000);
    for (std::size_t j = 0; j < elems.size(); j += 17) CHECK(s.set.nth(j, 1 << 20) == elems[j]);
  }
  CHECK_THROWS_AS(OmegaSubset::finite(ints({1})).nth(1, 1000), scan_bound_error);
}

TEST_CASE("malformed block families are rejected") {
  auto overlapping = OmegaSubset::blocks(
      [](std::size_t j) -> std::optional<Interval> {
        return Interval{Integer(long(j) * 3), Integer(long(j) * 3 + 5)};
      },
      json{});
  CHECK_THROWS_AS(overlapping.prefix_count(20), validation_error);
  CHECK_THROWS_AS(OmegaSubset::intervals({{0, 5}, {3, 8}}), validation_error);
}

TEST_CASE("prefix counts queried out of order on composite sets") {
  testing::SetSampler sampler(31337, 4000);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    auto s = sampler.draw();
    std::vector<long> cum(4001, 0);
    for (long i = 0; i < 4000; ++i) cum[i + 1] = cum[i] + s.bits[i];
    for (int q = 0; q < 300; ++q) {
      long n = std::uniform_int_distribution<long>(0, 4000)(rng);
      CHECK(s.set.prefix_count(n) == cum[n]);
    }
  }
}
