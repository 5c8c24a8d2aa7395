#include <doctest.h>

#include <random>

#include "densideal/errors.hpp"
#include "densideal/measures.hpp"
#include "random_sets.hpp"

using namespace densideal;

namespace {

OmegaSubset interval_set(long lo, long hi) { return OmegaSubset::intervals({{lo, hi}}); }

// B = union over n of the heavy buckets L^n_1..L^n_{k_n}; they sit contiguously at the start of D_n.
OmegaSubset bucket_union() {
  return OmegaSubset::blocks(
      [](std::size_t j) -> std::optional<Interval> {
        std::size_t n = j + 1;
        Interval top = measures::bucket_interval(n, measures::bucket_depth(n));
        Interval bottom = measures::bucket_interval(n, 1);
        return Interval{top.lo, bottom.hi};
      },
      json{});
}

OmegaSubset all_supports(const MeasureSequence& m, std::size_t count) {
  std::vector<Interval> iv;
  for (const auto& b : m.first_blocks(count)) {
    for (const auto& p : b.pieces) iv.push_back({p.lo, p.hi});
  }
  return OmegaSubset::intervals(iv);
}

// Pointwise sigma, independent of the piecewise bucket code.
std::map<long, Rational> sigma_oracle(const MeasureBlock& mu, const OmegaSubset& b) {
  std::map<long, long> counts;
  long d = mu.d().get_si();
  for (long i = mu.span.lo.get_si(); i < mu.span.hi.get_si(); ++i) {
    Rational w = mu.atom(i);
    if (w == 0 || !b.contains(i)) continue;
    long k = 0;
    while (Rational(k + 1, d) <= w) ++k;
    if (k >= 1) counts[k]++;
  }
  std::map<long, Rational> out;
  for (auto [k, c] : counts) out[k] = make_rational(k * (k + 1) * c, d);
  return out;
}

// Short explicit sequences with random piecewise weights; some blocks are probability measures.
MeasureSequence random_sequence(std::mt19937& rng, std::size_t blocks) {
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  std::vector<MeasureBlock> out;
  long pos = pick(0, 5);
  for (std::size_t n = 0; n < blocks; ++n) {
    long len = pick(1, 60);
    MeasureBlock b{n, {pos, pos + len}, {}};
    long p = pos;
    while (p < pos + len) {
      long q = std::min(pos + len, p + pick(1, 12));
      if (pick(0, 3) > 0) b.pieces.push_back({p, q, Rational(pick(1, 9), pick(1, 3 * len))});
      p = q;
    }
    if (b.pieces.empty()) b.pieces.push_back({pos, pos + 1, Rational(1, len)});
    for (auto& w : b.pieces) w.weight.canonicalize();
    out.push_back(b);
    pos += len + pick(0, 4);
  }
  return MeasureSequence::from_blocks(out, {}, json{{"kind", "explicit"}});
}

}  // namespace

TEST_CASE("block mass") {
  auto eu = measures::eu_blocks();
  auto d4 = eu.by_label(4).value();
  CHECK(d4.span == Interval{49, 73});
  CHECK(d4.mass(interval_set(49, 73)) == 1);
  CHECK(d4.mass(OmegaSubset::empty()) == 0);
  MeasureBlock pair{0, {0, 2}, {{0, 2, Rational(1, 2)}}};
  CHECK(block_mass(pair, OmegaSubset::periodic(2, {0})) == Rational(1, 2));
  CHECK(d4.atom(48) == 0);
  CHECK(d4.atom(49) == Rational(1, 24));
  CHECK(d4.atom(73) == 0);
}

TEST_CASE("block validation") {
  CHECK_THROWS_AS(validate_block(MeasureBlock{0, {0, 4}, {}}), validation_error);
  CHECK_THROWS_AS(validate_block(MeasureBlock{0, {0, 4}, {{0, 2, 0}}}), validation_error);
  CHECK_THROWS_AS(validate_block(MeasureBlock{0, {0, 4}, {{0, 5, 1}}}), validation_error);
  CHECK_THROWS_AS(validate_block(MeasureBlock{0, {0, 4}, {{0, 2, 1}, {1, 3, 1}}}), validation_error);
  CHECK_NOTHROW(validate_block(MeasureBlock{0, {0, 4}, {{0, 2, 1}, {3, 4, 1}}}));
  MeasureBlock a{0, {0, 4}, {{0, 4, Rational(1, 4)}}};
  MeasureBlock b{1, {3, 6}, {{3, 6, Rational(1, 3)}}};
  CHECK_THROWS_AS(MeasureSequence::from_blocks({a, b}, {}, json{}), validation_error);
  b.label = 0;
  b.span = {4, 7};
  b.pieces = {{4, 7, Rational(1, 3)}};
  CHECK_THROWS_AS(MeasureSequence::from_blocks({a, b}, {}, json{}), validation_error);
}

TEST_CASE("bucket indices") {
  CHECK(heavy_bucket(Rational(1, 8), 16) == 2);
  CHECK(heavy_bucket(Rational(1, 17), 16) == 0);
  CHECK(heavy_bucket(Rational(1, 16), 16) == 1);
  CHECK(light_bucket(Rational(1, 16), 16) == 0);
  CHECK(light_bucket(Rational(1, 32), 16) == 1);  // 1/(2d) <= w < 1/d
  CHECK(light_bucket(Rational(1, 48), 16) == 2);
  CHECK(light_bucket(Rational(1, 33), 16) == 2);
  CHECK(light_bucket(Rational(1, 31), 16) == 1);
}

TEST_CASE("catalog flags hold") {
  CHECK_FALSE(check_flags(measures::uniform_doubling(), 12));
  CHECK_FALSE(check_flags(measures::eu_blocks(), 10));
  CHECK_FALSE(check_flags(measures::heavy_last_half(), 12));
  CHECK_FALSE(check_flags(measures::growing_mass(), 30));
  CHECK_FALSE(check_flags(measures::triangular_uniform(), 60));
  CHECK_FALSE(check_flags(measures::factorial_halves(true), 9));
  CHECK_FALSE(check_flags(measures::factorial_halves(false), 9));
  CHECK_FALSE(check_flags(measures::bucketed(), 6));
  auto lying = MeasureSequence::from_blocks({MeasureBlock{0, {0, 2}, {{0, 2, Rational(1, 3)}}}},
                                            MeasureFlags{false, true}, json{});
  CHECK(check_flags(lying, 1));
}

TEST_CASE("triangular layout") {
  // label n lives in group k with k(k-1)/2 < n <= k(k+1)/2, blocks of size k laid end to end
  auto tri = measures::triangular_uniform();
  long pos = 0;
  long n = 1;
  for (long k = 1; k <= 12; ++k) {
    for (long r = 0; r < k; ++r, ++n) {
      auto b = tri.block(n - 1);
      CHECK(b.label == static_cast<std::uint64_t>(n));
      CHECK(b.span == Interval{pos, pos + k});
      pos += k;
    }
  }
}

TEST_CASE("exh profile on the eu blocks") {
  auto eu = measures::eu_blocks();
  auto b = OmegaSubset::blocks(
      [](std::size_t j) -> std::optional<Interval> {
        Integer f = factorial(j + 1);
        return Interval{f + 1, 2 * f + 1};
      },
      json{});
  auto c = OmegaSubset::blocks(
      [](std::size_t j) -> std::optional<Interval> {
        Integer f = factorial(j + 1);
        return Interval{2 * f + 1, 3 * f + 1};
      },
      json{});
  auto pb = exh_profile(eu, b, 10);
  REQUIRE(pb.profile.values.size() == 10);
  // D_1 = {3} meets (2!, 2*2!] = {3, 4}
  CHECK(pb.profile.values[0] == 1);
  for (std::size_t i = 1; i < 10; ++i) CHECK(pb.profile.values[i] == 0);
  CHECK(pb.running_sup.back() == 1);
  auto pc = exh_profile(eu, c, 10);
  for (const auto& v : pc.profile.values) CHECK(v == 1);
  CHECK(classify(pb.profile, Rational(1, 2)).classification == Trend::TrendZero);
  CHECK(classify(pc.profile, Rational(1, 2)).classification == Trend::WitnessAboveDelta);
  CHECK_THROWS_AS(exh_profile(eu, c, 0), validation_error);
}

TEST_CASE("farah statistics") {
  auto eu = farah_check(measures::eu_blocks(), 12);
  CHECK(eu.d1 == 1);
  CHECK(eu.d3 == 1);
  CHECK(eu.d3_positive);
  CHECK_FALSE(eu.d1_growing);
  for (std::size_t i = 0; i < eu.d2.values.size(); ++i) CHECK(eu.d2.values[i] == make_rational(1, factorial(i + 1)));
  CHECK(eu.d2_trend == Trend::TrendZero);

  auto heavy = farah_check(measures::heavy_last_half(), 6);
  CHECK(heavy.d1 == 1);
  CHECK(heavy.d3 == 1);
  for (std::size_t n = 0; n < heavy.d2.values.size(); ++n) CHECK(heavy.d2.values[n] == make_rational(1, pow2(n)));

  auto grow = farah_check(measures::growing_mass(), 20);
  CHECK(grow.d1 == 20);
  CHECK(grow.d1_growing);
  CHECK_THROWS_AS(farah_check(measures::eu_blocks(), 1), validation_error);
}

TEST_CASE("bounded ratio statistic") {
  CHECK(bounded_ratio_stat(measures::uniform_doubling(), 10) == 1);
  CHECK(bounded_ratio_stat(measures::triangular_uniform(), 30) == 1);
  CHECK(bounded_ratio_stat(measures::heavy_last_half(), 10) == 2);
  CHECK(bounded_ratio_stat(measures::bucketed(), 2) == 3);
}

TEST_CASE("bucketed layout") {
  CHECK(measures::bucket_depth(1) == 1);
  CHECK(measures::bucket_depth(2) == 3);
  CHECK(measures::bucket_depth(3) == 6);
  CHECK(measures::bucket_depth(4) == 10);
  // smallest admissible size by direct search, compared to the closed form
  Integer prev = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    std::size_t depth = measures::bucket_depth(n);
    Integer need = n == 1 ? Integer(1) : Integer(static_cast<unsigned long>(n * depth * (depth + 1))) * prev;
    Integer d = need;
    auto ok = [&](const Integer& x) {
      for (std::size_t k = 1; k <= depth; ++k) {
        if (x % Integer(static_cast<unsigned long>(n * k * (k + 1))) != 0) return false;
      }
      return true;
    };
    while (!ok(d)) ++d;
    CHECK(measures::bucket_block_size(n) == d);
    prev = d;
  }
  CHECK(measures::bucket_block_size(1) == 2);
  CHECK(measures::bucket_block_size(2) == 48);
  CHECK(measures::bucket_block_size(3) == 6300);
  CHECK(measures::bucket_block_start(2) == 2);
  CHECK(measures::bucket_block_start(3) == 50);
  CHECK(measures::bucket_interval(2, 1).length() == 12);
  CHECK(measures::bucket_interval(2, 2).length() == 4);
  CHECK(measures::bucket_interval(2, 3).length() == 2);

  auto seq = measures::bucketed();
  auto b = bucket_union();
  auto mu2 = seq.by_label(2).value();
  CHECK(mu2.mass(b) == Rational(13, 24));
  for (std::size_t n = 1; n <= 6; ++n) {
    Rational expect = 0;
    for (std::size_t k = 1; k <= measures::bucket_depth(n); ++k) expect += Rational(1, static_cast<unsigned long>(k + 1));
    expect /= static_cast<unsigned long>(n);
    auto mu = seq.by_label(n).value();
    CHECK(mu.mass(b) == expect);
    CHECK(mu.mass(b) >= Rational(1, 2));
    CHECK(mu.total_mass() == 1);
  }
}

TEST_CASE("sigma profiles") {
  auto heavy = measures::heavy_last_half();
  auto full = all_supports(heavy, 12);
  auto s = sigma_profile(heavy, full, 3);
  REQUIRE(s.buckets.size() == 1);
  CHECK(s.buckets[0].k == 2);
  CHECK(s.buckets[0].count == 8);
  CHECK(s.buckets[0].sigma == 3);
  for (std::uint64_t n = 2; n <= 10; ++n) CHECK(sigma_profile(heavy, full, n).max_sigma() == 3);
  CHECK(sigma_profile(heavy, OmegaSubset::empty(), 3).buckets.empty());

  auto bucketed = measures::bucketed();
  auto s2 = sigma_profile(bucketed, bucket_union(), 2);
  REQUIRE(s2.buckets.size() == 3);
  for (const auto& e : s2.buckets) CHECK(e.sigma == Rational(1, 2));
  CHECK(s2.buckets[0].count == 12);
  CHECK(s2.buckets[1].count == 4);
  CHECK(s2.buckets[2].count == 2);
  CHECK(s2.light_count == 0);
  CHECK_THROWS_AS(sigma_profile(bucketed, bucket_union(), 0), validation_error);
}

TEST_CASE("condition star") {
  auto heavy = measures::heavy_last_half();
  auto full = all_supports(heavy, 12);
  auto r = star_condition_check(heavy, full, {1, 2, 8});
  CHECK_FALSE(r.holds);
  REQUIRE(r.first_violation);
  CHECK(r.first_violation->first == 3);
  CHECK(r.first_violation->second == 2);
  CHECK(r.blocks_checked == 6);
  CHECK(star_condition_check(heavy, OmegaSubset::empty(), {5, 2, 8}).holds);

  auto bucketed = measures::bucketed();
  auto b = bucket_union();
  CHECK(star_condition_check(bucketed, b, {2, 4, 8}).holds);
  for (long m : {1L, 2L, 4L}) CHECK(star_condition_check(bucketed, b, {m, static_cast<std::uint64_t>(m - 1), 8}).holds);
  auto fail = star_condition_check(bucketed, b, {4, 1, 8});
  CHECK_FALSE(fail.holds);
  CHECK(fail.first_violation->first == 2);

  // a light point of B inside the support trips the emptiness clause
  MeasureBlock mu{1, {0, 4}, {{0, 3, Rational(1, 3)}, {3, 4, Rational(1, 100)}}};
  auto seq = MeasureSequence::from_blocks({mu}, {}, json{});
  auto light = star_condition_check(seq, OmegaSubset::finite({Integer(3)}), {1, 0, 1});
  CHECK_FALSE(light.holds);
  CHECK(light.first_violation->second == 0);

  CHECK_THROWS_AS(star_condition_check(heavy, full, {0, 2, 8}), validation_error);
  CHECK_THROWS_AS(star_condition_check(heavy, full, {1, 8, 8}), validation_error);
}

TEST_CASE("json shapes") {
  auto b = measures::eu_blocks().block(1);
  auto j = to_json(b);
  CHECK(j["label"] == 2);
  CHECK(j["pieces"][0]["lo"] == "5");
  CHECK(j["pieces"][0]["weight_den"] == "2");
  auto f = to_json(farah_check(measures::eu_blocks(), 4));
  CHECK(f["D1"] == "1/1");
  CHECK(f["D2_trend"].is_string());
}

TEST_CASE("property: sigma matches the pointwise reading") {
  std::mt19937 rng(101);
  testing::SetSampler sampler(7, 400);
  for (int trial = 0; trial < 40; ++trial) {
    auto seq = random_sequence(rng, 6);
    auto b = sampler.draw().set;
    for (const auto& mu : seq.first_blocks(6)) {
      auto s = sigma_profile(mu, b);
      auto oracle = sigma_oracle(mu, b);
      REQUIRE(s.buckets.size() == oracle.size());
      for (const auto& e : s.buckets) CHECK(oracle.at(e.k.get_si()) == e.sigma);
    }
  }
}

TEST_CASE("property: the two readings of star agree and bound the mass") {
  std::mt19937 rng(2024);
  testing::SetSampler sampler(99, 400);
  int passed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto seq = random_sequence(rng, 5);
    auto b = sampler.draw().set;
    Integer m = std::uniform_int_distribution<long>(1, 4)(rng);
    StarResult r;
    REQUIRE_NOTHROW(r = star_condition_check(seq, b, {m, 0, 4}));
    if (!r.holds) continue;
    ++passed;
    Rational ratio = bounded_ratio_stat(seq, 4);
    Integer ceiling = ceil_of(ratio);
    Rational bound = 0;
    for (Integer k = 1; k <= ceiling; ++k) bound += make_rational(1, m * k);
    for (const auto& mu : seq.blocks_in(0, 4)) CHECK(mu.mass(b) <= bound);
  }
  CHECK(passed > 0);
}

TEST_CASE("property: block mass is additive") {
  std::mt19937 rng(5);
  testing::SetSampler sampler(55, 400);
  for (int trial = 0; trial < 60; ++trial) {
    auto seq = random_sequence(rng, 4);
    auto a = sampler.draw().set;
    auto b = sampler.draw().set;
    for (const auto& mu : seq.first_blocks(4)) {
      CHECK(mu.mass(set_union(a, b)) + mu.mass(set_intersection(a, b)) == mu.mass(a) + mu.mass(b));
    }
  }
}

TEST_CASE("property: probability sequences report D1 = 1") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    auto seq = random_sequence(rng, 6);
    std::vector<MeasureBlock> blocks;
    for (auto mu : seq.first_blocks(6)) {
      Rational total = mu.total_mass();
      for (auto& p : mu.pieces) p.weight /= total;
      blocks.push_back(mu);
    }
    auto prob = MeasureSequence::from_blocks(blocks, MeasureFlags{false, true}, json{});
    CHECK_FALSE(check_flags(prob, 6));
    CHECK(farah_check(prob, 5).d1 == 1);
  }
}
