#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "densideal/errors.hpp"
#include "densideal/gallery.hpp"
#include "densideal/probes.hpp"

using namespace densideal;

namespace {

// n in ⋃_k (a k!, b k!]
bool in_band(long n, long a, long b) {
  long f = 1;
  for (long k = 1; a * f < n; ++k) {
    f *= k == 1 ? 1 : k;
    if (a * f < n && n <= b * f) return true;
  }
  return false;
}

// k-th binary digit of s = p/q, k >= 1
int digit(long p, long q, int k) {
  long r = p;
  int d = 0;
  for (int i = 0; i < k; ++i) {
    r *= 2;
    d = r >= q;
    if (d) r -= q;
  }
  return d;
}

int common_prefix(long p1, long q1, long p2, long q2) {
  int k = 0;
  while (digit(p1, q1, k + 1) == digit(p2, q2, k + 1)) ++k;
  return k;
}

void check_probability_blocks(const MeasureSequence& m, std::uint64_t upto) {
  auto r = farah_check(m, upto);
  CHECK(r.d1 == 1);
  CHECK(r.d3 == 1);
}

void check_pure(const MeasureSequence& m, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) CHECK(m.block(i) == m.block(i));
}

}  // namespace

TEST_CASE("eu_not_ii blocks and witnesses") {
  auto ex = gallery::eu_not_ii();
  auto d3 = ex.measures.block(2);
  CHECK(d3.label == 3);
  CHECK(d3.span == Interval{13, 19});
  CHECK(d3.max_atom() == Rational(1, 6));
  CHECK(d3.total_mass() == 1);

  for (long n = 0; n <= 10000; ++n) {
    CHECK(ex.witnesses.b.contains(n) == in_band(n, 1, 2));
    CHECK(ex.witnesses.c.contains(n) == in_band(n, 2, 3));
  }
  for (std::size_t k = 1; k <= 10; ++k) {
    auto blk = ex.measures.block(k - 1);
    CHECK(blk.mass(ex.witnesses.c) == 1);
    // (1!, 2!] = {2} misses D_1 = {3}, but (2!, 4] contains it
    if (k >= 2) CHECK(blk.mass(ex.witnesses.b) == 0);
  }
  CHECK(ex.measures.block(0).mass(ex.witnesses.b) == 1);
  CHECK(dominates_prefixwise(ex.witnesses.c, ex.witnesses.b, 100000).holds);

  auto far = farah_check(ex.measures, 12);
  for (std::size_t k = 1; k <= 12; ++k) CHECK(far.d2.values[k - 1] == Rational(1) / Rational(factorial(k)));
  check_probability_blocks(ex.measures, 12);
  check_pure(ex.measures, 8);
}

TEST_CASE("branch codes and the almost disjoint family") {
  auto fam = gallery::almost_disjoint_family(2);
  auto common = set_intersection(fam[0], fam[1]).elements_below(pow2(20));
  CHECK(common == std::vector<Integer>{1, 4});
  CHECK(fam[0].elements_below(40) == std::vector<Integer>{1, 4, 9, 20});
  CHECK(fam[1].elements_below(40) == std::vector<Integer>{1, 4, 10, 21});
  // codes of length k lie in [2^k - 1, 2^{k+1} - 1)
  CHECK(fam[0].prefix_count(pow2(20)) == 19);
  CHECK(fam[0].nth(30, pow2(40)) >= pow2(31) - 1);

  CHECK_THROWS_AS(gallery::almost_disjoint_family(1), validation_error);
  CHECK_THROWS_AS(gallery::branch(Rational(1)), validation_error);

  auto sixteen = gallery::almost_disjoint_family(16);
  auto certs = gallery::certify_almost_disjoint(sixteen, pow2(20));
  REQUIRE(certs.size() == 120);
  for (const auto& c : certs) {
    long p1 = c.left + 1, q1 = 2 * c.left + 3, p2 = c.right + 1, q2 = 2 * c.right + 3;
    int p = common_prefix(p1, q1, p2, q2);
    CAPTURE(c.left);
    CAPTURE(c.right);
    CHECK(c.common == p);
    CHECK(c.last < pow2(p + 1) - 1);
  }

  // a set meeting another in the upper half of the horizon is refused
  std::vector<OmegaSubset> bad{fam[0], OmegaSubset::finite({9, 681})};
  CHECK_THROWS_AS(gallery::certify_almost_disjoint(bad, 1024), validation_error);
}

TEST_CASE("antichain_eu_not_simple blocks and witnesses") {
  // n_5 = 44 + 4! + 5! = 188
  std::vector<long> expect{1, 3, 6, 14, 44, 188};
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(measures::antichain_start(i) == expect[i]);

  auto fam = gallery::almost_disjoint_family(4);
  auto members = gallery::antichain_eu_not_simple(fam, 4);
  REQUIRE(members.size() == 4);
  CHECK_THROWS_AS(gallery::antichain_eu_not_simple(fam, 5), validation_error);

  // the first member {1, 4, 9, 20, ...} has D_4 = [44, 68) with atom 1/24
  auto d4 = members[0].measures.block(1);
  CHECK(d4.label == 4);
  CHECK(d4.span == Interval{44, 68});
  CHECK(d4.max_atom() == Rational(1, 24));

  Integer horizon = measures::antichain_start(8);
  for (const auto& am : members) {
    // oracle: C = D_m, B = the m! points before n_m, for m in the member below 9
    std::vector<char> b(horizon.get_ui(), 0), c(horizon.get_ui(), 0);
    for (long m = 1; m <= 8; ++m) {
      if (!am.member.contains(m)) continue;
      long n = measures::antichain_start(m).get_si(), f = factorial(m).get_si();
      for (long p = n - f; p < n; ++p) b[p] = 1;
      for (long p = n; p < n + f && p < horizon; ++p) c[p] = 1;
    }
    for (long p = 0; p < horizon; ++p) {
      CHECK(am.witnesses.b.contains(p) == bool(b[p]));
      CHECK(am.witnesses.c.contains(p) == bool(c[p]));
    }
    CHECK(dominates_prefixwise(am.witnesses.c, am.witnesses.b, horizon).holds);
    auto r = increasing_invariance_probe(am.measures, am.witnesses.b, am.witnesses.c, horizon, Rational(1, 2));
    CHECK(r.classification == Evidence::Counterexample);
    check_probability_blocks(am.measures, 8);
    check_pure(am.measures, 2);
  }

  // with 0 in M the block D_0 = {1} stays out of C
  auto with_zero = gallery::antichain_eu_not_simple({OmegaSubset::finite({0, 2, 3})}, 1);
  CHECK_FALSE(with_zero[0].witnesses.c.contains(1));
  CHECK(with_zero[0].witnesses.c.elements_below(100) ==
        std::vector<Integer>{6, 7, 14, 15, 16, 17, 18, 19});
  CHECK(with_zero[0].witnesses.b.elements_below(100) ==
        std::vector<Integer>{4, 5, 8, 9, 10, 11, 12, 13});
}

TEST_CASE("antichain_eu_simple plateau weights") {
  weights::PlateauBase base;  // n_i = (i+1)!
  auto fam = gallery::almost_disjoint_family(3);
  auto gs = gallery::antichain_eu_simple({OmegaSubset::finite({3})}, base);
  CHECK(gs[0](25) == 72);
  CHECK(gs[0](24) == 24);
  CHECK(gs[0](72) == 72);
  CHECK(gs[0](73) == 73);

  auto family_weights = gallery::antichain_eu_simple(fam, base);
  REQUIRE(family_weights.size() == 3);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto& g = family_weights[i];
    // oracle: f_L(n) = l (l+1)! on ((l+1)!, l (l+1)!] for l in L, else n
    for (long n = 1; n <= 6000; ++n) {
      long want = n;
      for (long l = 1; l <= 6; ++l) {
        long nl = factorial(l + 1).get_si();
        if (fam[i].contains(l) && nl < n && n <= l * nl) want = l * nl;
      }
      CHECK(g(n) == want);
      CHECK(make_rational(n, g(n)) <= 1);
    }
    auto ends = gallery::plateau_ends(base, fam[i], 3);
    REQUIRE(ends.size() == 3);
    auto prof = ratio_profile(g, ends);
    for (const auto& v : prof.values) CHECK(v == 1);
  }
  CHECK(gallery::plateau_ends(base, fam[0], 2) == std::vector<Integer>{2, 4 * 120});

  weights::PlateauBase bad;
  bad.explicit_values = std::vector<Integer>{1, 2, 2};
  CHECK_THROWS_AS(gallery::antichain_eu_simple(fam, bad), validation_error);
}

TEST_CASE("ii_not_aud sizes, masses and the star condition") {
  auto ex = gallery::ii_not_aud();
  CHECK(measures::bucket_depth(1) == 1);
  CHECK(measures::bucket_depth(2) == 3);
  CHECK(measures::bucket_depth(3) == 6);
  CHECK(ex.measures.block(0).d() == 2);
  CHECK(ex.measures.block(1).d() == 48);
  CHECK(measures::bucket_interval(2, 1).length() == 12);
  CHECK(measures::bucket_interval(2, 2).length() == 4);
  CHECK(measures::bucket_interval(2, 3).length() == 2);

  for (std::size_t n = 1; n <= 6; ++n) {
    Rational want = 0;
    for (std::size_t k = 1; k <= measures::bucket_depth(n); ++k) want += Rational(1, k + 1);
    want /= Rational(static_cast<unsigned long>(n));
    auto blk = ex.measures.block(n - 1);
    CHECK(blk.mass(ex.b) == want);
    CHECK(want >= Rational(1, 2));
  }
  CHECK(ex.measures.block(1).mass(ex.b) == Rational(13, 24));

  for (long level : {1, 2, 4}) {
    auto s = star_condition_check(ex.measures, ex.b, {Integer(level), static_cast<std::uint64_t>(level - 1), 6});
    CHECK(s.holds);
  }
  check_probability_blocks(ex.measures, 5);
  check_pure(ex.measures, 4);
}

TEST_CASE("aud_not_ii heavy halves") {
  auto ex = gallery::aud_not_ii();
  CHECK(bounded_ratio_stat(ex.measures, 12) == 2);
  for (std::size_t n = 0; n <= 10; ++n) {
    auto blk = ex.measures.block(n);
    CHECK(blk.mass(ex.witnesses.c) == 1);
    CHECK(blk.mass(ex.witnesses.b) == 0);
    CHECK(ex.witnesses.b.count_in(blk.span.lo, blk.span.hi) == pow2(n));
    CHECK(ex.witnesses.c.count_in(blk.span.lo, blk.span.hi) == pow2(n));
  }
  for (std::size_t n = 2; n <= 10; ++n) {
    auto s = sigma_profile(ex.measures, OmegaSubset::omega(), n);
    REQUIRE(s.buckets.size() == 1);
    CHECK(s.buckets[0].k == 2);
    CHECK(s.buckets[0].sigma == 3);
  }
  CHECK(dominates_prefixwise(ex.witnesses.c, ex.witnesses.b, pow2(12)).holds);
  auto r = increasing_invariance_probe(ex.measures, ex.witnesses.b, ex.witnesses.c, pow2(12), Rational(1, 2));
  CHECK(r.classification == Evidence::Counterexample);
  check_probability_blocks(ex.measures, 10);
}

TEST_CASE("iso_pair blocks, swap map and probes") {
  auto iso = gallery::iso_pair();
  auto mu3 = iso.first.block(3), nu3 = iso.second.block(3);
  CHECK(mu3.span == Interval{8, 20});
  CHECK(mu3.pieces.front().lo == 8);
  CHECK(mu3.pieces.front().hi == 14);
  CHECK(nu3.pieces.front().lo == 14);
  CHECK(nu3.pieces.front().hi == 20);
  check_probability_blocks(iso.first, 7);
  check_probability_blocks(iso.second, 7);

  // pushing mu_n forward along the swap gives nu_n
  for (std::size_t n = 0; n <= 5; ++n) {
    auto mu = iso.first.block(n), nu = iso.second.block(n);
    for (Integer p = mu.span.lo; p < mu.span.hi; ++p) CHECK(nu.atom(iso.swap(p)) == mu.atom(p));
  }

  Integer horizon = gallery::factorial_block(8).hi;
  auto on_nu = increasing_invariance_probe(iso.second, iso.witnesses.b, iso.witnesses.c, horizon, Rational(1, 2));
  auto on_mu = increasing_invariance_probe(iso.first, iso.witnesses.b, iso.witnesses.c, horizon, Rational(1, 2));
  CHECK(on_nu.classification == Evidence::Counterexample);
  CHECK(on_mu.classification == Evidence::None);
  CHECK(on_mu.domination.holds);
  check_pure(iso.second, 6);
}

TEST_CASE("perm_breaks_ii with the identity") {
  auto ex = gallery::perm_breaks_ii(IndexMap::identity(), 42);
  CHECK(ex.horizon == 25585);
  CHECK(dominates_prefixwise(ex.witnesses.c, ex.witnesses.b, 25000).holds);
  CHECK(bounded_ratio_stat(ex.measures, 903) == 1);
  for (std::size_t j = 0; j < 40; ++j) CHECK(ex.measures.block(j).total_mass() == 1);

  // B = block minima, C = the last block of each group
  std::vector<Integer> minima, last;
  Integer pos = 0;
  for (long k = 1; k <= 42; ++k) {
    for (long i = 0; i < k; ++i) {
      minima.push_back(pos);
      if (i == k - 1) {
        for (long p = 0; p < k; ++p) last.push_back(pos + p);
      }
      pos += k;
    }
  }
  CHECK(ex.witnesses.b.elements_below(pos) == minima);
  CHECK(ex.witnesses.c.elements_below(pos) == last);

  // a map moving points out of [0, end) is refused
  auto shift = IndexMap::from_pieces({MapPiece::translate(0, 5, 100)});
  CHECK_THROWS_AS(gallery::perm_breaks_ii(shift, 3), validation_error);
  // reversing every block keeps the minima
  auto rev = gallery::perm_breaks_ii(gallery::reverse_triangular_blocks(), 10);
  auto id10 = gallery::perm_breaks_ii(IndexMap::identity(), 10);
  CHECK(rev.witnesses.b.elements_below(rev.horizon) == id10.witnesses.b.elements_below(id10.horizon));
}

TEST_CASE("perm_breaks_ii witnesses are dominated for random permutations") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t groups = 2 + trial % 6;
    long end = long(groups * (groups + 1) * (2 * groups + 1) / 6);
    std::vector<Integer> perm(end);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto phi = IndexMap::from_pieces({MapPiece::permutation(0, perm)});
    auto ex = gallery::perm_breaks_ii(phi, groups);

    // oracle from the definitions
    std::vector<Integer> b, c;
    long pos = 0;
    for (std::size_t k = 1; k <= groups; ++k) {
      long best_b = -1, best_lo = 0;
      for (std::size_t i = 0; i < k; ++i, pos += long(k)) {
        long mn = end;
        for (long p = pos; p < pos + long(k); ++p) mn = std::min(mn, perm[p].get_si());
        b.push_back(mn);
        if (mn > best_b) best_b = mn, best_lo = pos;
      }
      for (long p = best_lo; p < best_lo + long(k); ++p) c.push_back(perm[p]);
    }
    std::sort(b.begin(), b.end());
    std::sort(c.begin(), c.end());
    CAPTURE(trial);
    CHECK(ex.witnesses.b.elements_below(end) == b);
    CHECK(ex.witnesses.c.elements_below(end) == c);
    // brute-force domination at every n <= end
    long cb = 0, cc = 0;
    bool ok = true;
    for (long n = 0; n < end; ++n) {
      cb += std::binary_search(b.begin(), b.end(), Integer(n));
      cc += std::binary_search(c.begin(), c.end(), Integer(n));
      ok = ok && cc <= cb;
    }
    CHECK(ok);
    CHECK(dominates_prefixwise(ex.witnesses.c, ex.witnesses.b, end).holds);
  }
}
