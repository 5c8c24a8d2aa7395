#include "densideal/gallery.hpp"

#include <algorithm>
#include <map>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal::gallery {

namespace {

const Integer kMemberCap = pow2(20);

Integer ul(std::size_t n) { return Integer(static_cast<unsigned long>(n)); }

// j-th element of the member that is >= 1, or nullopt past its end below the cap.
std::optional<std::size_t> positive_member(const OmegaSubset& member, std::size_t j) {
  Integer skip = member.contains(0) ? 1 : 0;
  Integer want = ul(j) + skip;
  if (member.prefix_count(kMemberCap) <= want) return std::nullopt;
  return member.nth(want, kMemberCap).get_ui();
}

}  // namespace

OmegaSubset factorial_band(unsigned long from, unsigned long to) {
  if (from < 1 || to <= from) throw validation_error("factorial band needs 1 <= from < to");
  return OmegaSubset::blocks(
      [from, to](std::size_t j) -> std::optional<Interval> {
        Integer k = factorial(j + 1);
        return Interval{from * k + 1, to * k + 1};
      },
      json{{"kind", "factorial_band"}, {"from", std::to_string(from)}, {"to", std::to_string(to)}});
}

Example eu_not_ii() { return Example{measures::eu_blocks(), {factorial_band(1, 2), factorial_band(2, 3)}}; }

OmegaSubset branch(const Rational& s) {
  if (s <= 0 || s >= 1) throw validation_error("branch parameter must lie in (0, 1)");
  return OmegaSubset::blocks(
      [s](std::size_t j) -> std::optional<Interval> {
        unsigned long k = j + 1;
        Integer code = pow2(k) - 1 + floor_of(s * Rational(pow2(k)));
        return Interval{code, code + 1};
      },
      json{{"kind", "branch"}, {"parameter", rational_json(s)}});
}

std::vector<OmegaSubset> almost_disjoint_family(std::size_t count) {
  if (count < 2) throw validation_error("almost disjoint family needs count >= 2");
  std::vector<OmegaSubset> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(branch(make_rational(ul(i + 1), ul(2 * i + 3))));
  return out;
}

std::vector<DisjointnessCertificate> certify_almost_disjoint(const std::vector<OmegaSubset>& family,
                                                             const Integer& horizon) {
  if (horizon < 2) throw validation_error("disjointness horizon must be >= 2");
  Integer half = floor_div(horizon, 2);
  std::vector<DisjointnessCertificate> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      auto common = set_intersection(family[i], family[j]).elements_below(horizon);
      DisjointnessCertificate c{i, j, ul(common.size()), common.empty() ? Integer(-1) : common.back()};
      if (c.last >= half) {
        throw validation_error("members " + std::to_string(i) + " and " + std::to_string(j) + " share " +
                               to_string(c.last) + ", in the upper half of the horizon " + to_string(horizon));
      }
      out.push_back(c);
    }
  }
  return out;
}

OmegaSubset antichain_support(const OmegaSubset& member) {
  return OmegaSubset::blocks(
      [member](std::size_t j) -> std::optional<Interval> {
        auto m = positive_member(member, j);
        if (!m) return std::nullopt;
        Integer lo = measures::antichain_start(*m);
        return Interval{lo, lo + factorial(*m)};
      },
      json{{"kind", "antichain_support"}, {"member", member.descriptor()}});
}

OmegaSubset antichain_gap(const OmegaSubset& member) {
  return OmegaSubset::blocks(
      [member](std::size_t j) -> std::optional<Interval> {
        auto m = positive_member(member, j);
        if (!m) return std::nullopt;
        Integer hi = measures::antichain_start(*m);
        return Interval{hi - factorial(*m), hi};
      },
      json{{"kind", "antichain_gap"}, {"member", member.descriptor()}});
}

std::vector<AntichainMember> antichain_eu_not_simple(const std::vector<OmegaSubset>& family, std::size_t count) {
  if (count < 1 || count > family.size()) throw validation_error("member count must lie in [1, family size]");
  std::vector<OmegaSubset> used(family.begin(), family.begin() + static_cast<std::ptrdiff_t>(count));
  if (used.size() >= 2) certify_almost_disjoint(used, pow2(12));
  std::vector<AntichainMember> out;
  for (const auto& m : used) {
    out.push_back({m, measures::antichain_blocks(m), {antichain_gap(m), antichain_support(m)}});
  }
  return out;
}

std::vector<WeightFunction> antichain_eu_simple(const std::vector<OmegaSubset>& family,
                                                const weights::PlateauBase& base) {
  std::vector<WeightFunction> out;
  for (const auto& l : family) out.push_back(weights::plateau(base, l));
  return out;
}

std::vector<Integer> plateau_ends(const weights::PlateauBase& base, const OmegaSubset& indices, std::size_t count) {
  std::vector<Integer> ends;
  for (std::size_t j = 0; ends.size() < count; ++j) {
    if (indices.prefix_count(kMemberCap) <= ul(j)) break;
    std::size_t l = indices.nth(ul(j), kMemberCap).get_ui();
    if (l == 0) continue;  // (n_0, 0] is empty
    auto v = base.at(l);
    if (!v) break;
    ends.push_back(ul(l) * *v);
  }
  return ends;
}

OmegaSubset bucket_union() {
  return OmegaSubset::blocks(
      [](std::size_t j) -> std::optional<Interval> {
        std::size_t n = j + 1, depth = measures::bucket_depth(n);
        Interval all{measures::bucket_interval(n, depth).lo, measures::bucket_interval(n, 1).hi};
        Integer total = 0;
        for (std::size_t k = 1; k <= depth; ++k) total += measures::bucket_interval(n, k).length();
        if (total != all.length()) {
          throw certification_error("buckets L^n_k are not contiguous in block " + std::to_string(n));
        }
        return all;
      },
      json{{"kind", "bucket_union"}});
}

SingleWitness ii_not_aud() { return SingleWitness{measures::bucketed(), bucket_union()}; }

OmegaSubset doubling_half(bool last) {
  return OmegaSubset::blocks(
      [last](std::size_t n) -> std::optional<Interval> {
        Integer lo = pow2(n + 1) - 2, half = pow2(n);
        if (last) lo += half;
        return Interval{lo, lo + half};
      },
      json{{"kind", "doubling_half"}, {"half", last ? "last" : "first"}});
}

Example aud_not_ii() { return Example{measures::heavy_last_half(), {doubling_half(false), doubling_half(true)}}; }

Interval factorial_block(std::size_t n) {
  Integer lo = 0;
  for (std::size_t i = 0; i < n; ++i) lo += 2 * factorial(i);
  return {lo, lo + 2 * factorial(n)};
}

OmegaSubset factorial_half(bool last) {
  return OmegaSubset::blocks(
      [last](std::size_t n) -> std::optional<Interval> {
        Interval d = factorial_block(n);
        Integer half = factorial(n);
        Integer lo = last ? Integer(d.lo + half) : d.lo;
        return Interval{lo, lo + half};
      },
      json{{"kind", "factorial_half"}, {"half", last ? "last" : "first"}});
}

IndexMap reverse_factorial_blocks() {
  return index_maps::reverse_blocks([](std::size_t n) -> std::optional<Interval> { return factorial_block(n); },
                                    json{{"kind", "catalog"}, {"name", "reverse_factorial_blocks"}});
}

IsoPair iso_pair() {
  return IsoPair{measures::factorial_halves(true), measures::factorial_halves(false), reverse_factorial_blocks(),
                 {factorial_half(false), factorial_half(true)}};
}

Interval triangular_block(std::size_t label) {
  if (label < 1) throw validation_error("triangular blocks are labelled from 1");
  Integer n = ul(label), k;
  mpz_sqrt(k.get_mpz_t(), Integer(2 * n).get_mpz_t());
  while (k * (k + 1) / 2 < n) ++k;
  while (k > 1 && (k - 1) * k / 2 >= n) --k;
  Integer lo = (k - 1) * k * (2 * k - 1) / 6 + (n - (k - 1) * k / 2 - 1) * k;
  return {lo, lo + k};
}

IndexMap reverse_triangular_blocks() {
  return index_maps::reverse_blocks(
      [](std::size_t j) -> std::optional<Interval> { return triangular_block(j + 1); },
      json{{"kind", "catalog"}, {"name", "reverse_triangular_blocks"}});
}

PermExample perm_breaks_ii(const IndexMap& phi, std::size_t groups) {
  if (groups < 1) throw validation_error("perm_breaks_ii needs at least one group");
  Integer kk = ul(groups);
  Integer end = kk * (kk + 1) * (2 * kk + 1) / 6;
  if (!phi.permutes(0, end)) throw validation_error("map does not permute [0, " + to_string(end) + ")");

  PermExample ex{measures::triangular_uniform(), {}, groups, end};
  std::vector<Integer> minima, heavy;
  std::size_t label = 1;
  for (std::size_t k = 1; k <= groups; ++k) {
    std::optional<std::pair<Integer, std::vector<Integer>>> best;  // (b_n, phi[D_n]) with b_n largest
    for (std::size_t i = 0; i < k; ++i, ++label) {
      Interval d = triangular_block(label);
      std::vector<Integer> img;
      for (Integer p = d.lo; p < d.hi; ++p) img.push_back(phi(p));
      Integer b = *std::min_element(img.begin(), img.end());
      minima.push_back(b);
      if (!best || b > best->first) best = std::make_pair(b, std::move(img));
    }
    heavy.insert(heavy.end(), best->second.begin(), best->second.end());
  }
  ex.witnesses = {OmegaSubset::from_points(std::move(minima)), OmegaSubset::from_points(std::move(heavy))};
  return ex;
}

}  // namespace densideal::gallery
