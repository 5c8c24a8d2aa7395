#include "densideal/measures.hpp"

#include <algorithm>
#include <map>

#include "densideal/errors.hpp"
#include "densideal/memo.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

Integer MeasureBlock::support_size() const {
  Integer s = 0;
  for (const auto& p : pieces) s += p.length();
  return s;
}

Rational MeasureBlock::total_mass() const {
  Rational m = 0;
  for (const auto& p : pieces) m += Rational(p.length()) * p.weight;
  return m;
}

Rational MeasureBlock::max_atom() const {
  Rational m = 0;
  for (const auto& p : pieces) m = std::max(m, p.weight);
  return m;
}

Rational MeasureBlock::atom(const Integer& pos) const {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), pos,
                             [](const Integer& x, const WeightPiece& p) { return x < p.lo; });
  if (it == pieces.begin()) return 0;
  --it;
  return pos < it->hi ? it->weight : Rational(0);
}

Rational MeasureBlock::mass(const OmegaSubset& a) const {
  Rational m = 0;
  for (const auto& p : pieces) {
    Integer c = a.count_in(p.lo, p.hi);
    if (c != 0) m += Rational(c) * p.weight;
  }
  return m;
}

OmegaSubset MeasureBlock::support() const {
  std::vector<Interval> iv;
  for (const auto& p : pieces) iv.push_back({p.lo, p.hi});
  return OmegaSubset::intervals(std::move(iv));
}

void validate_block(const MeasureBlock& b) {
  std::string where = "block " + std::to_string(b.label);
  if (b.span.lo < 0 || b.span.hi <= b.span.lo) throw validation_error(where + " has an empty span");
  if (b.pieces.empty()) throw validation_error(where + " has no support");
  Integer prev = b.span.lo;
  for (const auto& p : b.pieces) {
    if (p.lo < prev || p.hi <= p.lo) throw validation_error(where + " has unordered, overlapping or empty pieces");
    if (p.hi > b.span.hi) throw validation_error(where + " has a piece outside its span");
    if (p.weight <= 0) throw validation_error(where + " has a nonpositive weight");
    prev = p.hi;
  }
}

Integer heavy_bucket(const Rational& w, const Integer& d) { return floor_of(w * Rational(d)); }

Integer light_bucket(const Rational& w, const Integer& d) {
  Rational x = w * Rational(d);
  if (x >= 1) return 0;
  // k < 1/(w d) <= k + 1
  return ceil_of(1 / x) - 1;
}

json MeasureFlags::to_json() const {
  return json{{"consecutive", consecutive},     {"probability", probability},
              {"covers_omega", covers_omega},   {"support_is_span", support_is_span},
              {"nonincreasing", nonincreasing}, {"doubling", doubling}};
}

MeasureSequence::MeasureSequence(Generator gen, MeasureFlags flags, json descriptor)
    : gen_(std::make_shared<const Generator>(std::move(gen))), flags_(flags), descriptor_(std::move(descriptor)) {}

MeasureSequence MeasureSequence::from_blocks(std::vector<MeasureBlock> blocks, MeasureFlags flags, json descriptor) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    validate_block(blocks[i]);
    if (i > 0) {
      if (blocks[i].label <= blocks[i - 1].label) throw validation_error("block labels must increase");
      if (blocks[i].span.lo < blocks[i - 1].span.hi) throw validation_error("block spans must be ordered and disjoint");
    }
  }
  auto shared = std::make_shared<const std::vector<MeasureBlock>>(std::move(blocks));
  return MeasureSequence(
      [shared](std::size_t i) -> std::optional<MeasureBlock> {
        if (i >= shared->size()) return std::nullopt;
        return (*shared)[i];
      },
      flags, std::move(descriptor));
}

std::optional<MeasureBlock> MeasureSequence::try_block(std::size_t index) const {
  auto b = (*gen_)(index);
  if (b) validate_block(*b);
  return b;
}

MeasureBlock MeasureSequence::block(std::size_t index) const {
  auto b = try_block(index);
  if (!b) throw validation_error("measure sequence has no block at index " + std::to_string(index));
  return *b;
}

std::vector<MeasureBlock> MeasureSequence::blocks_in(std::optional<std::uint64_t> lo, std::uint64_t hi) const {
  std::vector<MeasureBlock> out;
  std::optional<MeasureBlock> prev;
  for (std::size_t i = 0;; ++i) {
    auto b = try_block(i);
    if (!b || b->label > hi) break;
    if (prev) {
      if (b->label <= prev->label) throw validation_error("block labels must increase");
      if (b->span.lo < prev->span.hi) throw validation_error("block spans must be ordered and disjoint");
    }
    if (!lo || b->label > *lo) out.push_back(*b);
    prev = std::move(b);
  }
  return out;
}

std::vector<MeasureBlock> MeasureSequence::first_blocks(std::size_t count) const {
  std::vector<MeasureBlock> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto b = try_block(i);
    if (!b) break;
    if (!out.empty() && (b->label <= out.back().label || b->span.lo < out.back().span.hi)) {
      throw validation_error("blocks out of order at index " + std::to_string(i));
    }
    out.push_back(std::move(*b));
  }
  return out;
}

std::optional<MeasureBlock> MeasureSequence::by_label(std::uint64_t label) const {
  for (std::size_t i = 0;; ++i) {
    auto b = try_block(i);
    if (!b || b->label > label) return std::nullopt;
    if (b->label == label) return b;
  }
}

std::optional<std::string> check_flags(const MeasureSequence& m, std::size_t count) {
  const auto& f = m.flags();
  auto blocks = m.first_blocks(count);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    std::string at = " at block " + std::to_string(b.label);
    if (f.probability && b.total_mass() != 1) return "total mass is " + to_string(b.total_mass()) + at;
    if (f.support_is_span && (b.pieces.front().lo != b.span.lo || b.pieces.back().hi != b.span.hi ||
                              b.support_size() != b.d())) {
      return "support differs from the span" + at;
    }
    if (f.nonincreasing) {
      // zero atoms may only trail
      if (b.pieces.front().lo != b.span.lo) return "atoms increase" + at;
      for (std::size_t p = 1; p < b.pieces.size(); ++p) {
        if (b.pieces[p].weight > b.pieces[p - 1].weight || b.pieces[p].lo != b.pieces[p - 1].hi) {
          return "atoms increase" + at;
        }
      }
    }
    if (i == 0 && f.covers_omega && b.span.lo != 0) return "first span does not start at 0";
    if (i > 0) {
      const auto& p = blocks[i - 1];
      if ((f.consecutive || f.covers_omega) && p.span.hi != b.span.lo) return "spans do not abut" + at;
      if (f.doubling && b.d() < 2 * p.d()) return "block size does not double" + at;
    }
  }
  return std::nullopt;
}

Rational block_mass(const MeasureBlock& mu, const OmegaSubset& a) { return mu.mass(a); }

ExhProfile exh_profile(const MeasureSequence& m, const OmegaSubset& a, std::uint64_t upto) {
  if (upto < 1) throw validation_error("exh profile needs N >= 1");
  ExhProfile out;
  Rational sup = 0;
  for (const auto& b : m.blocks_upto(upto)) {
    Rational v = b.mass(a);
    out.profile.checkpoints.emplace_back(static_cast<unsigned long>(b.label));
    out.profile.values.push_back(v);
    sup = std::max(sup, v);
    out.running_sup.push_back(sup);
  }
  if (out.profile.values.empty()) throw validation_error("no blocks with label <= N");
  return out;
}

FarahReport farah_check(const MeasureSequence& m, std::uint64_t upto, const Rational& threshold) {
  if (upto < 2) throw validation_error("farah check needs N >= 2");
  auto blocks = m.blocks_upto(upto);
  if (blocks.empty()) throw validation_error("no blocks with label <= N");
  FarahReport r;
  r.threshold = threshold;
  DensityProfile masses;
  for (const auto& b : blocks) {
    Rational mass = b.total_mass();
    r.d1 = std::max(r.d1, mass);
    masses.checkpoints.emplace_back(static_cast<unsigned long>(b.label));
    masses.values.push_back(mass);
    r.d2.checkpoints.emplace_back(static_cast<unsigned long>(b.label));
    r.d2.values.push_back(b.max_atom());
  }
  std::size_t start = masses.final_window_start();
  r.d3 = masses.summary().final_window_max;
  if (start > 0) {
    Rational earlier = *std::max_element(masses.values.begin(), masses.values.begin() + static_cast<long>(start));
    r.d1_growing = r.d3 > earlier;
  }
  r.d2_trend = r.d2.summary().final_window_max <= threshold ? Trend::TrendZero : Trend::Inconclusive;
  r.d3_positive = r.d3 > threshold;
  return r;
}

Rational bounded_ratio_stat(const MeasureSequence& m, std::uint64_t upto) {
  if (upto < 1) throw validation_error("bounded ratio statistic needs N >= 1");
  Rational best = 0;
  for (const auto& b : m.blocks_upto(upto)) {
    Rational d(b.d());
    for (const auto& p : b.pieces) best = std::max(best, Rational(d * p.weight));
  }
  return best;
}

Rational SigmaProfile::max_sigma() const {
  Rational m = 0;
  for (const auto& e : buckets) m = std::max(m, e.sigma);
  return m;
}

SigmaProfile sigma_profile(const MeasureBlock& mu, const OmegaSubset& b) {
  SigmaProfile out;
  out.label = mu.label;
  out.d = mu.d();
  out.light_count = 0;
  std::map<Integer, Integer> counts;
  for (const auto& p : mu.pieces) {
    Integer c = b.count_in(p.lo, p.hi);
    if (c == 0) continue;
    Integer k = heavy_bucket(p.weight, out.d);
    if (k == 0) {
      out.light_count += c;
    } else {
      counts[k] += c;
    }
  }
  for (const auto& [k, c] : counts) out.buckets.push_back({k, c, make_rational(k * (k + 1) * c, out.d)});
  return out;
}

SigmaProfile sigma_profile(const MeasureSequence& m, const OmegaSubset& b, std::uint64_t label) {
  auto mu = m.by_label(label);
  if (!mu) throw validation_error("no block with label " + std::to_string(label));
  return sigma_profile(*mu, b);
}

bool star_holds_on_block(const MeasureBlock& mu, const OmegaSubset& b, const Integer& level,
                         std::optional<Integer>* failing_k) {
  // direct reading: per-bucket counts against d / (m k (k+1)), plus no light points of B
  const Integer d = mu.d();
  std::map<Integer, Integer> counts;
  bool light = false;
  for (const auto& p : mu.pieces) {
    Integer c = b.count_in(p.lo, p.hi);
    if (c == 0) continue;
    Integer k = floor_div(p.weight.get_num() * d, p.weight.get_den());
    if (k == 0) {
      light = true;
    } else {
      counts[k] += c;
    }
  }
  std::optional<Integer> bad;
  if (light) bad = Integer(0);
  for (const auto& [k, c] : counts) {
    if (bad) break;
    if (c * level * k * (k + 1) > d) bad = k;
  }
  if (failing_k) *failing_k = bad;
  return !bad;
}

StarResult star_condition_check(const MeasureSequence& m, const OmegaSubset& b, const StarParameters& p) {
  if (p.m < 1) throw validation_error("condition level m must be >= 1");
  if (p.lo >= p.hi) throw validation_error("block range needs lo < hi");
  StarResult r;
  Rational bound = make_rational(1, p.m);
  for (const auto& mu : m.blocks_in(p.lo, p.hi)) {
    ++r.blocks_checked;
    std::optional<Integer> k;
    bool by_counts = star_holds_on_block(mu, b, p.m, &k);
    auto s = sigma_profile(mu, b);
    bool by_sigma = s.light_count == 0 && s.max_sigma() <= bound;
    if (by_counts != by_sigma) {
      throw certification_error("bucket counts and sigma disagree on block " + std::to_string(mu.label));
    }
    if (!by_counts && r.holds) {
      r.holds = false;
      r.first_violation = std::make_pair(mu.label, *k);
    }
  }
  if (r.blocks_checked == 0) throw validation_error("no blocks in the requested range");
  return r;
}

json to_json(const MeasureBlock& b) {
  json pieces = json::array();
  for (const auto& p : b.pieces) {
    pieces.push_back({{"lo", integer_json(p.lo)},
                      {"hi", integer_json(p.hi)},
                      {"weight_num", integer_json(p.weight.get_num())},
                      {"weight_den", integer_json(p.weight.get_den())}});
  }
  return json{{"label", b.label},
              {"span", json::array({integer_json(b.span.lo), integer_json(b.span.hi)})},
              {"d", integer_json(b.d())},
              {"total_mass", rational_json(b.total_mass())},
              {"pieces", pieces}};
}

json to_json(const SigmaProfile& s) {
  json buckets = json::array();
  for (const auto& e : s.buckets) {
    buckets.push_back({{"k", integer_json(e.k)}, {"count", integer_json(e.count)}, {"sigma", rational_json(e.sigma)}});
  }
  return json{{"block", s.label},
              {"d", integer_json(s.d)},
              {"buckets", buckets},
              {"light_count", integer_json(s.light_count)},
              {"max_sigma", rational_json(s.max_sigma())}};
}

json to_json(const FarahReport& r) {
  return json{{"D1", rational_json(r.d1)},
              {"D1_growing", r.d1_growing},
              {"D2", to_json(r.d2)},
              {"D2_trend", to_string(r.d2_trend)},
              {"D3", rational_json(r.d3)},
              {"D3_positive", r.d3_positive},
              {"threshold", rational_json(r.threshold)}};
}

json to_json(const ExhProfile& p) {
  json out = to_json(p.profile);
  json sup = json::array();
  for (const auto& s : p.running_sup) sup.push_back(rational_json(s));
  out["running_sup"] = sup;
  return out;
}

json to_json(const StarResult& r) {
  json out{{"holds", r.holds}, {"blocks_checked", r.blocks_checked}};
  if (r.first_violation) {
    out["first_violation"] = {{"block", r.first_violation->first}, {"k", integer_json(r.first_violation->second)}};
  }
  return out;
}

namespace measures {

namespace {

MeasureBlock uniform_block(std::uint64_t label, const Integer& lo, const Integer& hi) {
  return MeasureBlock{label, {lo, hi}, {{lo, hi, make_rational(1, hi - lo)}}};
}

MeasureFlags partition_flags() {
  MeasureFlags f;
  f.consecutive = true;
  f.probability = true;
  f.covers_omega = true;
  return f;
}

}  // namespace

MeasureSequence uniform_doubling() {
  MeasureFlags f = partition_flags();
  f.support_is_span = f.nonincreasing = f.doubling = true;
  return MeasureSequence(
      [](std::size_t n) -> std::optional<MeasureBlock> {
        return uniform_block(n, pow2(n + 1) - 2, pow2(n + 2) - 2);
      },
      f, json{{"kind", "catalog"}, {"name", "uniform_doubling"}});
}

MeasureSequence eu_blocks() {
  MeasureFlags f;
  f.probability = f.support_is_span = f.nonincreasing = true;
  return MeasureSequence(
      [](std::size_t j) -> std::optional<MeasureBlock> {
        Integer k = factorial(j + 1);
        return uniform_block(j + 1, 2 * k + 1, 3 * k + 1);
      },
      f, json{{"kind", "catalog"}, {"name", "eu_blocks"}});
}

MeasureSequence heavy_last_half() {
  return MeasureSequence(
      [](std::size_t n) -> std::optional<MeasureBlock> {
        Integer lo = pow2(n + 1) - 2, hi = pow2(n + 2) - 2, half = pow2(n);
        return MeasureBlock{n, {lo, hi}, {{hi - half, hi, make_rational(1, half)}}};
      },
      partition_flags(), json{{"kind", "catalog"}, {"name", "heavy_last_half"}});
}

MeasureSequence growing_mass() {
  MeasureFlags f;
  f.consecutive = f.covers_omega = f.support_is_span = f.nonincreasing = true;
  return MeasureSequence(
      [](std::size_t j) -> std::optional<MeasureBlock> {
        Integer n = static_cast<unsigned long>(j + 1);
        Integer lo = (n - 1) * n * (2 * n - 1) / 6;
        return MeasureBlock{j + 1, {lo, lo + n * n}, {{lo, lo + n * n, make_rational(1, n)}}};
      },
      f, json{{"kind", "catalog"}, {"name", "growing_mass"}});
}

MeasureSequence triangular_uniform() {
  MeasureFlags f = partition_flags();
  f.support_is_span = f.nonincreasing = true;
  return MeasureSequence(
      [](std::size_t j) -> std::optional<MeasureBlock> {
        Integer n = static_cast<unsigned long>(j + 1);
        // group k with k(k-1)/2 < n <= k(k+1)/2
        Integer k;
        mpz_sqrt(k.get_mpz_t(), Integer(2 * n).get_mpz_t());
        while (k * (k + 1) / 2 < n) ++k;
        while (k > 1 && (k - 1) * k / 2 >= n) --k;
        Integer before = (k - 1) * k * (2 * k - 1) / 6;
        Integer lo = before + (n - (k - 1) * k / 2 - 1) * k;
        return uniform_block(j + 1, lo, lo + k);
      },
      f, json{{"kind", "catalog"}, {"name", "triangular_uniform"}});
}

MeasureSequence factorial_halves(bool first_half) {
  MeasureFlags f = partition_flags();
  f.nonincreasing = first_half;
  return MeasureSequence(
      [first_half](std::size_t n) -> std::optional<MeasureBlock> {
        Integer lo = 0;
        for (std::size_t i = 0; i < n; ++i) lo += 2 * factorial(i);
        Integer half = factorial(n);
        Integer plo = first_half ? lo : lo + half;
        return MeasureBlock{n, {lo, lo + 2 * half}, {{plo, plo + half, make_rational(1, half)}}};
      },
      f, json{{"kind", "catalog"}, {"name", first_half ? "factorial_first_halves" : "factorial_last_halves"}});
}

Integer antichain_start(std::size_t i) {
  Integer n = 1;
  for (std::size_t j = 0; j < i; ++j) n += factorial(j) + factorial(j + 1);
  return n;
}

MeasureSequence antichain_blocks(const OmegaSubset& member) {
  MeasureFlags f;
  f.probability = f.support_is_span = f.nonincreasing = true;
  const Integer cap = pow2(20);
  return MeasureSequence(
      [member, cap](std::size_t j) -> std::optional<MeasureBlock> {
        if (member.prefix_count(cap) <= Integer(static_cast<unsigned long>(j))) return std::nullopt;
        Integer m = member.nth(static_cast<unsigned long>(j), cap);
        std::size_t i = m.get_ui();
        Integer lo = antichain_start(i);
        return uniform_block(i, lo, lo + factorial(i));
      },
      f, json{{"kind", "catalog"}, {"name", "antichain_blocks"}, {"member", member.descriptor()}});
}

std::size_t bucket_depth(std::size_t n) {
  if (n < 1) throw validation_error("bucketed example starts at n = 1");
  Rational target(static_cast<unsigned long>(n), 2ul);
  Rational sum = 0;
  std::size_t k = 0;
  while (sum < target) {
    ++k;
    sum += Rational(1, static_cast<unsigned long>(k + 1));
  }
  return k;
}

namespace {

PrefixMemo<Integer>& bucket_sizes() {
  // index 0 is a placeholder so that index n holds d_n
  static PrefixMemo<Integer> memo([](std::size_t n, const std::vector<Integer>& prev) -> Integer {
    if (n == 0) return 0;
    std::size_t depth = bucket_depth(n);
    Integer step = 1;
    for (std::size_t k = 1; k <= depth; ++k) step = lcm(step, Integer(static_cast<unsigned long>(n * k * (k + 1))));
    if (n == 1) return step;
    Integer need = Integer(static_cast<unsigned long>(n * depth * (depth + 1))) * prev[n - 1];
    return ceil_div(need, step) * step;
  });
  return memo;
}

PrefixMemo<Integer>& bucket_starts() {
  static PrefixMemo<Integer> memo([](std::size_t n, const std::vector<Integer>& prev) -> Integer {
    if (n <= 1) return 0;
    return prev[n - 1] + bucket_sizes().at(n - 1);
  });
  return memo;
}

}  // namespace

Integer bucket_block_size(std::size_t n) {
  if (n < 1) throw validation_error("bucketed example starts at n = 1");
  return bucket_sizes().at(n);
}

Integer bucket_block_start(std::size_t n) {
  if (n < 1) throw validation_error("bucketed example starts at n = 1");
  return bucket_starts().at(n);
}

Interval bucket_interval(std::size_t n, std::size_t k) {
  std::size_t depth = bucket_depth(n);
  if (k < 1 || k > depth) throw validation_error("bucket index out of range");
  Integer d = bucket_block_size(n);
  Integer pos = bucket_block_start(n);
  // L_depth first, then L_{depth-1}, ..., L_1
  for (std::size_t j = depth; j >= 1; --j) {
    Integer len = d / Integer(static_cast<unsigned long>(n * j * (j + 1)));
    if (j == k) return {pos, pos + len};
    pos += len;
  }
  throw validation_error("bucket index out of range");
}

MeasureSequence bucketed() {
  MeasureFlags f = partition_flags();
  f.support_is_span = f.nonincreasing = true;
  return MeasureSequence(
      [](std::size_t j) -> std::optional<MeasureBlock> {
        std::size_t n = j + 1;
        std::size_t depth = bucket_depth(n);
        Integer d = bucket_block_size(n);
        Integer start = bucket_block_start(n);
        MeasureBlock b{n, {start, start + d}, {}};
        Integer pos = start;
        Rational used = 0;
        for (std::size_t k = depth; k >= 1; --k) {
          Integer len = d / Integer(static_cast<unsigned long>(n * k * (k + 1)));
          Rational w = make_rational(static_cast<unsigned long>(k), d);
          b.pieces.push_back({pos, pos + len, w});
          used += Rational(len) * w;
          pos += len;
        }
        Integer rest = start + d - pos;
        b.pieces.push_back({pos, start + d, (1 - used) / Rational(rest)});
        return b;
      },
      f, json{{"kind", "catalog"}, {"name", "bucketed"}});
}

}  // namespace measures

}  // namespace densideal
