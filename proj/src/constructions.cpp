#include "densideal/constructions.hpp"

#include <algorithm>
#include <map>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

namespace {

std::vector<MeasureBlock> materialize(const MeasureSequence& m, std::size_t count, const char* who) {
  auto blocks = m.first_blocks(count);
  if (blocks.size() < count) {
    throw validation_error(std::string(who) + " needs " + std::to_string(count) + " blocks, the sequence has " +
                           std::to_string(blocks.size()));
  }
  return blocks;
}

MeasureSequence relabelled(std::vector<MeasureBlock> blocks, MeasureFlags flags, json descriptor) {
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].label = i;
  return MeasureSequence::from_blocks(std::move(blocks), flags, std::move(descriptor));
}

// Merges runs of equal weight that touch.
void merge_pieces(std::vector<WeightPiece>& pieces) {
  std::vector<WeightPiece> out;
  for (auto& p : pieces) {
    if (!out.empty() && out.back().hi == p.lo && out.back().weight == p.weight) {
      out.back().hi = p.hi;
    } else {
      out.push_back(std::move(p));
    }
  }
  pieces = std::move(out);
}

}  // namespace

MeasureSequence measures_from_weight(const WeightFunction& g, std::size_t count, const Integer& scan_bound) {
  if (count == 0) throw validation_error("measures_from_weight needs at least one block");
  std::map<Integer, Integer> probes;
  auto at = [&](const Integer& n) -> Integer {
    auto it = probes.find(n);
    if (it != probes.end()) return it->second;
    Integer v = g(n);
    probes.emplace(n, v);
    return v;
  };
  std::optional<Integer> last_usable;
  if (g.domain_end()) last_usable = *g.domain_end() - 1;

  std::vector<MeasureBlock> blocks;
  Integer start = 1;
  for (std::size_t k = 0; k < count; ++k) {
    Integer base = at(start);
    Integer target = 2 * base;
    // exponential search for some position reaching the target, then binary search below it
    Integer lo = start, step = 1, hi = start + 1;
    while (true) {
      if (hi > scan_bound || (last_usable && hi > *last_usable)) {
        Integer cap = last_usable ? std::min(scan_bound, *last_usable) : scan_bound;
        if (cap > lo && at(cap) >= target) {
          hi = cap;
          break;
        }
        throw scan_bound_error("weight never reaches " + to_string(target) + " below " + to_string(cap) +
                               " (block " + std::to_string(k) + "); it may be bounded");
      }
      if (at(hi) >= target) break;
      lo = hi;
      step *= 2;
      hi = start + step;
    }
    while (hi - lo > 1) {
      Integer mid = (lo + hi) / 2;
      if (at(mid) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    blocks.push_back(MeasureBlock{k, {start, hi}, {{start, hi, make_rational(1, base)}}});
    start = hi;
  }
  // nondecreasing on every probed position, and everywhere on a short prefix
  Integer prev = 0;
  for (const auto& [n, v] : probes) {
    if (v < prev) throw validation_error("weight decreases at " + to_string(n));
    prev = v;
  }
  Integer dense = std::min(start, Integer(1 << 16));
  if (auto bad = check_weight(g, dense)) throw validation_error("weight is not admissible at " + to_string(bad->n) + ": " + bad->what);

  MeasureFlags flags;
  flags.consecutive = flags.support_is_span = flags.nonincreasing = true;
  flags.probability = std::all_of(blocks.begin(), blocks.end(), [](const MeasureBlock& b) { return b.total_mass() == 1; });
  flags.doubling = true;
  for (std::size_t i = 1; i < blocks.size(); ++i) flags.doubling = flags.doubling && blocks[i].d() >= 2 * blocks[i - 1].d();
  return MeasureSequence::from_blocks(std::move(blocks), flags,
                                      json{{"kind", "from_weight"}, {"weight", g.descriptor()}, {"blocks", count}});
}

MeasureSequence cover_initial_gap(const MeasureSequence& m, std::size_t count) {
  auto blocks = materialize(m, count, "cover_initial_gap");
  MeasureFlags flags = m.flags();
  if (blocks.front().span.lo > 0) {
    Integer s = blocks.front().span.lo;
    blocks.insert(blocks.begin(), MeasureBlock{0, {0, s}, {{0, s, make_rational(1, s)}}});
    if (flags.doubling && blocks[1].d() < 2 * s) flags.doubling = false;
  }
  flags.covers_omega = flags.consecutive;
  return relabelled(std::move(blocks), flags,
                    json{{"kind", "cover_initial_gap"}, {"of", m.descriptor()}, {"blocks", count}});
}

MeasureSequence doubling_regroup(const MeasureSequence& m, std::size_t count, std::size_t max_inputs) {
  const auto& f = m.flags();
  if (!f.consecutive || !f.covers_omega || !f.probability) {
    throw validation_error("doubling_regroup needs consecutive blocks covering omega with probability measures");
  }
  if (count == 0) throw validation_error("doubling_regroup needs at least one block");
  std::vector<MeasureBlock> out;
  std::size_t next = 0;
  Integer previous_size = 0;
  while (out.size() < count) {
    std::vector<MeasureBlock> group;
    Integer size = 0;
    do {
      if (next >= max_inputs) throw scan_bound_error("doubling_regroup consumed too many input blocks");
      auto b = m.try_block(next++);
      if (!b) throw validation_error("measure sequence ended before " + std::to_string(count) + " groups formed");
      size += b->d();
      group.push_back(std::move(*b));
    } while (size < 2 * previous_size);
    MeasureBlock merged{out.size(), {group.front().span.lo, group.back().span.hi}, {}};
    Integer parts = static_cast<unsigned long>(group.size());
    for (const auto& b : group) {
      for (const auto& p : b.pieces) merged.pieces.push_back({p.lo, p.hi, p.weight / Rational(parts)});
    }
    merge_pieces(merged.pieces);
    out.push_back(std::move(merged));
    previous_size = size;
  }
  MeasureFlags flags = f;
  flags.doubling = true;
  return MeasureSequence::from_blocks(std::move(out), flags,
                                      json{{"kind", "doubling_regroup"}, {"of", m.descriptor()}, {"blocks", count}});
}

Rearrangement monotone_rearrange(const MeasureSequence& m, std::size_t count) {
  auto blocks = materialize(m, count, "monotone_rearrange");
  std::vector<MapPiece> moves;
  for (auto& b : blocks) {
    // the span as runs, zero-mass gaps included
    std::vector<WeightPiece> runs;
    Integer pos = b.span.lo;
    for (const auto& p : b.pieces) {
      if (pos < p.lo) runs.push_back({pos, p.lo, 0});
      runs.push_back(p);
      pos = p.hi;
    }
    if (pos < b.span.hi) runs.push_back({pos, b.span.hi, 0});
    std::stable_sort(runs.begin(), runs.end(), [](const WeightPiece& x, const WeightPiece& y) { return x.weight > y.weight; });
    std::vector<WeightPiece> placed;
    pos = b.span.lo;
    for (const auto& r : runs) {
      Integer len = r.length();
      if (pos != r.lo) moves.push_back(MapPiece::translate(r.lo, r.hi, pos - r.lo));
      if (r.weight > 0) placed.push_back({pos, pos + len, r.weight});
      pos += len;
    }
    merge_pieces(placed);
    b.pieces = std::move(placed);
  }
  MeasureFlags flags = m.flags();
  flags.nonincreasing = true;
  json d{{"kind", "monotone_rearrange"}, {"of", m.descriptor()}, {"blocks", count}};
  json md{{"kind", "explicit"}, {"pieces", json::array()}};
  for (const auto& p : moves) md["pieces"].push_back(to_json(p));
  return {MeasureSequence::from_blocks(std::move(blocks), flags, d), IndexMap::from_pieces(std::move(moves), md)};
}

namespace {

struct HValue {
  bool heavy;
  Integer k;
  Rational exact;
  Integer floor;
};

HValue h_of_weight(const Rational& w, const Integer& d) {
  Integer k = heavy_bucket(w, d);
  if (k >= 1) return {true, k, make_rational(d, k), floor_div(d, k)};
  k = light_bucket(w, d);
  Integer v = (k + 1) * d;
  return {false, k, Rational(v), v};
}

// Position-level view of a block whose support is its whole span.
struct BlockView {
  const MeasureBlock& b;

  Integer h_floor(const Integer& pos) const { return h_of_weight(b.atom(pos), b.d()).floor; }
  // mass of the first s points
  Rational prefix_mass(const Integer& s) const {
    Rational m = 0;
    Integer end = b.span.lo + s;
    for (const auto& p : b.pieces) {
      if (p.lo >= end) break;
      m += Rational(std::min(p.hi, end) - p.lo) * p.weight;
    }
    return m;
  }
};

// Least s in [lo, hi] with pred(s), assuming pred is monotone; nullopt if pred(hi) fails.
template <class Pred>
std::optional<Integer> least_true(Integer lo, Integer hi, Pred pred) {
  if (lo > hi || !pred(hi)) return std::nullopt;
  while (lo < hi) {
    Integer mid = (lo + hi) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

void push_run(std::vector<weights::TableRun>& runs, const Integer& lo, const Integer& hi, const Integer& value) {
  if (hi <= lo) return;
  if (!runs.empty() && runs.back().hi == lo && runs.back().value == value) {
    runs.back().hi = hi;
  } else {
    runs.push_back({lo, hi, value});
  }
}

}  // namespace

SynthesisResult weight_from_measures(const MeasureSequence& m, std::size_t count) {
  if (count == 0) throw validation_error("weight_from_measures needs at least one block");
  const auto& f = m.flags();
  if (!f.consecutive || !f.covers_omega || !f.probability || !f.support_is_span || !f.nonincreasing || !f.doubling) {
    throw validation_error(
        "weight_from_measures needs consecutive probability blocks covering omega, support equal to span, "
        "nonincreasing atoms and doubling sizes (chain doubling_regroup and monotone_rearrange first)");
  }
  if (auto bad = check_flags(m, count + 1)) throw validation_error("measure sequence flags do not hold: " + *bad);
  auto blocks = materialize(m, count + 1, "weight_from_measures");

  WeightSynthesisTrace trace;
  std::vector<weights::TableRun> all_runs;
  Interval left{blocks[0].span.lo, blocks[0].span.lo};
  Integer left_value = 0;
  for (std::size_t n = 0; n < count; ++n) {
    const auto& cur = blocks[n];
    const auto& nxt = blocks[n + 1];
    BlockView cv{cur}, nv{nxt};
    const Integer d = cur.d();
    SynthesisBlock sb;
    sb.label = cur.label;
    sb.span = cur.span;
    sb.d = d;
    sb.left = left;
    for (const auto& p : cur.pieces) {
      HValue h = h_of_weight(p.weight, d);
      if (!sb.buckets.empty() && sb.buckets.back().heavy == h.heavy && sb.buckets.back().k == h.k &&
          sb.buckets.back().hi == p.lo) {
        sb.buckets.back().hi = p.hi;
      } else {
        sb.buckets.push_back({h.heavy, h.k, p.lo, p.hi, h.exact, h.floor});
      }
    }

    Integer left_size = left.length();
    Integer cap_right;
    if (d == 1) {
      sb.single_point = true;
      cap_right = left_size == 0 ? 1 : 0;
    } else {
      cap_right = std::min(Integer(d / 2), Integer(d - left_size));
    }
    if (cap_right < 1) throw synthesis_error("no room for a nonempty final segment", n);
    // largest s with mass of the first s - 1 points below 1/2, leaving room for the next final segment
    Integer cap_left = 1;
    {
      Integer lo = 1, hi = nxt.d() - 1;
      while (lo < hi) {
        Integer mid = (lo + hi + 1) / 2;
        if (nv.prefix_mass(mid - 1) < Rational(1, 2)) {
          lo = mid;
        } else {
          hi = mid - 1;
        }
      }
      cap_left = lo;
    }
    auto h_min_right = [&](const Integer& s) -> Integer { return cv.h_floor(cur.span.hi - s); };
    auto h_max_left = [&](const Integer& s) -> Integer { return nv.h_floor(nxt.span.lo + s - 1); };

    Integer size_right, size_left;
    Integer both = std::min(cap_right, cap_left);
    if (auto s = least_true(Integer(1), both, [&](const Integer& x) { return h_min_right(x) <= h_max_left(x); })) {
      size_right = size_left = *s;
      sb.branch = "equal";
    } else if (cap_right < cap_left) {
      size_right = cap_right;
      auto s = least_true(Integer(1), cap_left, [&](const Integer& x) { return d <= h_max_left(x); });
      if (!s) throw synthesis_error("no initial segment of the next block reaches h >= d", n);
      size_left = *s;
      sb.branch = "right-capped";
    } else {
      size_left = cap_left;
      Integer top = h_max_left(size_left);
      auto s = least_true(Integer(1), cap_right, [&](const Integer& x) { return h_min_right(x) <= top; });
      if (!s) throw synthesis_error("no final segment has h below the next block's boundary value", n);
      size_right = *s;
      sb.branch = "left-capped";
    }
    sb.right = {cur.span.hi - size_right, cur.span.hi};
    sb.next_left = {nxt.span.lo, nxt.span.lo + size_left};
    if (sb.right.lo < left.hi) throw synthesis_error("final segment meets the initial segment", n);
    Integer top = h_max_left(size_left);
    sb.r = floor_div(top, d) - 1;
    if (sb.r < 0) throw synthesis_error("boundary value below d", n);

    // emitted values on this block
    push_run(sb.runs, left.lo, left.hi, left_value);
    for (const auto& p : cur.pieces) {
      Integer lo = std::max(p.lo, left.hi), hi = std::min(p.hi, sb.right.lo);
      push_run(sb.runs, lo, hi, h_of_weight(p.weight, d).floor);
    }
    push_run(sb.runs, sb.right.lo, sb.right.hi, (sb.r + 1) * d);
    for (const auto& r : sb.runs) {
      if (!all_runs.empty() && r.value < all_runs.back().value) {
        throw synthesis_error("synthesized weight decreases at " + to_string(r.lo), n);
      }
      push_run(all_runs, r.lo, r.hi, r.value);
    }
    trace.blocks.push_back(std::move(sb));
    left = {nxt.span.lo, nxt.span.lo + size_left};
    left_value = top;
  }
  json extra{{"synthesized_from", m.descriptor()}, {"blocks", count}};
  return {weights::table(std::move(all_runs), extra), std::move(trace)};
}

std::optional<std::string> check_trace(const WeightSynthesisTrace& trace, const MeasureSequence& m) {
  auto blocks = m.first_blocks(trace.blocks.size() + 1);
  if (blocks.size() < trace.blocks.size() + 1) return "sequence shorter than the trace";
  for (std::size_t n = 0; n < trace.blocks.size(); ++n) {
    const auto& t = trace.blocks[n];
    const auto& cur = blocks[n];
    const auto& nxt = blocks[n + 1];
    std::string at = " at block " + std::to_string(n);
    if (t.span != cur.span) return "span mismatch" + at;
    if (t.right.length() < 1 || t.right.hi != cur.span.hi || t.right.lo < cur.span.lo) return "(a) fails" + at;
    if (t.next_left.length() < 1 || t.next_left.lo != nxt.span.lo || t.next_left.hi > nxt.span.hi) return "(b) fails" + at;
    if (2 * t.right.length() > cur.d()) return "(c) fails on the final segment" + at;
    if (nxt.mass(OmegaSubset::intervals({{t.next_left.lo, t.next_left.hi - 1}})) >= Rational(1, 2)) {
      return "(c) fails on the next initial segment" + at;
    }
    if (t.left.length() > 0 && t.left.hi > t.right.lo) return "(d) fails" + at;
    if (n + 1 < trace.blocks.size() && trace.blocks[n + 1].left != t.next_left) return "initial segments disagree" + at;
  }
  return std::nullopt;
}

std::optional<Lem3Result> lem3_witness_scan(const MeasureSequence& m, const WeightFunction& g, const OmegaSubset& b,
                                            const Integer& horizon) {
  if (!m.flags().consecutive) throw validation_error("lem3_witness_scan needs consecutive blocks");
  constexpr std::size_t kMaxEvaluations = 10'000'000;
  std::size_t evaluations = 0;
  std::vector<Lem3Witness> best;
  for (std::size_t i = 0;; ++i) {
    auto blk = m.try_block(i);
    if (!blk || blk->span.hi > horizon) break;
    // with g nondecreasing the ratio peaks right after a point of B
    Lem3Witness top{blk->label, 0, 0};
    Integer seen = 0;
    for (const auto& seg : b.segments(blk->span.hi - 1)) {
      if (seg.hi <= blk->span.lo) continue;
      Integer from = std::max(seg.lo, blk->span.lo);
      for (Integer p = from; p < seg.hi; ++p) {
        if (!seg.contains(p)) continue;
        if (++evaluations > kMaxEvaluations) throw scan_bound_error("lem3 scan evaluated too many points");
        ++seen;
        Integer l = p + 1;
        Rational v = make_rational(seen, g(l));
        if (v > top.value) top = {blk->label, l, v};
      }
    }
    if (top.value > 0) best.push_back(top);
  }
  if (best.size() < 3) return std::nullopt;
  std::vector<Rational> values;
  for (const auto& w : best) values.push_back(w.value);
  std::sort(values.begin(), values.end(), std::greater<>());
  Lem3Result r{values[2], {}};
  for (const auto& w : best) {
    if (w.value >= r.delta) r.witnesses.push_back(w);
  }
  return r;
}

json to_json(const WeightSynthesisTrace& t) {
  json blocks = json::array();
  for (const auto& b : t.blocks) {
    json buckets = json::array();
    for (const auto& k : b.buckets) {
      buckets.push_back({{"bucket", k.heavy ? "L" : "R"},
                         {"k", integer_json(k.k)},
                         {"lo", integer_json(k.lo)},
                         {"hi", integer_json(k.hi)},
                         {"h", rational_json(k.h)},
                         {"h_floor", integer_json(k.h_floor)}});
    }
    json runs = json::array();
    for (const auto& r : b.runs) {
      runs.push_back(json::array({integer_json(r.lo), integer_json(r.hi), integer_json(r.value)}));
    }
    auto iv = [](const Interval& x) { return json::array({integer_json(x.lo), integer_json(x.hi)}); };
    blocks.push_back({{"block", b.label},
                      {"span", iv(b.span)},
                      {"d", integer_json(b.d)},
                      {"buckets", buckets},
                      {"L", iv(b.left)},
                      {"R", iv(b.right)},
                      {"L_next", iv(b.next_left)},
                      {"r", integer_json(b.r)},
                      {"branch", b.branch},
                      {"single_point", b.single_point},
                      {"g", runs}});
  }
  return json{{"blocks", blocks}};
}

json to_json(const Lem3Result& r) {
  json w = json::array();
  for (const auto& x : r.witnesses) {
    w.push_back({{"block", x.label}, {"point", integer_json(x.point)}, {"value", rational_json(x.value)}});
  }
  return json{{"delta", rational_json(r.delta)}, {"witnesses", w}};
}

}  // namespace densideal
