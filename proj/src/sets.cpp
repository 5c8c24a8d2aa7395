#include "densideal/sets.hpp"

#include <algorithm>
#include <mutex>
#include <variant>

#include "densideal/errors.hpp"

namespace densideal {

namespace {

constexpr std::size_t kMaxBlockIterations = 50'000'000;

json str(const Integer& n) { return to_string(n); }

json integers_json(const std::vector<Integer>& xs) {
  json arr = json::array();
  for (const auto& x : xs) arr.push_back(str(x));
  return arr;
}

// Membership pattern of a segment: position p is in iff p mod modulus is in residues.
struct Pattern {
  Integer modulus{1};
  std::vector<Integer> residues;

  bool empty() const { return residues.empty(); }
  bool has(const Integer& p) const {
    Integer r = p % modulus;
    if (r < 0) r += modulus;
    return std::binary_search(residues.begin(), residues.end(), r);
  }
  bool operator==(const Pattern&) const = default;
};

Pattern full_pattern() { return Pattern{Integer(1), {Integer(0)}}; }

enum class Op { Union, Intersection, Difference };

Pattern combine_patterns(const Pattern& a, const Pattern& b, Op op) {
  if (a.modulus == 1 && b.modulus == 1) {
    bool ia = !a.empty(), ib = !b.empty();
    bool in = op == Op::Union ? (ia || ib) : op == Op::Intersection ? (ia && ib) : (ia && !ib);
    return in ? full_pattern() : Pattern{};
  }
  // an empty or full side settles most cases without expanding the period
  bool a_full = a.modulus == 1 && !a.empty(), b_full = b.modulus == 1 && !b.empty();
  switch (op) {
    case Op::Union:
      if (a.empty() || b_full) return b;
      if (b.empty() || a_full) return a;
      break;
    case Op::Intersection:
      if (a.empty() || b_full) return a;
      if (b.empty() || a_full) return b;
      break;
    case Op::Difference:
      if (a.empty() || b_full) return Pattern{};
      if (b.empty()) return a;
      break;
  }
  Integer period = lcm(a.modulus, b.modulus);
  if (period > kMaxPatternPeriod) {
    throw validation_error("combined periodic pattern exceeds period limit " + std::to_string(kMaxPatternPeriod));
  }
  Pattern out;
  out.modulus = period;
  for (Integer r = 0; r < period; ++r) {
    bool ia = a.has(r), ib = b.has(r);
    bool in = op == Op::Union ? (ia || ib) : op == Op::Intersection ? (ia && ib) : (ia && !ib);
    if (in) out.residues.push_back(r);
  }
  if (Integer(static_cast<unsigned long>(out.residues.size())) == period) return full_pattern();
  return out;
}

Pattern pattern_of(const Segment& s) { return Pattern{s.modulus, s.residues}; }

void push_segment(std::vector<Segment>& out, const Integer& lo, const Integer& hi, const Pattern& p) {
  if (lo >= hi || p.empty()) return;
  if (!out.empty() && out.back().hi == lo && out.back().modulus == p.modulus && out.back().residues == p.residues) {
    out.back().hi = hi;
    return;
  }
  out.push_back(Segment{lo, hi, p.modulus, p.residues});
}

// Sweep two sorted disjoint segment lists restricted to [0, n).
std::vector<Segment> combine_segments(const std::vector<Segment>& a, const std::vector<Segment>& b, Op op,
                                      const Integer& n) {
  std::vector<Integer> cuts{Integer(0), n};
  for (const auto* list : {&a, &b}) {
    for (const auto& s : *list) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Segment> out;
  std::size_t ia = 0, ib = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const Integer& x = cuts[c];
    const Integer& y = cuts[c + 1];
    if (x >= n) break;
    while (ia < a.size() && a[ia].hi <= x) ++ia;
    while (ib < b.size() && b[ib].hi <= x) ++ib;
    Pattern pa = (ia < a.size() && a[ia].lo <= x) ? pattern_of(a[ia]) : Pattern{};
    Pattern pb = (ib < b.size() && b[ib].lo <= x) ? pattern_of(b[ib]) : Pattern{};
    push_segment(out, x, y, combine_patterns(pa, pb, op));
  }
  return out;
}

// Count of r in sorted residues with r < bound.
Integer residues_below(const std::vector<Integer>& residues, const Integer& bound) {
  auto it = std::lower_bound(residues.begin(), residues.end(), bound);
  return Integer(static_cast<unsigned long>(it - residues.begin()));
}

// |{p in [0, x) : p mod m in R}|
Integer periodic_count_below(const Integer& m, const std::vector<Integer>& residues, const Integer& x) {
  if (x <= 0) return 0;
  Integer q = floor_div(x, m);
  Integer r = x - q * m;
  return q * Integer(static_cast<unsigned long>(residues.size())) + residues_below(residues, r);
}

void validate_block(const Interval& b, const std::optional<Interval>& prev) {
  if (b.lo < 0 || b.lo >= b.hi) {
    throw validation_error("block family produced an empty or negative interval [" + to_string(b.lo) + ", " +
                           to_string(b.hi) + ")");
  }
  if (prev && b.lo < prev->hi) {
    throw validation_error("block family intervals overlap or are out of order at [" + to_string(b.lo) + ", " +
                           to_string(b.hi) + ")");
  }
}

}  // namespace

bool Segment::contains(const Integer& n) const {
  if (n < lo || n >= hi) return false;
  return Pattern{modulus, residues}.has(n);
}

Integer Segment::count_below(const Integer& x) const {
  if (x <= lo) return 0;
  Integer top = x < hi ? x : hi;
  if (is_full()) return top - lo;
  return periodic_count_below(modulus, residues, top) - periodic_count_below(modulus, residues, lo);
}

struct FiniteNode {
  std::vector<Integer> elements;
};
struct IntervalsNode {
  std::vector<Interval> blocks;
  std::vector<Integer> cumulative;  // cumulative[i] = total length of blocks[0..i)
};
struct GeneratedNode {
  BlockGenerator gen;
};
struct PeriodicNode {
  Integer modulus;
  std::vector<Integer> residues;
};
struct TailNode {
  Integer from;
};
struct BinaryNode {
  Op op;
  OmegaSubset lhs;
  OmegaSubset rhs;
};
struct ComplementNode {
  OmegaSubset of;
};

// Segments of a composite node below `limit`, kept so repeated prefix counts are a lookup.
struct SegmentCache {
  std::mutex lock;
  Integer limit{0};
  std::vector<Segment> segments;
  std::vector<Integer> before;  // before[i] = members in segments[0..i)
};

struct OmegaSubset::Node {
  std::variant<FiniteNode, IntervalsNode, GeneratedNode, PeriodicNode, TailNode, BinaryNode, ComplementNode> v;
  json descriptor;
  std::shared_ptr<SegmentCache> cache = std::make_shared<SegmentCache>();
};

namespace {

template <class F>
void for_each_generated_block(const BlockGenerator& gen, const Integer& below, F&& f) {
  std::optional<Interval> prev;
  for (std::size_t j = 0;; ++j) {
    if (j >= kMaxBlockIterations) throw scan_bound_error("block family iteration limit reached");
    auto b = gen(j);
    if (!b) return;
    validate_block(*b, prev);
    if (b->lo >= below) return;
    f(*b);
    prev = b;
  }
}

}  // namespace

OmegaSubset::OmegaSubset() : OmegaSubset(empty()) {}

OmegaSubset OmegaSubset::empty() {
  static const auto node =
      std::make_shared<const Node>(Node{FiniteNode{}, json{{"kind", "finite"}, {"elements", json::array()}}});
  return OmegaSubset(node);
}

OmegaSubset OmegaSubset::omega() {
  return OmegaSubset(std::make_shared<const Node>(Node{TailNode{Integer(0)}, json{{"kind", "omega"}}}));
}

OmegaSubset OmegaSubset::finite(std::vector<Integer> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  if (!elements.empty() && elements.front() < 0) throw validation_error("negative element in finite set");
  json d{{"kind", "finite"}, {"elements", integers_json(elements)}};
  return OmegaSubset(std::make_shared<const Node>(Node{FiniteNode{std::move(elements)}, std::move(d)}));
}

OmegaSubset OmegaSubset::intervals(std::vector<Interval> blocks) {
  blocks.erase(std::remove_if(blocks.begin(), blocks.end(), [](const Interval& b) { return b.lo >= b.hi; }),
               blocks.end());
  std::sort(blocks.begin(), blocks.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::optional<Interval> prev;
  json arr = json::array();
  IntervalsNode node;
  Integer total = 0;
  for (const auto& b : blocks) {
    validate_block(b, prev);
    prev = b;
    node.cumulative.push_back(total);
    total += b.length();
    arr.push_back(json::array({str(b.lo), str(b.hi)}));
  }
  node.cumulative.push_back(total);
  node.blocks = std::move(blocks);
  json d{{"kind", "blocks"}, {"intervals", std::move(arr)}};
  return OmegaSubset(std::make_shared<const Node>(Node{std::move(node), std::move(d)}));
}

OmegaSubset OmegaSubset::blocks(BlockGenerator gen, json descriptor) {
  return OmegaSubset(std::make_shared<const Node>(Node{GeneratedNode{std::move(gen)}, std::move(descriptor)}));
}

OmegaSubset OmegaSubset::periodic(Integer modulus, std::vector<Integer> residues) {
  if (modulus < 1) throw validation_error("periodic set needs modulus >= 1");
  for (auto& r : residues) {
    r %= modulus;
    if (r < 0) r += modulus;
  }
  std::sort(residues.begin(), residues.end());
  residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
  json d{{"kind", "periodic"}, {"modulus", str(modulus)}, {"residues", integers_json(residues)}};
  return OmegaSubset(
      std::make_shared<const Node>(Node{PeriodicNode{std::move(modulus), std::move(residues)}, std::move(d)}));
}

OmegaSubset OmegaSubset::at_least(const Integer& from) {
  if (from < 0) throw validation_error("tail start must be nonnegative");
  return OmegaSubset(std::make_shared<const Node>(Node{TailNode{from}, json{{"kind", "at_least"}, {"from", str(from)}}}));
}

OmegaSubset OmegaSubset::from_points(std::vector<Integer> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::vector<Interval> runs;
  for (const auto& p : points) {
    if (!runs.empty() && runs.back().hi == p) {
      runs.back().hi += 1;
    } else {
      runs.push_back(Interval{p, p + 1});
    }
  }
  return intervals(std::move(runs));
}

OmegaSubset set_union(const OmegaSubset& a, const OmegaSubset& b) {
  json d{{"kind", "union"}, {"left", a.descriptor()}, {"right", b.descriptor()}};
  return OmegaSubset(std::make_shared<const OmegaSubset::Node>(OmegaSubset::Node{BinaryNode{Op::Union, a, b}, d}));
}

OmegaSubset set_intersection(const OmegaSubset& a, const OmegaSubset& b) {
  json d{{"kind", "intersection"}, {"left", a.descriptor()}, {"right", b.descriptor()}};
  return OmegaSubset(
      std::make_shared<const OmegaSubset::Node>(OmegaSubset::Node{BinaryNode{Op::Intersection, a, b}, d}));
}

OmegaSubset set_difference(const OmegaSubset& a, const OmegaSubset& b) {
  json d{{"kind", "difference"}, {"left", a.descriptor()}, {"right", b.descriptor()}};
  return OmegaSubset(
      std::make_shared<const OmegaSubset::Node>(OmegaSubset::Node{BinaryNode{Op::Difference, a, b}, d}));
}

OmegaSubset set_complement(const OmegaSubset& a) {
  json d{{"kind", "complement"}, {"of", a.descriptor()}};
  return OmegaSubset(std::make_shared<const OmegaSubset::Node>(OmegaSubset::Node{ComplementNode{a}, d}));
}

const json& OmegaSubset::descriptor() const { return node_->descriptor; }

bool OmegaSubset::contains(const Integer& n) const {
  if (n < 0) return false;
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, FiniteNode>) {
          return std::binary_search(node.elements.begin(), node.elements.end(), n);
        } else if constexpr (std::is_same_v<T, IntervalsNode>) {
          auto it = std::upper_bound(node.blocks.begin(), node.blocks.end(), n,
                                     [](const Integer& x, const Interval& b) { return x < b.lo; });
          if (it == node.blocks.begin()) return false;
          return std::prev(it)->contains(n);
        } else if constexpr (std::is_same_v<T, GeneratedNode>) {
          bool found = false;
          for_each_generated_block(node.gen, n + 1, [&](const Interval& b) {
            if (b.contains(n)) found = true;
          });
          return found;
        } else if constexpr (std::is_same_v<T, PeriodicNode>) {
          return Pattern{node.modulus, node.residues}.has(n);
        } else if constexpr (std::is_same_v<T, TailNode>) {
          return n >= node.from;
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          bool a = node.lhs.contains(n);
          bool b = node.rhs.contains(n);
          switch (node.op) {
            case Op::Union: return a || b;
            case Op::Intersection: return a && b;
            case Op::Difference: return a && !b;
          }
          return false;
        } else {
          return !node.of.contains(n);
        }
      },
      node_->v);
}

std::vector<Segment> OmegaSubset::segments(const Integer& n) const {
  std::vector<Segment> out;
  if (n <= 0) return out;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, FiniteNode>) {
          for (const auto& e : node.elements) {
            if (e >= n) break;
            push_segment(out, e, e + 1, full_pattern());
          }
        } else if constexpr (std::is_same_v<T, IntervalsNode>) {
          for (const auto& b : node.blocks) {
            if (b.lo >= n) break;
            push_segment(out, b.lo, b.hi < n ? b.hi : n, full_pattern());
          }
        } else if constexpr (std::is_same_v<T, GeneratedNode>) {
          for_each_generated_block(node.gen, n, [&](const Interval& b) {
            push_segment(out, b.lo, b.hi < n ? b.hi : n, full_pattern());
          });
        } else if constexpr (std::is_same_v<T, PeriodicNode>) {
          if (Integer(static_cast<unsigned long>(node.residues.size())) == node.modulus) {
            push_segment(out, 0, n, full_pattern());
          } else {
            push_segment(out, 0, n, Pattern{node.modulus, node.residues});
          }
        } else if constexpr (std::is_same_v<T, TailNode>) {
          push_segment(out, node.from, n, full_pattern());
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          out = combine_segments(node.lhs.segments(n), node.rhs.segments(n), node.op, n);
        } else {
          std::vector<Segment> all{Segment{Integer(0), n}};
          out = combine_segments(all, node.of.segments(n), Op::Difference, n);
        }
      },
      node_->v);
  return out;
}

Integer OmegaSubset::prefix_count(const Integer& n) const {
  if (n <= 0) return 0;
  return std::visit(
      [&](const auto& node) -> Integer {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, FiniteNode>) {
          auto it = std::lower_bound(node.elements.begin(), node.elements.end(), n);
          return Integer(static_cast<unsigned long>(it - node.elements.begin()));
        } else if constexpr (std::is_same_v<T, IntervalsNode>) {
          auto it = std::lower_bound(node.blocks.begin(), node.blocks.end(), n,
                                     [](const Interval& b, const Integer& x) { return b.lo < x; });
          std::size_t k = static_cast<std::size_t>(it - node.blocks.begin());
          if (k == 0) return 0;
          const Interval& last = node.blocks[k - 1];
          Integer clipped = (last.hi < n ? last.hi : n) - last.lo;
          return node.cumulative[k - 1] + clipped;
        } else if constexpr (std::is_same_v<T, PeriodicNode>) {
          return periodic_count_below(node.modulus, node.residues, n);
        } else if constexpr (std::is_same_v<T, TailNode>) {
          return n > node.from ? Integer(n - node.from) : Integer(0);
        } else if constexpr (std::is_same_v<T, ComplementNode>) {
          return n - node.of.prefix_count(n);
        } else {
          return cached_prefix_count(n);
        }
      },
      node_->v);
}

Integer OmegaSubset::cached_prefix_count(const Integer& n) const {
  auto& c = *node_->cache;
  std::lock_guard<std::mutex> guard(c.lock);
  if (c.limit < n) {
    // grow geometrically; fall back to exactly n if the larger scan hits a bound
    Integer target = c.limit > 0 && 2 * c.limit > n ? Integer(2 * c.limit) : n;
    std::vector<Segment> segs;
    try {
      segs = segments(target);
    } catch (const scan_bound_error&) {
      if (target == n) throw;
      target = n;
      segs = segments(target);
    }
    c.before.clear();
    Integer total = 0;
    for (const auto& s : segs) {
      c.before.push_back(total);
      total += s.count();
    }
    c.segments = std::move(segs);
    c.limit = target;
  }
  auto it = std::lower_bound(c.segments.begin(), c.segments.end(), n,
                             [](const Segment& s, const Integer& x) { return s.lo < x; });
  std::size_t k = static_cast<std::size_t>(it - c.segments.begin());
  if (k == 0) return 0;
  return c.before[k - 1] + c.segments[k - 1].count_below(n);
}

Integer OmegaSubset::count_in(const Integer& lo, const Integer& hi) const {
  if (hi <= lo) return 0;
  return prefix_count(hi) - prefix_count(lo);
}

std::vector<Integer> OmegaSubset::elements_below(const Integer& n, std::size_t cap) const {
  std::vector<Integer> out;
  for (const auto& s : segments(n)) {
    for (Integer p = s.lo; p < s.hi; ++p) {
      if (!s.is_full() && !s.contains(p)) continue;
      if (out.size() >= cap) throw scan_bound_error("element enumeration exceeded cap " + std::to_string(cap));
      out.push_back(p);
    }
  }
  return out;
}

Integer OmegaSubset::nth(const Integer& j, const Integer& cap) const {
  Integer want = j + 1;
  Integer hi = 1;
  while (prefix_count(hi) < want) {
    if (hi >= cap) throw scan_bound_error("element #" + to_string(j) + " not found below " + to_string(cap));
    hi *= 2;
    if (hi > cap) hi = cap;
  }
  // least x with prefix_count(x + 1) >= want lies in [0, hi)
  Integer lo = 0, top = hi - 1;
  while (lo < top) {
    Integer mid = floor_div(lo + top, 2);
    if (prefix_count(mid + 1) >= want) {
      top = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

DominationResult dominates_prefixwise(const OmegaSubset& c, const OmegaSubset& b, const Integer& horizon) {
  if (horizon < 1) throw validation_error("dominates_prefixwise needs horizon >= 1");
  // prefix counts are over [0, n) for n <= horizon, so positions < horizon matter
  const auto sc = c.segments(horizon);
  const auto sb = b.segments(horizon);
  std::vector<Integer> cuts{Integer(0), horizon};
  for (const auto* list : {&sc, &sb}) {
    for (const auto& s : *list) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Integer delta = 0;  // |C∩x| - |B∩x| at the current cut x
  std::size_t ic = 0, ib = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Integer& x = cuts[k];
    const Integer& y = cuts[k + 1];
    if (x >= horizon) break;
    while (ic < sc.size() && sc[ic].hi <= x) ++ic;
    while (ib < sb.size() && sb[ib].hi <= x) ++ib;
    Pattern pc = (ic < sc.size() && sc[ic].lo <= x) ? pattern_of(sc[ic]) : Pattern{};
    Pattern pb = (ib < sb.size() && sb[ib].lo <= x) ? pattern_of(sb[ib]) : Pattern{};
    Integer period = lcm(pc.modulus, pb.modulus);
    if (period > kMaxPatternPeriod) throw validation_error("periodic pattern too long for domination check");
    unsigned long p = period.get_ui();
    // partial[s] = sum of increments over positions x .. x+s-1
    std::vector<Integer> partial(p + 1, Integer(0));
    for (unsigned long s = 0; s < p; ++s) {
      Integer pos = x + s;
      int inc = (pc.empty() ? 0 : pc.has(pos)) - (pb.empty() ? 0 : pb.has(pos));
      partial[s + 1] = partial[s] + inc;
    }
    const Integer& per_period = partial[p];
    Integer span = y - x;
    std::optional<Integer> best;
    for (unsigned long s = 0; s < p; ++s) {
      // t = q*p + s with t >= 1; need delta + q*per_period + partial[s] > 0
      Integer q_lo = s == 0 ? Integer(1) : Integer(0);
      Integer q = q_lo;
      Integer base = delta + partial[s];
      if (per_period > 0) {
        Integer need = ceil_div(Integer(1) - base, per_period);
        if (need > q) q = need;
      } else if (base + q * per_period <= 0) {
        continue;
      }
      if (base + q * per_period <= 0) continue;
      Integer t = q * Integer(p) + s;
      if (t > span) continue;
      if (!best || t < *best) best = t;
    }
    if (best) return DominationResult{false, x + *best};
    Integer q = floor_div(span, Integer(p));
    Integer s = span - q * Integer(p);
    delta += q * per_period + partial[s.get_ui()];
  }
  return DominationResult{true, std::nullopt};
}

SplitResult split_mod(const OmegaSubset& c, std::size_t d, const Integer& horizon) {
  if (d < 1) throw validation_error("split_mod needs d >= 1");
  auto elems = c.elements_below(horizon);
  if (elems.size() < d + 1) {
    throw degenerate_input_error("split_mod needs at least d+1 = " + std::to_string(d + 1) +
                                 " elements below the horizon, found " + std::to_string(elems.size()));
  }
  SplitResult out;
  out.leftover = OmegaSubset::finite(std::vector<Integer>(elems.begin(), elems.begin() + static_cast<long>(d)));
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Integer> cls;
    for (std::size_t idx = k + d; idx < elems.size(); idx += d) cls.push_back(elems[idx]);
    out.classes.push_back(OmegaSubset::finite(std::move(cls)));
  }
  return out;
}

}  // namespace densideal
