#include "densideal/index_map.hpp"

#include <algorithm>
#include <set>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

namespace {

constexpr std::size_t kMaxPieceScan = 50'000'000;

// elements of [lo, hi) congruent to r mod m, for m >= 1
Integer count_congruent(const Integer& lo, const Integer& hi, const Integer& r, const Integer& m) {
  if (hi <= lo) return 0;
  auto below = [&](const Integer& x) -> Integer { return floor_div(x - r + m - 1, m); };
  return below(hi) - below(lo);
}

}  // namespace

MapPiece MapPiece::translate(Integer lo, Integer hi, Integer offset) {
  MapPiece p;
  p.kind = Kind::Translate;
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  p.offset = std::move(offset);
  return p;
}

MapPiece MapPiece::reverse(Integer lo, Integer hi) {
  MapPiece p;
  p.kind = Kind::Reverse;
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  return p;
}

MapPiece MapPiece::fold(Integer lo, Integer hi, Integer target, Integer width) {
  MapPiece p;
  p.kind = Kind::Fold;
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  p.target = std::move(target);
  p.width = std::move(width);
  return p;
}

MapPiece MapPiece::permutation(Integer lo, std::vector<Integer> values) {
  MapPiece p;
  p.kind = Kind::Permutation;
  p.lo = lo;
  p.hi = lo + Integer(static_cast<unsigned long>(values.size()));
  p.values = std::move(values);
  return p;
}

Integer MapPiece::apply(const Integer& i) const {
  switch (kind) {
    case Kind::Translate:
      return i + offset;
    case Kind::Reverse:
      return lo + hi - 1 - i;
    case Kind::Fold: {
      Integer r = i - lo;
      mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), width.get_mpz_t());
      return target + r;
    }
    case Kind::Permutation:
      return values[Integer(i - lo).get_ui()];
  }
  return i;
}

namespace {

void validate_piece(const MapPiece& p) {
  if (p.lo < 0 || p.hi <= p.lo) throw validation_error("map piece has an empty or negative domain");
  switch (p.kind) {
    case MapPiece::Kind::Translate:
      if (p.lo + p.offset < 0) throw validation_error("translation leaves the naturals");
      break;
    case MapPiece::Kind::Fold:
      if (p.width < 1 || p.target < 0) throw validation_error("fold needs width >= 1 and target >= 0");
      break;
    case MapPiece::Kind::Permutation:
      for (const auto& v : p.values) {
        if (v < 0) throw validation_error("permutation value is negative");
      }
      break;
    case MapPiece::Kind::Reverse:
      break;
  }
}

}  // namespace

IndexMap::IndexMap(Generator gen, json descriptor)
    : gen_(std::make_shared<const Generator>(std::move(gen))), descriptor_(std::move(descriptor)) {}

IndexMap IndexMap::identity() {
  return IndexMap([](std::size_t) -> std::optional<MapPiece> { return std::nullopt; }, json{{"kind", "identity"}});
}

IndexMap IndexMap::from_pieces(std::vector<MapPiece> pieces, json descriptor) {
  std::sort(pieces.begin(), pieces.end(), [](const MapPiece& a, const MapPiece& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    validate_piece(pieces[i]);
    if (i > 0 && pieces[i].lo < pieces[i - 1].hi) throw validation_error("map pieces overlap");
  }
  auto shared = std::make_shared<const std::vector<MapPiece>>(std::move(pieces));
  return IndexMap(
      [shared](std::size_t i) -> std::optional<MapPiece> {
        if (i >= shared->size()) return std::nullopt;
        return (*shared)[i];
      },
      std::move(descriptor));
}

std::vector<MapPiece> IndexMap::pieces_in(const Integer& lo, const Integer& hi) const {
  std::vector<MapPiece> out;
  Integer prev_hi = 0;
  for (std::size_t i = 0;; ++i) {
    if (i > kMaxPieceScan) throw scan_bound_error("index map piece scan exceeded its bound");
    auto p = (*gen_)(i);
    if (!p || p->lo >= hi) break;
    validate_piece(*p);
    if (p->lo < prev_hi) throw validation_error("map pieces overlap or are out of order");
    prev_hi = p->hi;
    if (p->hi > lo) out.push_back(std::move(*p));
  }
  return out;
}

Integer IndexMap::operator()(const Integer& i) const {
  if (i < 0) throw validation_error("index maps are defined on the naturals");
  auto ps = pieces_in(i, i + 1);
  if (ps.empty()) return i;
  return ps.front().apply(i);
}

Integer IndexMap::preimage_count(const OmegaSubset& a, const Integer& lo, const Integer& hi) const {
  if (hi <= lo) return 0;
  Integer total = 0;
  Integer pos = lo;
  for (const auto& p : pieces_in(lo, hi)) {
    Integer x = std::max(lo, p.lo), y = std::min(hi, p.hi);
    if (pos < x) total += a.count_in(pos, x);
    switch (p.kind) {
      case MapPiece::Kind::Translate:
        total += a.count_in(x + p.offset, y + p.offset);
        break;
      case MapPiece::Kind::Reverse:
        total += a.count_in(p.lo + p.hi - y, p.lo + p.hi - x);
        break;
      case MapPiece::Kind::Fold: {
        Integer full = a.count_in(p.target, p.target + p.width);
        // positions in [p.lo, z) landing in a
        auto upto = [&](const Integer& z) -> Integer {
          Integer t = z - p.lo;
          Integer q = floor_div(t, p.width);
          Integer r = t - q * p.width;
          return q * full + a.count_in(p.target, p.target + r);
        };
        total += upto(y) - upto(x);
        break;
      }
      case MapPiece::Kind::Permutation:
        for (Integer i = x; i < y; ++i) {
          if (a.contains(p.apply(i))) ++total;
        }
        break;
    }
    pos = y;
  }
  if (pos < hi) total += a.count_in(pos, hi);
  return total;
}

Integer IndexMap::preimage_count_point(const Integer& a, const Integer& lo, const Integer& hi) const {
  if (hi <= lo) return 0;
  Integer total = 0;
  Integer pos = lo;
  auto in = [](const Integer& v, const Integer& x, const Integer& y) { return x <= v && v < y; };
  for (const auto& p : pieces_in(lo, hi)) {
    Integer x = std::max(lo, p.lo), y = std::min(hi, p.hi);
    if (in(a, pos, x)) ++total;
    switch (p.kind) {
      case MapPiece::Kind::Translate:
        if (in(a - p.offset, x, y)) ++total;
        break;
      case MapPiece::Kind::Reverse:
        if (in(p.lo + p.hi - 1 - a, x, y)) ++total;
        break;
      case MapPiece::Kind::Fold:
        if (in(a, p.target, p.target + p.width)) total += count_congruent(x, y, p.lo + (a - p.target), p.width);
        break;
      case MapPiece::Kind::Permutation:
        for (Integer i = x; i < y; ++i) {
          if (p.apply(i) == a) ++total;
        }
        break;
    }
    pos = y;
  }
  if (in(a, pos, hi)) ++total;
  return total;
}

bool IndexMap::permutes(const Integer& lo, const Integer& hi) const {
  std::set<Integer> seen;
  for (Integer i = lo; i < hi; ++i) {
    Integer v = (*this)(i);
    if (v < lo || v >= hi || !seen.insert(v).second) return false;
  }
  return true;
}

json to_json(const MapPiece& p) {
  json j{{"lo", integer_json(p.lo)}, {"hi", integer_json(p.hi)}};
  switch (p.kind) {
    case MapPiece::Kind::Translate:
      j["kind"] = "translate";
      j["offset"] = integer_json(p.offset);
      break;
    case MapPiece::Kind::Reverse:
      j["kind"] = "reverse";
      break;
    case MapPiece::Kind::Fold:
      j["kind"] = "fold";
      j["target"] = integer_json(p.target);
      j["width"] = integer_json(p.width);
      break;
    case MapPiece::Kind::Permutation: {
      j["kind"] = "permutation";
      json v = json::array();
      for (const auto& x : p.values) v.push_back(integer_json(x));
      j["values"] = v;
      break;
    }
  }
  return j;
}

MapPiece map_piece_from_json(const json& j) {
  std::string kind = require(j, "kind").get<std::string>();
  Integer lo = json_integer(require(j, "lo"));
  if (kind == "permutation") {
    std::vector<Integer> values;
    for (const auto& v : require(j, "values")) values.push_back(json_integer(v));
    return MapPiece::permutation(lo, std::move(values));
  }
  Integer hi = json_integer(require(j, "hi"));
  if (kind == "translate") return MapPiece::translate(lo, hi, json_integer(require(j, "offset")));
  if (kind == "reverse") return MapPiece::reverse(lo, hi);
  if (kind == "fold") return MapPiece::fold(lo, hi, json_integer(require(j, "target")), json_integer(require(j, "width")));
  throw validation_error("unknown map piece kind '" + kind + "'");
}

namespace index_maps {

IndexMap reverse_blocks(std::function<std::optional<Interval>(std::size_t)> blocks, json descriptor) {
  return IndexMap(
      [blocks](std::size_t i) -> std::optional<MapPiece> {
        auto b = blocks(i);
        if (!b) return std::nullopt;
        return MapPiece::reverse(b->lo, b->hi);
      },
      std::move(descriptor));
}

IndexMap shift_blocks_up(std::function<std::optional<Interval>(std::size_t)> blocks, json descriptor) {
  return IndexMap(
      [blocks](std::size_t i) -> std::optional<MapPiece> {
        auto b = blocks(i);
        if (!b) return std::nullopt;
        return MapPiece::translate(b->lo, b->hi, b->length());
      },
      std::move(descriptor));
}

}  // namespace index_maps

}  // namespace densideal
