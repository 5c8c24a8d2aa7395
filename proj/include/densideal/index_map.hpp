#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "densideal/numeric.hpp"
#include "densideal/sets.hpp"

namespace densideal {

// One rule of a piecewise map on [lo, hi); the map is the identity off its pieces.
struct MapPiece {
  enum class Kind { Translate, Reverse, Fold, Permutation };

  Kind kind = Kind::Translate;
  Integer lo;
  Integer hi;
  Integer offset;               // Translate: i -> i + offset
  Integer target;               // Fold: i -> target + (i - lo) mod width
  Integer width;
  std::vector<Integer> values;  // Permutation: i -> values[i - lo]

  static MapPiece translate(Integer lo, Integer hi, Integer offset);
  static MapPiece reverse(Integer lo, Integer hi);
  static MapPiece fold(Integer lo, Integer hi, Integer target, Integer width);
  static MapPiece permutation(Integer lo, std::vector<Integer> values);

  Integer apply(const Integer& i) const;
  bool operator==(const MapPiece&) const = default;
};

class IndexMap {
 public:
  // Pieces by index, ordered and disjoint, nullopt once exhausted.
  using Generator = std::function<std::optional<MapPiece>(std::size_t)>;

  IndexMap(Generator gen, json descriptor);
  static IndexMap identity();
  static IndexMap from_pieces(std::vector<MapPiece> pieces, json descriptor = json{{"kind", "explicit"}});

  Integer operator()(const Integer& i) const;
  // |{i in [lo, hi) : map(i) in a}|
  Integer preimage_count(const OmegaSubset& a, const Integer& lo, const Integer& hi) const;
  // |{i in [lo, hi) : map(i) = a}|
  Integer preimage_count_point(const Integer& a, const Integer& lo, const Integer& hi) const;
  // Pieces meeting [lo, hi), in order.
  std::vector<MapPiece> pieces_in(const Integer& lo, const Integer& hi) const;
  // True when the map is a bijection of [lo, hi) onto itself (checked pointwise, so keep windows small).
  bool permutes(const Integer& lo, const Integer& hi) const;
  const json& descriptor() const { return descriptor_; }

 private:
  std::shared_ptr<const Generator> gen_;
  json descriptor_;
};

json to_json(const MapPiece& p);
MapPiece map_piece_from_json(const json& j);

namespace index_maps {

// Reverses each interval of the family.
IndexMap reverse_blocks(std::function<std::optional<Interval>(std::size_t)> blocks, json descriptor);
// Moves each interval of the family up by its own length.
IndexMap shift_blocks_up(std::function<std::optional<Interval>(std::size_t)> blocks, json descriptor);

}  // namespace index_maps

}  // namespace densideal
