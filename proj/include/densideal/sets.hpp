#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "densideal/numeric.hpp"

namespace densideal {

using json = nlohmann::json;

// Half-open interval [lo, hi) of naturals.
struct Interval {
  Integer lo;
  Integer hi;

  Integer length() const { return hi > lo ? Integer(hi - lo) : Integer(0); }
  bool contains(const Integer& n) const { return lo <= n && n < hi; }
  bool operator==(const Interval&) const = default;
};

// Index j -> j-th block of a block family; nullopt once the family is exhausted.
// Blocks must be nonempty, strictly increasing and pairwise disjoint.
using BlockGenerator = std::function<std::optional<Interval>(std::size_t)>;

// A run [lo, hi) on which membership is decided by position mod `modulus`.
// A full run has modulus 1 and residues {0}.
struct Segment {
  Integer lo;
  Integer hi;
  Integer modulus{1};
  std::vector<Integer> residues{Integer(0)};

  bool is_full() const { return modulus == 1 && residues.size() == 1; }
  bool contains(const Integer& n) const;
  // |{p in [lo, min(x, hi)) : p in segment}|
  Integer count_below(const Integer& x) const;
  Integer count() const { return count_below(hi); }
};

// Upper bound on the combined period of periodic patterns in Boolean combinations.
inline constexpr unsigned long kMaxPatternPeriod = 1ul << 20;

class OmegaSubset {
 public:
  struct Node;

  OmegaSubset();  // the empty set

  static OmegaSubset empty();
  static OmegaSubset omega();
  static OmegaSubset finite(std::vector<Integer> elements);
  // Explicit, finitely many intervals; they are sorted and must be disjoint.
  static OmegaSubset intervals(std::vector<Interval> blocks);
  // Lazily generated block family. `descriptor` is what serialization emits.
  static OmegaSubset blocks(BlockGenerator gen, json descriptor);
  static OmegaSubset periodic(Integer modulus, std::vector<Integer> residues);
  // The tail [from, infinity).
  static OmegaSubset at_least(const Integer& from);
  // Compresses a point list into maximal runs.
  static OmegaSubset from_points(std::vector<Integer> points);

  bool contains(const Integer& n) const;
  // |A ∩ [0, n)|
  Integer prefix_count(const Integer& n) const;
  Integer count_in(const Integer& lo, const Integer& hi) const;
  // A ∩ [0, n) as sorted disjoint segments.
  std::vector<Segment> segments(const Integer& n) const;
  std::vector<Integer> elements_below(const Integer& n, std::size_t cap = 10'000'000) const;
  // j-th smallest element (0-based). Throws scan_bound_error if it lies at or beyond `cap`.
  Integer nth(const Integer& j, const Integer& cap) const;

  const json& descriptor() const;

  friend OmegaSubset set_union(const OmegaSubset& a, const OmegaSubset& b);
  friend OmegaSubset set_intersection(const OmegaSubset& a, const OmegaSubset& b);
  friend OmegaSubset set_difference(const OmegaSubset& a, const OmegaSubset& b);
  friend OmegaSubset set_complement(const OmegaSubset& a);

 private:
  Integer cached_prefix_count(const Integer& n) const;
  explicit OmegaSubset(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

OmegaSubset set_union(const OmegaSubset& a, const OmegaSubset& b);
OmegaSubset set_intersection(const OmegaSubset& a, const OmegaSubset& b);
OmegaSubset set_difference(const OmegaSubset& a, const OmegaSubset& b);
OmegaSubset set_complement(const OmegaSubset& a);

struct DominationResult {
  bool holds = true;
  std::optional<Integer> first_failure;  // least n with |C∩n| > |B∩n|
};

// Checks |C ∩ [0,n)| <= |B ∩ [0,n)| for every n <= horizon. Only segment
// boundaries and one period of each periodic run are inspected.
DominationResult dominates_prefixwise(const OmegaSubset& c, const OmegaSubset& b, const Integer& horizon);

struct SplitResult {
  std::vector<OmegaSubset> classes;  // C_k = {c_{k+i*d} : i >= 1}
  OmegaSubset leftover;              // {c_0, ..., c_{d-1}}
};

// Splits C ∩ [0, horizon) along its increasing enumeration into d classes.
SplitResult split_mod(const OmegaSubset& c, std::size_t d, const Integer& horizon);

}  // namespace densideal
