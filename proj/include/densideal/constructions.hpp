#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densideal/index_map.hpp"
#include "densideal/measures.hpp"
#include "densideal/weights.hpp"

namespace densideal {

inline const Integer kDefaultScanBound{1'000'000'000};

// Blocks [n_k, n_{k+1}) with atom 1/g(n_k), n_0 = 1 and n_{k+1} the least n with g(n) >= 2 g(n_k).
// Throws scan_bound_error when some n_{k+1} would exceed scan_bound.
MeasureSequence measures_from_weight(const WeightFunction& g, std::size_t blocks,
                                     const Integer& scan_bound = kDefaultScanBound);

// Prepends [0, s) with a uniform probability atom when the first span starts at s > 0.
MeasureSequence cover_initial_gap(const MeasureSequence& m, std::size_t blocks);

// Merges consecutive blocks until every block is at least twice the previous one; atoms are averaged.
MeasureSequence doubling_regroup(const MeasureSequence& m, std::size_t blocks,
                                 std::size_t max_inputs = 1'000'000);

struct Rearrangement {
  MeasureSequence measures;
  IndexMap map;  // old position -> new position, fixing every block
};
// Sorts atoms within each block into nonincreasing order; zero-mass positions go last.
Rearrangement monotone_rearrange(const MeasureSequence& m, std::size_t blocks);

struct BucketRun {
  bool heavy = true;  // L bucket when true, R bucket otherwise
  Integer k;
  Integer lo;
  Integer hi;
  Rational h;         // exact
  Integer h_floor;
};

struct SynthesisBlock {
  std::uint64_t label = 0;
  Interval span;
  Integer d;
  std::vector<BucketRun> buckets;
  Interval left;             // L_n, empty for the first block
  Interval right;            // R_n
  Interval next_left;        // L_{n+1}
  Integer r;
  std::string branch;        // "equal", "right-capped" or "left-capped"
  bool single_point = false; // d = 1, where |R_n| <= d/2 cannot hold with R_n nonempty
  std::vector<weights::TableRun> runs;
};

struct WeightSynthesisTrace {
  std::vector<SynthesisBlock> blocks;
};

struct SynthesisResult {
  WeightFunction weight;
  WeightSynthesisTrace trace;
};

// Requires consecutive spans covering omega, probability blocks, span = support,
// nonincreasing atoms and doubling sizes, on the first blocks + 1 blocks.
SynthesisResult weight_from_measures(const MeasureSequence& m, std::size_t blocks);

// Checks the boundary conditions (a)-(d) on a trace; returns the first failure.
std::optional<std::string> check_trace(const WeightSynthesisTrace& trace, const MeasureSequence& m);

struct Lem3Witness {
  std::uint64_t label;
  Integer point;
  Rational value;  // |B ∩ D_n ∩ point| / g(point)
};
struct Lem3Result {
  Rational delta;
  std::vector<Lem3Witness> witnesses;  // one per block reaching delta
};
// Largest delta reached in at least three blocks lying below the horizon.
std::optional<Lem3Result> lem3_witness_scan(const MeasureSequence& m, const WeightFunction& g,
                                            const OmegaSubset& b, const Integer& horizon);

json to_json(const WeightSynthesisTrace& t);
json to_json(const Lem3Result& r);

}  // namespace densideal
