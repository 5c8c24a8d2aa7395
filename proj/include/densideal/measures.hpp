#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densideal/numeric.hpp"
#include "densideal/sets.hpp"
#include "densideal/weights.hpp"

namespace densideal {

// Every position in [lo, hi) carries the atom `weight` > 0.
struct WeightPiece {
  Integer lo;
  Integer hi;
  Rational weight;

  Integer length() const { return hi - lo; }
  bool operator==(const WeightPiece&) const = default;
};

struct MeasureBlock {
  std::uint64_t label = 0;
  // Declared block D_n. d = |span|; positions of span outside the pieces have measure 0.
  Interval span;
  std::vector<WeightPiece> pieces;

  Integer d() const { return span.length(); }
  Integer support_size() const;
  Rational total_mass() const;
  Rational max_atom() const;
  Rational atom(const Integer& pos) const;
  Rational mass(const OmegaSubset& a) const;
  // The support as a set.
  OmegaSubset support() const;
  bool operator==(const MeasureBlock&) const = default;
};

// Throws validation_error unless pieces are nonempty, ordered, disjoint, inside span, with weight > 0.
void validate_block(const MeasureBlock& b);

// Bucket index k >= 1 with k/d <= w < (k+1)/d, or 0 when w < 1/d.
Integer heavy_bucket(const Rational& w, const Integer& d);
// Bucket index k >= 1 with 1/((k+1)d) <= w < 1/(kd), or 0 when w >= 1/d.
Integer light_bucket(const Rational& w, const Integer& d);

struct MeasureFlags {
  bool consecutive = false;   // spans abut
  bool probability = false;   // total mass 1
  bool covers_omega = false;  // first span starts at 0 and spans abut
  bool support_is_span = false;
  bool nonincreasing = false;  // atoms nonincreasing by position inside each block
  bool doubling = false;       // d_{i+1} >= 2 d_i

  json to_json() const;
};

class MeasureSequence {
 public:
  // Index-addressed (0-based) block, nullopt once the sequence has ended.
  // Labels are strictly increasing with the index.
  using Generator = std::function<std::optional<MeasureBlock>(std::size_t)>;

  MeasureSequence(Generator gen, MeasureFlags flags, json descriptor);
  static MeasureSequence from_blocks(std::vector<MeasureBlock> blocks, MeasureFlags flags, json descriptor);

  std::optional<MeasureBlock> try_block(std::size_t index) const;
  // Throws validation_error past the end.
  MeasureBlock block(std::size_t index) const;
  const MeasureFlags& flags() const { return flags_; }
  const json& descriptor() const { return descriptor_; }

  // Blocks with lo < label <= hi, in order, with ordering between blocks checked.
  std::vector<MeasureBlock> blocks_in(std::optional<std::uint64_t> lo, std::uint64_t hi) const;
  std::vector<MeasureBlock> blocks_upto(std::uint64_t hi) const { return blocks_in(std::nullopt, hi); }
  std::vector<MeasureBlock> first_blocks(std::size_t count) const;
  std::optional<MeasureBlock> by_label(std::uint64_t label) const;

 private:
  std::shared_ptr<const Generator> gen_;
  MeasureFlags flags_;
  json descriptor_;
};

// Checks the declared flags on the first `count` blocks; returns a message on the first failure.
std::optional<std::string> check_flags(const MeasureSequence& m, std::size_t count);

Rational block_mass(const MeasureBlock& mu, const OmegaSubset& a);

struct ExhProfile {
  DensityProfile profile;  // checkpoints are block labels
  std::vector<Rational> running_sup;
};
ExhProfile exh_profile(const MeasureSequence& m, const OmegaSubset& a, std::uint64_t upto);

struct FarahReport {
  Rational d1;                 // sup of total masses
  bool d1_growing = false;     // the final window exceeds every earlier mass
  DensityProfile d2;           // max atom per block
  Trend d2_trend = Trend::Inconclusive;
  Rational d3;                 // max total mass over the final window
  bool d3_positive = false;    // d3 above the trend threshold
  Rational threshold;
};
FarahReport farah_check(const MeasureSequence& m, std::uint64_t upto,
                        const Rational& threshold = kDefaultTrendThreshold);

// sup over blocks with label <= upto and atoms of d * atom.
Rational bounded_ratio_stat(const MeasureSequence& m, std::uint64_t upto);

struct SigmaEntry {
  Integer k;
  Integer count;
  Rational sigma;
};
struct SigmaProfile {
  std::uint64_t label = 0;
  Integer d;
  std::vector<SigmaEntry> buckets;  // nonempty buckets, k ascending
  Integer light_count;               // points of B in the support with atom < 1/d

  Rational max_sigma() const;
};
SigmaProfile sigma_profile(const MeasureBlock& mu, const OmegaSubset& b);
SigmaProfile sigma_profile(const MeasureSequence& m, const OmegaSubset& b, std::uint64_t label);

struct StarParameters {
  Integer m;
  std::uint64_t lo = 0;  // range is lo < label <= hi
  std::uint64_t hi = 0;
};
struct StarResult {
  bool holds = true;
  // (label, k); k = 0 marks the clause on points lighter than 1/d.
  std::optional<std::pair<std::uint64_t, Integer>> first_violation;
  std::size_t blocks_checked = 0;
};
// Evaluated twice, through bucket counts and through max sigma; disagreement is a certification_error.
StarResult star_condition_check(const MeasureSequence& m, const OmegaSubset& b, const StarParameters& p);
bool star_holds_on_block(const MeasureBlock& mu, const OmegaSubset& b, const Integer& level,
                         std::optional<Integer>* failing_k = nullptr);

json to_json(const MeasureBlock& b);
json to_json(const SigmaProfile& s);
json to_json(const FarahReport& r);
json to_json(const ExhProfile& p);
json to_json(const StarResult& r);

namespace measures {

// D_n = [2^{n+1}-2, 2^{n+2}-2), uniform, labels from 0.
MeasureSequence uniform_doubling();
// D_k = (2k!, 3k!] with atom 1/k!, labels from 1.
MeasureSequence eu_blocks();
// D_n as in uniform_doubling, atom 1/2^n on the last 2^n points.
MeasureSequence heavy_last_half();
// Blocks of size n^2 with atom 1/n (mass n), labels from 1.
MeasureSequence growing_mass();
// Size k uniform blocks for labels in (k(k-1)/2, k(k+1)/2], labels from 1.
MeasureSequence triangular_uniform();
// |D_n| = 2 n!, atom 1/n! on the first half (first_half) or the last half.
MeasureSequence factorial_halves(bool first_half);
// n_0 = 1, n_{i+1} = n_i + i! + (i+1)!; D_i = [n_i, n_i + i!) uniform. Only labels in `member`.
MeasureSequence antichain_blocks(const OmegaSubset& member);
Integer antichain_start(std::size_t i);

// Layout and sizes of the bucketed example that is increasing-invariant but not AUD.
std::size_t bucket_depth(std::size_t n);       // least k with (1/n) sum_{i<=k} 1/(i+1) >= 1/2
Integer bucket_block_size(std::size_t n);      // n >= 1
Integer bucket_block_start(std::size_t n);     // n >= 1, D_1 starts at 0
MeasureSequence bucketed();
// [lo, hi) of L^n_k inside D_n for 1 <= k <= depth.
Interval bucket_interval(std::size_t n, std::size_t k);

}  // namespace measures

}  // namespace densideal
