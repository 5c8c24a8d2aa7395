#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "densideal/numeric.hpp"
#include "densideal/sets.hpp"

namespace densideal {

// Witness positions n_j with n_j / g(n_j) >= c, i.e. evidence that n/g(n) does not tend to 0.
struct HCertificate {
  Rational c;
  std::function<Integer(std::size_t)> witness;
  json descriptor;
};

class WeightFunction {
 public:
  using Evaluator = std::function<Integer(const Integer&)>;

  WeightFunction(Evaluator eval, json descriptor, std::optional<HCertificate> cert = std::nullopt,
                 std::optional<Integer> domain_end = std::nullopt);

  // Throws validation_error for n < 0 or n at or beyond domain_end().
  Integer operator()(const Integer& n) const;
  const json& descriptor() const { return impl_->descriptor; }
  const std::optional<HCertificate>& certificate() const { return impl_->cert; }
  // Synthesized tables are defined only on [0, domain_end).
  const std::optional<Integer>& domain_end() const { return impl_->domain_end; }

 private:
  struct Impl {
    Evaluator eval;
    json descriptor;
    std::optional<HCertificate> cert;
    std::optional<Integer> domain_end;
  };
  std::shared_ptr<const Impl> impl_;
};

// Catalog. Every entry is nondecreasing and at least 1.
namespace weights {

// floor((a n + b) / c) + 1 with a, b >= 0 and c >= 1.
WeightFunction affine(const Integer& a, const Integer& b, const Integer& c);
WeightFunction constant(const Integer& value);
// floor(log_base(n + shift)) + 1, shift >= 1.
WeightFunction log_floor(const Integer& base, const Integer& shift);
// floor(n^(1/r)) + 1.
WeightFunction root_floor(unsigned long r);

// Base sequence for plateau weights: n_i = (i + shift)! or an explicit finite list.
struct PlateauBase {
  unsigned long factorial_shift = 1;
  std::optional<std::vector<Integer>> explicit_values;

  std::optional<Integer> at(std::size_t i) const;  // nullopt past the end of an explicit list
  json to_json() const;
};

// f_L(n) = l * n_l on (n_l, l * n_l] for l in L, and n elsewhere (1 at n = 0).
// Requires n_{i+1} > i * n_i; validated on the explicit list or for factorials implicitly.
WeightFunction plateau(const PlateauBase& base, const OmegaSubset& indices);

// Value runs covering [0, end) in order; no tail.
struct TableRun {
  Integer lo;
  Integer hi;
  Integer value;
};
WeightFunction table(std::vector<TableRun> runs, json extra = json::object());

WeightFunction scaled(const Integer& factor, const WeightFunction& g);

}  // namespace weights

struct WeightViolation {
  Integer n;
  std::string what;
};
// Checks g(n) >= 1 and g(n+1) >= g(n) for n < upto.
std::optional<WeightViolation> check_weight(const WeightFunction& g, const Integer& upto);

// Validates the certificate on its first `count` witnesses.
std::optional<std::string> check_certificate(const WeightFunction& g, std::size_t count);
// Message to print when an operation needs g in H but no certificate is attached.
std::optional<std::string> h_membership_warning(const WeightFunction& g);

// |A ∩ n| / g(n), n >= 1.
Rational partial_density(const OmegaSubset& a, const WeightFunction& g, const Integer& n);

// A value known to lie in [lo, hi]; lo == hi when exact.
struct TaggedRational {
  Rational lo;
  Rational hi;
  bool exact() const { return lo == hi; }
};

enum class Comparison { Less, Equal, Greater, Inconclusive };
Comparison compare(const TaggedRational& x, const Rational& y);

class ModulusFunction {
 public:
  static ModulusFunction identity();
  // log(x + 1), enclosed with 64 fractional bits.
  static ModulusFunction log1p();
  // x^(p/q) with 0 < p/q <= 1; integer arguments to an exact-root floor/ceiling enclosure.
  static ModulusFunction power(const Rational& alpha);

  TaggedRational operator()(const Integer& x) const;
  const json& descriptor() const { return descriptor_; }

 private:
  ModulusFunction(std::function<TaggedRational(const Integer&)> f, json d)
      : f_(std::move(f)), descriptor_(std::move(d)) {}
  std::function<TaggedRational(const Integer&)> f_;
  json descriptor_;
};

inline constexpr long kLogFractionalBits = 64;

// f(|A ∩ n|) / f(g(n)) as an enclosure.
TaggedRational modulus_density(const OmegaSubset& a, const WeightFunction& g, const ModulusFunction& f,
                               const Integer& n);

struct ProfileSummary {
  Rational max;
  Rational final_window_max;
  Rational final;
};

struct DensityProfile {
  std::vector<Integer> checkpoints;
  std::vector<Rational> values;
  // Upper ends when values are enclosures; empty for exact profiles.
  std::vector<Rational> upper;

  // Index of the first checkpoint of the final window (last ceil(25%)).
  std::size_t final_window_start() const;
  ProfileSummary summary() const;
};

DensityProfile ratio_profile(const WeightFunction& g, const std::vector<Integer>& checkpoints);
DensityProfile density_profile(const OmegaSubset& a, const WeightFunction& g, const std::vector<Integer>& checkpoints);
DensityProfile modulus_profile(const OmegaSubset& a, const WeightFunction& g, const ModulusFunction& f,
                               const std::vector<Integer>& checkpoints);

enum class Trend { TrendZero, WitnessAboveDelta, Inconclusive };
std::string to_string(Trend t);

inline const Rational kDefaultTrendThreshold{1, 64};

struct Verdict {
  Trend classification = Trend::Inconclusive;
  Rational delta;
  Rational threshold;
  std::vector<std::size_t> witnesses;  // indices into evidence with value >= delta
  DensityProfile evidence;
};

// Witness rule: some final-window value >= delta. Otherwise TrendZero when the
// final-window max is <= threshold. Otherwise Inconclusive.
Verdict classify(DensityProfile profile, const Rational& delta, const Rational& threshold = kDefaultTrendThreshold);
Verdict verdict(const OmegaSubset& a, const WeightFunction& g, const std::vector<Integer>& checkpoints,
                const Rational& delta, const Rational& threshold = kDefaultTrendThreshold);

void validate_checkpoints(const std::vector<Integer>& checkpoints, bool need_positive);

json to_json(const DensityProfile& p);
json to_json(const Verdict& v);

}  // namespace densideal
