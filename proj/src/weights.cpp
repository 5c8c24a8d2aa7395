#include "densideal/weights.hpp"

#include <algorithm>

#include <mpfr.h>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

WeightFunction::WeightFunction(Evaluator eval, json descriptor, std::optional<HCertificate> cert,
                               std::optional<Integer> domain_end)
    : impl_(std::make_shared<const Impl>(
          Impl{std::move(eval), std::move(descriptor), std::move(cert), std::move(domain_end)})) {}

Integer WeightFunction::operator()(const Integer& n) const {
  if (n < 0) throw validation_error("weight evaluated at negative position");
  if (impl_->domain_end && n >= *impl_->domain_end) {
    throw validation_error("weight table is defined only below " + to_string(*impl_->domain_end) + ", asked for " +
                           to_string(n));
  }
  return impl_->eval(n);
}

namespace weights {

WeightFunction affine(const Integer& a, const Integer& b, const Integer& c) {
  if (a < 0 || b < 0 || c < 1) throw validation_error("affine weight needs a, b >= 0 and c >= 1");
  json d{{"kind", "affine"}, {"a", integer_json(a)}, {"b", integer_json(b)}, {"c", integer_json(c)}};
  std::optional<HCertificate> cert;
  if (a > 0) {
    // g(n) <= (a n + b + c)/c, so n/g(n) >= c/(a+b+c) for n >= 1
    cert = HCertificate{make_rational(c, a + b + c), [](std::size_t j) -> Integer { return Integer(static_cast<unsigned long>(j + 1)); },
                        json{{"kind", "linear"}, {"step", "1"}, {"start", "1"}}};
  }
  return WeightFunction([a, b, c](const Integer& n) -> Integer { return floor_div(a * n + b, c) + 1; }, d, cert);
}

WeightFunction constant(const Integer& value) {
  if (value < 1) throw validation_error("constant weight must be >= 1");
  return WeightFunction([value](const Integer&) -> Integer { return value; },
                        json{{"kind", "constant"}, {"value", integer_json(value)}});
}

WeightFunction log_floor(const Integer& base, const Integer& shift) {
  if (base < 2 || shift < 1) throw validation_error("log_floor needs base >= 2 and shift >= 1");
  json d{{"kind", "log_floor"}, {"base", integer_json(base)}, {"shift", integer_json(shift)}};
  return WeightFunction(
      [base, shift](const Integer& n) -> Integer {
        Integer x = n + shift;
        Integer p = base;
        Integer e = 0;
        while (p <= x) {
          p *= base;
          ++e;
        }
        return e + 1;
      },
      d);
}

WeightFunction root_floor(unsigned long r) {
  if (r < 1) throw validation_error("root_floor needs r >= 1");
  json d{{"kind", "root_floor"}, {"r", std::to_string(r)}};
  return WeightFunction(
      [r](const Integer& n) -> Integer {
        Integer out;
        mpz_root(out.get_mpz_t(), n.get_mpz_t(), r);
        return out + 1;
      },
      d);
}

std::optional<Integer> PlateauBase::at(std::size_t i) const {
  if (explicit_values) {
    if (i >= explicit_values->size()) return std::nullopt;
    return (*explicit_values)[i];
  }
  return factorial(i + factorial_shift);
}

json PlateauBase::to_json() const {
  if (explicit_values) {
    json arr = json::array();
    for (const auto& v : *explicit_values) arr.push_back(integer_json(v));
    return json{{"kind", "list"}, {"values", arr}};
  }
  return json{{"kind", "factorial"}, {"shift", std::to_string(factorial_shift)}};
}

WeightFunction plateau(const PlateauBase& base, const OmegaSubset& indices) {
  if (base.explicit_values) {
    const auto& v = *base.explicit_values;
    if (v.empty()) throw validation_error("plateau base list is empty");
    if (v[0] < 1) throw validation_error("plateau base must start at a positive value");
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (v[i + 1] <= v[i] || v[i + 1] <= Integer(static_cast<unsigned long>(i)) * v[i]) {
        throw validation_error("plateau base violates n_{i+1} > i*n_i at i=" + std::to_string(i));
      }
    }
  }
  json d{{"kind", "plateau_fL"}, {"base", base.to_json()}, {"L", indices.descriptor()}};
  std::optional<HCertificate> cert;
  if (!base.explicit_values) {
    // every base point n_i with i >= 1 lies outside all plateaus, so f_L(n_i) = n_i
    cert = HCertificate{Rational(1), [base](std::size_t j) -> Integer { return *base.at(j + 1); },
                        json{{"kind", "base_points"}, {"from_index", "1"}}};
  }
  return WeightFunction(
      [base, indices](const Integer& n) -> Integer {
        if (n < 1) return 1;
        // largest i with n_i < n; plateaus are disjoint because n_{i+1} > i * n_i
        std::optional<std::size_t> found;
        for (std::size_t i = 0;; ++i) {
          auto ni = base.at(i);
          if (!ni || *ni >= n) break;
          found = i;
        }
        if (found) {
          Integer top = Integer(static_cast<unsigned long>(*found)) * *base.at(*found);
          if (n <= top && indices.contains(Integer(static_cast<unsigned long>(*found)))) return top;
        }
        return n;
      },
      d, cert);
}

WeightFunction table(std::vector<TableRun> runs, json extra) {
  if (runs.empty()) throw validation_error("weight table has no runs");
  Integer expect = 0;
  Integer last = 1;
  json arr = json::array();
  for (const auto& r : runs) {
    if (r.lo != expect || r.hi <= r.lo) throw validation_error("weight table runs must tile [0, end) in order");
    if (r.value < last) throw validation_error("weight table values must be nondecreasing and >= 1");
    expect = r.hi;
    last = r.value;
    arr.push_back(json::array({integer_json(r.lo), integer_json(r.hi), integer_json(r.value)}));
  }
  json d = extra.is_object() ? extra : json::object();
  d["kind"] = "table";
  d["runs"] = arr;
  Integer end = runs.back().hi;
  auto shared = std::make_shared<const std::vector<TableRun>>(std::move(runs));
  return WeightFunction(
      [shared](const Integer& n) -> Integer {
        auto it = std::upper_bound(shared->begin(), shared->end(), n,
                                   [](const Integer& x, const TableRun& r) { return x < r.lo; });
        return std::prev(it)->value;
      },
      d, std::nullopt, end);
}

WeightFunction scaled(const Integer& factor, const WeightFunction& g) {
  if (factor < 1) throw validation_error("scale factor must be >= 1");
  json d{{"kind", "scaled"}, {"factor", integer_json(factor)}, {"of", g.descriptor()}};
  std::optional<HCertificate> cert;
  if (g.certificate()) {
    cert = *g.certificate();
    cert->c /= Rational(factor);
  }
  return WeightFunction([factor, g](const Integer& n) -> Integer { return factor * g(n); }, d, cert, g.domain_end());
}

}  // namespace weights

std::optional<WeightViolation> check_weight(const WeightFunction& g, const Integer& upto) {
  Integer end = upto;
  if (g.domain_end() && *g.domain_end() < end) end = *g.domain_end();
  if (end <= 0) return std::nullopt;
  Integer prev = g(0);
  if (prev < 1) return WeightViolation{0, "value below 1"};
  for (Integer n = 1; n < end; ++n) {
    Integer v = g(n);
    if (v < prev) return WeightViolation{n, "decreases from " + to_string(prev) + " to " + to_string(v)};
    prev = v;
  }
  return std::nullopt;
}

std::optional<std::string> check_certificate(const WeightFunction& g, std::size_t count) {
  const auto& cert = g.certificate();
  if (!cert) return "no certificate attached";
  if (cert->c <= 0) return "certificate constant must be positive";
  std::optional<Integer> prev;
  for (std::size_t j = 0; j < count; ++j) {
    Integer n = cert->witness(j);
    if (prev && n <= *prev) return "witnesses not strictly increasing at j=" + std::to_string(j);
    if (n < 1 || Rational(n, g(n)) < cert->c) {
      return "witness n=" + to_string(n) + " has n/g(n) below " + to_string(cert->c);
    }
    prev = n;
  }
  return std::nullopt;
}

std::optional<std::string> h_membership_warning(const WeightFunction& g) {
  if (g.certificate()) return std::nullopt;
  return "warning: weight " + g.descriptor().value("kind", std::string("?")) +
         " carries no certificate that n/g(n) stays away from 0; results assume it does";
}

Rational partial_density(const OmegaSubset& a, const WeightFunction& g, const Integer& n) {
  if (n < 1) throw validation_error("partial density needs n >= 1");
  return make_rational(a.prefix_count(n), g(n));
}

Comparison compare(const TaggedRational& x, const Rational& y) {
  if (x.hi < y) return Comparison::Less;
  if (x.lo > y) return Comparison::Greater;
  if (x.exact() && x.lo == y) return Comparison::Equal;
  return Comparison::Inconclusive;
}

namespace {

// Rounds an enclosure outward to kLogFractionalBits fractional bits.
TaggedRational to_grid(const Rational& lo, const Rational& hi) {
  Integer scale = pow2(kLogFractionalBits);
  Integer l = floor_of(lo * Rational(scale));
  Integer h = ceil_of(hi * Rational(scale));
  return TaggedRational{make_rational(l, scale), make_rational(h, scale)};
}

Rational mpfr_log1p_bound(const Integer& x, mpfr_rnd_t rnd) {
  Integer arg = x + 1;
  mpfr_prec_t prec = static_cast<mpfr_prec_t>(mpz_sizeinbase(arg.get_mpz_t(), 2) + kLogFractionalBits + 32);
  mpfr_t a;
  mpfr_init2(a, prec);
  mpfr_set_z(a, arg.get_mpz_t(), rnd);
  mpfr_log(a, a, rnd);
  Rational out;
  mpfr_get_q(out.get_mpq_t(), a);
  mpfr_clear(a);
  return out;
}

}  // namespace

ModulusFunction ModulusFunction::identity() {
  return ModulusFunction([](const Integer& x) { return TaggedRational{Rational(x), Rational(x)}; },
                         json{{"kind", "identity"}});
}

ModulusFunction ModulusFunction::log1p() {
  return ModulusFunction(
      [](const Integer& x) {
        if (x == 0) return TaggedRational{Rational(0), Rational(0)};
        return to_grid(mpfr_log1p_bound(x, MPFR_RNDD), mpfr_log1p_bound(x, MPFR_RNDU));
      },
      json{{"kind", "log1p"}, {"fractional_bits", kLogFractionalBits}});
}

ModulusFunction ModulusFunction::power(const Rational& alpha) {
  if (alpha <= 0 || alpha > 1) throw validation_error("power modulus needs 0 < alpha <= 1");
  Integer p = alpha.get_num();
  Integer q = alpha.get_den();
  if (!p.fits_ulong_p() || !q.fits_ulong_p() || q > 4096) throw validation_error("power modulus exponent too large");
  unsigned long pu = p.get_ui(), qu = q.get_ui();
  return ModulusFunction(
      [pu, qu](const Integer& x) {
        Integer xp = pow_int(x, pu);
        Integer r;
        if (mpz_root(r.get_mpz_t(), xp.get_mpz_t(), qu) != 0) return TaggedRational{Rational(r), Rational(r)};
        Integer scale = pow2(kLogFractionalBits);
        Integer scaled = xp * pow_int(scale, qu);
        Integer s;
        mpz_root(s.get_mpz_t(), scaled.get_mpz_t(), qu);
        return TaggedRational{make_rational(s, scale), make_rational(s + 1, scale)};
      },
      json{{"kind", "power"}, {"alpha", rational_json(alpha)}, {"fractional_bits", kLogFractionalBits}});
}

TaggedRational ModulusFunction::operator()(const Integer& x) const {
  if (x < 0) throw validation_error("modulus function evaluated at a negative argument");
  return f_(x);
}

TaggedRational modulus_density(const OmegaSubset& a, const WeightFunction& g, const ModulusFunction& f,
                               const Integer& n) {
  if (n < 1) throw validation_error("modulus density needs n >= 1");
  TaggedRational top = f(a.prefix_count(n));
  TaggedRational bottom = f(g(n));
  if (bottom.lo <= 0) throw validation_error("modulus of g(n) is not positive");
  return TaggedRational{top.lo / bottom.hi, top.hi / bottom.lo};
}

void validate_checkpoints(const std::vector<Integer>& checkpoints, bool need_positive) {
  if (checkpoints.empty()) throw validation_error("checkpoint list is empty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < (need_positive ? 1 : 0)) throw validation_error("checkpoint out of range");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) throw validation_error("checkpoints must be increasing");
  }
}

std::size_t DensityProfile::final_window_start() const {
  std::size_t s = values.size();
  std::size_t w = (s + 3) / 4;
  if (w == 0) w = 1;
  return s > w ? s - w : 0;
}

ProfileSummary DensityProfile::summary() const {
  if (values.empty()) throw validation_error("empty profile has no summary");
  ProfileSummary out{values[0], values[final_window_start()], values.back()};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > out.max) out.max = values[i];
    if (i >= final_window_start() && values[i] > out.final_window_max) out.final_window_max = values[i];
  }
  return out;
}

DensityProfile ratio_profile(const WeightFunction& g, const std::vector<Integer>& checkpoints) {
  validate_checkpoints(checkpoints, false);
  DensityProfile p{checkpoints, {}, {}};
  for (const auto& n : checkpoints) p.values.push_back(make_rational(n, g(n)));
  return p;
}

DensityProfile density_profile(const OmegaSubset& a, const WeightFunction& g, const std::vector<Integer>& checkpoints) {
  validate_checkpoints(checkpoints, true);
  DensityProfile p{checkpoints, {}, {}};
  for (const auto& n : checkpoints) p.values.push_back(partial_density(a, g, n));
  return p;
}

DensityProfile modulus_profile(const OmegaSubset& a, const WeightFunction& g, const ModulusFunction& f,
                               const std::vector<Integer>& checkpoints) {
  validate_checkpoints(checkpoints, true);
  DensityProfile p{checkpoints, {}, {}};
  for (const auto& n : checkpoints) {
    auto v = modulus_density(a, g, f, n);
    p.values.push_back(v.lo);
    p.upper.push_back(v.hi);
  }
  return p;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::TrendZero: return "TrendZero";
    case Trend::WitnessAboveDelta: return "WitnessAboveDelta";
    case Trend::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify(DensityProfile profile, const Rational& delta, const Rational& threshold) {
  if (delta <= 0) throw validation_error("delta must be positive");
  if (threshold < 0) throw validation_error("trend threshold must be nonnegative");
  Verdict v;
  v.delta = delta;
  v.threshold = threshold;
  std::size_t start = profile.final_window_start();
  for (std::size_t i = start; i < profile.values.size(); ++i) {
    if (profile.values[i] >= delta) v.witnesses.push_back(i);
  }
  if (!v.witnesses.empty()) {
    v.classification = Trend::WitnessAboveDelta;
  } else {
    // for enclosures the upper ends decide TrendZero
    const auto& tops = profile.upper.empty() ? profile.values : profile.upper;
    Rational m = tops[start];
    for (std::size_t i = start; i < tops.size(); ++i) m = std::max(m, tops[i]);
    v.classification = m <= threshold ? Trend::TrendZero : Trend::Inconclusive;
  }
  v.evidence = std::move(profile);
  return v;
}

Verdict verdict(const OmegaSubset& a, const WeightFunction& g, const std::vector<Integer>& checkpoints,
                const Rational& delta, const Rational& threshold) {
  return classify(density_profile(a, g, checkpoints), delta, threshold);
}

json to_json(const DensityProfile& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    json row{{"n", integer_json(p.checkpoints[i])}, {"value", rational_json(p.values[i])}};
    if (!p.upper.empty()) row["upper"] = rational_json(p.upper[i]);
    rows.push_back(row);
  }
  json out{{"points", rows}};
  if (!p.values.empty()) {
    auto s = p.summary();
    out["summary"] = {{"max", rational_json(s.max)},
                      {"final_window_max", rational_json(s.final_window_max)},
                      {"final", rational_json(s.final)},
                      {"final_window_start", p.final_window_start()}};
  }
  if (!p.upper.empty()) out["enclosure_fractional_bits"] = kLogFractionalBits;
  return out;
}

json to_json(const Verdict& v) {
  json w = json::array();
  for (auto i : v.witnesses) {
    const Rational& q = v.evidence.values[i];
    w.push_back(json::array({integer_json(v.evidence.checkpoints[i]), integer_json(q.get_num()), integer_json(q.get_den())}));
  }
  return json{{"classification", to_string(v.classification)},
              {"delta", rational_json(v.delta)},
              {"threshold", rational_json(v.threshold)},
              {"witnesses", w},
              {"evidence", to_json(v.evidence)}};
}

}  // namespace densideal
