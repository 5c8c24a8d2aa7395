#pragma once

#include <optional>
#include <string>
#include <vector>

#include "densideal/index_map.hpp"
#include "densideal/measures.hpp"
#include "densideal/weights.hpp"

namespace densideal {

// Probes report evidence at a finite horizon; they never decide membership.
enum class Evidence { None, Counterexample, NotAUD };
std::string to_string(Evidence e);

struct ProbeWitness {
  Integer n;  // block label or position, per probe
  Rational value;
};

struct IncreasingInvarianceReport {
  Integer horizon;                        // positions below this are inspected
  std::optional<std::uint64_t> last_label;  // last block with span inside the horizon
  Rational delta;
  DominationResult domination;  // |C ∩ n| <= |B ∩ n|
  Verdict b_verdict;            // on mu_n(B), block labels as checkpoints
  Verdict c_verdict;
  Evidence classification = Evidence::None;
  std::vector<ProbeWitness> witnesses;  // final-window blocks with mu_n(C) >= delta
};

// Counterexample evidence: C is dominated by B, B's masses trend to 0 and C keeps mass >= delta.
IncreasingInvarianceReport increasing_invariance_probe(const MeasureSequence& m, const OmegaSubset& b,
                                                       const OmegaSubset& c, const Integer& horizon,
                                                       const Rational& delta);

struct AudLevel {
  Integer m;
  std::size_t blocks = 0;
  // (⋆) holds on every block with label in (tail_after, N]; nullopt tail_after means on all blocks.
  bool passes_everywhere = false;
  std::optional<std::uint64_t> tail_after;
  std::size_t tail_blocks = 0;
  bool covers_final_window = false;
  std::optional<std::pair<std::uint64_t, Integer>> last_violation;  // (label, k), k = 0 for a light point
};

struct AudReport {
  std::uint64_t horizon = 0;  // block label N
  Rational delta;
  std::vector<AudLevel> levels;
  Verdict b_verdict;
  Evidence classification = Evidence::None;
  std::vector<ProbeWitness> witnesses;  // final-window blocks with mu_n(B) >= delta
};

// Not-AUD evidence: B passes (⋆) at every level of the grid on a tail covering the final window,
// yet mu_n(B) >= delta there.
AudReport aud_probe(const MeasureSequence& m, const OmegaSubset& b, const std::vector<Integer>& m_grid,
                    std::uint64_t horizon, const Rational& delta = Rational(1, 2));

struct ZSubsetReport {
  DensityProfile asymptotic;  // |A ∩ n| / n
  DensityProfile weighted;    // |A ∩ n| / g(n)
  DensityProfile link;        // g(n) / n, so weighted * link = asymptotic
};
ZSubsetReport z_subset_probe(const WeightFunction& g, const OmegaSubset& a, const std::vector<Integer>& checkpoints);

struct KatetovStep {
  std::size_t n = 0;
  Integer m;
  Integer f_m;
  Interval interval;  // I_n = (f(m_n), (2n+2) f(m_n)] as [f+1, (2n+2)f+1)
  Integer above;      // |B_n|: images past max I_n
  Integer inside;     // |C_n|
  Integer below;      // |D_n|
  std::vector<int> cases;
};

struct KatetovCheck {
  std::size_t n = 0;     // the selected block n_j
  Rational value;        // |phi^{-1}[A] ∩ m_{n_j}| / f(m_{n_j})
  Rational bound;        // 1/3 (Case 2) or 1/2
  Integer worst_point;   // checkpoint i with the largest |A ∩ i| / i relative to its bound
  Rational worst_ratio;
  Rational worst_bound;
  std::size_t density_points = 0;
};

struct KatetovResult {
  int chosen_case = 0;
  std::vector<KatetovStep> log;
  std::vector<Integer> points;  // A, sorted
  OmegaSubset a;
  std::vector<KatetovCheck> checks;
  std::optional<std::string> note;  // e.g. Case 3 stopping early
};

// Validates m_n / f(m_n) > 2n+3 and (2n+2) f(m_n) < f(m_{n+1}) exactly for the whole list,
// classifies n = 0..horizon, and builds A for the case holding at the most n (ties: lower case).
// Every certified inequality is checked before returning; a failure is a certification_error.
KatetovResult katetov_witness(const WeightFunction& f, const IndexMap& phi, const std::vector<Integer>& m_seq,
                              std::size_t horizon);

json to_json(const IncreasingInvarianceReport& r);
json to_json(const AudReport& r);
json to_json(const ZSubsetReport& r);
json to_json(const KatetovResult& r);

}  // namespace densideal
