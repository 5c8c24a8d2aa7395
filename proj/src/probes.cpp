#include "densideal/probes.hpp"

#include <algorithm>
#include <map>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

std::string to_string(Evidence e) {
  switch (e) {
    case Evidence::Counterexample:
      return "CounterexampleEvidence";
    case Evidence::NotAUD:
      return "NotAUDEvidence";
    case Evidence::None:
      break;
  }
  return "NoEvidence";
}

namespace {

std::vector<ProbeWitness> window_witnesses(const Verdict& v) {
  std::vector<ProbeWitness> out;
  for (auto i : v.witnesses) out.push_back({v.evidence.checkpoints[i], v.evidence.values[i]});
  return out;
}

}  // namespace

IncreasingInvarianceReport increasing_invariance_probe(const MeasureSequence& m, const OmegaSubset& b,
                                                       const OmegaSubset& c, const Integer& horizon,
                                                       const Rational& delta) {
  if (horizon < 1) throw validation_error("horizon must be >= 1");
  IncreasingInvarianceReport r;
  r.horizon = horizon;
  r.delta = delta;
  r.domination = dominates_prefixwise(c, b, horizon);

  DensityProfile pb, pc;
  for (std::size_t i = 0;; ++i) {
    auto blk = m.try_block(i);
    if (!blk || blk->span.hi > horizon) break;
    Integer label = static_cast<unsigned long>(blk->label);
    pb.checkpoints.push_back(label);
    pc.checkpoints.push_back(label);
    pb.values.push_back(blk->mass(b));
    pc.values.push_back(blk->mass(c));
    r.last_label = blk->label;
  }
  if (pb.values.empty()) throw degenerate_input_error("no block lies below the horizon " + to_string(horizon));
  r.b_verdict = classify(std::move(pb), delta);
  r.c_verdict = classify(std::move(pc), delta);
  if (r.domination.holds && r.b_verdict.classification == Trend::TrendZero &&
      r.c_verdict.classification == Trend::WitnessAboveDelta) {
    r.classification = Evidence::Counterexample;
    r.witnesses = window_witnesses(r.c_verdict);
  }
  return r;
}

AudReport aud_probe(const MeasureSequence& m, const OmegaSubset& b, const std::vector<Integer>& m_grid,
                    std::uint64_t horizon, const Rational& delta) {
  if (m_grid.empty()) throw validation_error("aud probe needs at least one level m");
  for (const auto& level : m_grid) {
    if (level < 1) throw validation_error("condition level m must be >= 1");
  }
  auto blocks = m.blocks_upto(horizon);
  if (blocks.empty()) throw degenerate_input_error("no blocks with label <= " + std::to_string(horizon));

  AudReport r;
  r.horizon = horizon;
  r.delta = delta;
  DensityProfile masses;
  for (const auto& blk : blocks) {
    masses.checkpoints.emplace_back(static_cast<unsigned long>(blk.label));
    masses.values.push_back(blk.mass(b));
  }
  std::size_t window = masses.final_window_start();
  r.b_verdict = classify(std::move(masses), delta);

  std::vector<SigmaProfile> sigmas;
  for (const auto& blk : blocks) sigmas.push_back(sigma_profile(blk, b));

  bool all_levels = true;
  for (const auto& level : m_grid) {
    AudLevel lv;
    lv.m = level;
    lv.blocks = blocks.size();
    Rational bound = make_rational(1, level);
    // walk down from N; the tail ends at the last failing block
    std::size_t tail_start = 0;
    for (std::size_t i = blocks.size(); i-- > 0;) {
      std::optional<Integer> k;
      bool by_counts = star_holds_on_block(blocks[i], b, level, &k);
      bool by_sigma = sigmas[i].light_count == 0 && sigmas[i].max_sigma() <= bound;
      if (by_counts != by_sigma) {
        throw certification_error("bucket counts and sigma disagree on block " + std::to_string(blocks[i].label));
      }
      if (!by_counts) {
        lv.tail_after = blocks[i].label;
        lv.last_violation = std::make_pair(blocks[i].label, *k);
        tail_start = i + 1;
        break;
      }
    }
    lv.passes_everywhere = !lv.tail_after;
    lv.tail_blocks = blocks.size() - tail_start;
    lv.covers_final_window = tail_start <= window;
    all_levels = all_levels && lv.covers_final_window;
    r.levels.push_back(lv);
  }
  if (all_levels && r.b_verdict.classification == Trend::WitnessAboveDelta) {
    r.classification = Evidence::NotAUD;
    r.witnesses = window_witnesses(r.b_verdict);
  }
  return r;
}

ZSubsetReport z_subset_probe(const WeightFunction& g, const OmegaSubset& a, const std::vector<Integer>& checkpoints) {
  validate_checkpoints(checkpoints, true);
  ZSubsetReport r;
  r.weighted = density_profile(a, g, checkpoints);
  for (const auto& n : checkpoints) {
    r.asymptotic.checkpoints.push_back(n);
    r.asymptotic.values.push_back(make_rational(a.prefix_count(n), n));
    r.link.checkpoints.push_back(n);
    r.link.values.push_back(make_rational(g(n), n));
  }
  return r;
}

namespace {

// Point in [lo, hi) with the most preimages from `from`; the lowest position wins ties.
Integer best_target(const IndexMap& phi, const Interval& from, const Integer& lo, const Integer& hi) {
  Integer best = lo, best_count = -1;
  for (Integer a = lo; a < hi; ++a) {
    Integer c = phi.preimage_count_point(a, from.lo, from.hi);
    if (c > best_count) {
      best = a;
      best_count = c;
    }
  }
  return best;
}

// Tracks the checkpoint with the largest |A ∩ i| / i relative to its bound.
struct DensityTracker {
  const std::vector<Integer>& sorted;
  KatetovCheck& check;

  void at(const Integer& i, const Rational& bound, bool strict = false) {
    if (i < 1) return;
    Integer count = static_cast<unsigned long>(std::lower_bound(sorted.begin(), sorted.end(), i) - sorted.begin());
    Rational v = make_rational(count, i);
    ++check.density_points;
    if (check.density_points == 1 || v / bound > check.worst_ratio / check.worst_bound) {
      check.worst_point = i;
      check.worst_ratio = v;
      check.worst_bound = bound;
    }
    if (strict ? v >= bound : v > bound) {
      throw certification_error("density bound fails at " + to_string(i) + ": " + to_string(v) +
                                (strict ? " >= " : " > ") + to_string(bound) + " (block " +
                                std::to_string(check.n) + ")");
    }
  }
};

}  // namespace

KatetovResult katetov_witness(const WeightFunction& f, const IndexMap& phi, const std::vector<Integer>& m_seq,
                              std::size_t horizon) {
  if (m_seq.size() < horizon + 1) {
    throw validation_error("m sequence has " + std::to_string(m_seq.size()) + " terms, the horizon needs " +
                           std::to_string(horizon + 1));
  }
  std::vector<Integer> fm;
  for (std::size_t n = 0; n < m_seq.size(); ++n) {
    if (m_seq[n] < 0) throw validation_error("m sequence has a negative term");
    fm.push_back(f(m_seq[n]));
    Integer k = static_cast<unsigned long>(2 * n + 3);
    if (m_seq[n] <= k * fm[n]) {
      throw validation_error("m_" + std::to_string(n) + " / f(m_" + std::to_string(n) + ") = " + to_string(m_seq[n]) +
                             "/" + to_string(fm[n]) + " is not above " + to_string(k));
    }
  }
  for (std::size_t n = 0; n + 1 < m_seq.size(); ++n) {
    Integer k = static_cast<unsigned long>(2 * n + 2);
    if (k * fm[n] >= fm[n + 1]) {
      throw validation_error("(2n+2) f(m_n) < f(m_{n+1}) fails at n = " + std::to_string(n) + ": " +
                             to_string(Integer(k * fm[n])) + " >= " + to_string(fm[n + 1]));
    }
  }

  KatetovResult r;
  std::map<int, std::size_t> tally;
  for (std::size_t n = 0; n <= horizon; ++n) {
    KatetovStep s;
    s.n = n;
    s.m = m_seq[n];
    s.f_m = fm[n];
    Integer nn = static_cast<unsigned long>(n);
    s.interval = {s.f_m + 1, (2 * nn + 2) * s.f_m + 1};
    s.inside = phi.preimage_count(OmegaSubset::intervals({s.interval}), s.interval.lo, s.interval.hi);
    s.below = phi.preimage_count(OmegaSubset::intervals({{0, s.interval.lo}}), s.interval.lo, s.interval.hi);
    s.above = s.interval.length() - s.inside - s.below;
    if (s.above >= s.f_m) s.cases.push_back(1);
    if (s.inside >= nn * s.f_m) s.cases.push_back(2);
    if (s.below >= nn * s.f_m) s.cases.push_back(3);
    if (s.cases.empty()) throw validation_error("no case reaches its threshold at n = " + std::to_string(n));
    for (int c : s.cases) ++tally[c];
    r.log.push_back(std::move(s));
  }
  for (const auto& [c, count] : tally) {
    if (r.chosen_case == 0 || count > tally[r.chosen_case]) r.chosen_case = c;
  }

  auto holds = [&](const KatetovStep& s, int c) { return std::find(s.cases.begin(), s.cases.end(), c) != s.cases.end(); };
  auto max_of = [](const Interval& iv) -> Integer { return iv.hi - 1; };

  // block n_j, the points picked for it
  std::vector<std::pair<std::size_t, std::vector<Integer>>> picks;
  std::vector<Integer> gates;  // Case 3: t_j
  if (r.chosen_case == 1) {
    for (const auto& s : r.log) {
      if (!holds(s, 1)) continue;
      // the lowest f(m_n) points of B_n, mapped forward
      std::vector<Integer> image;
      for (Integer i = s.interval.lo; i < s.interval.hi && Integer(image.size()) < s.f_m; ++i) {
        Integer v = phi(i);
        if (v > max_of(s.interval)) image.push_back(v);
      }
      picks.push_back({s.n, std::move(image)});
    }
  } else if (r.chosen_case == 2) {
    for (const auto& s : r.log) {
      if (s.n == 0 || !holds(s, 2)) continue;
      Integer width = static_cast<unsigned long>(2 * s.n + 1);
      std::vector<Integer> chosen;
      for (Integer l = 0; l < s.f_m; ++l) {
        Integer lo = s.f_m + l * width + 1;
        chosen.push_back(best_target(phi, s.interval, lo, lo + width));
      }
      picks.push_back({s.n, std::move(chosen)});
    }
  } else {
    Integer total = 0;
    Integer top = -1;
    std::size_t next = 1;
    for (std::size_t j = 1;; ++j) {
      Integer jj = static_cast<unsigned long>(j);
      Integer bar = std::max(top, Integer(jj * total));
      Integer t = 1;
      while (t <= bar) t *= 2;
      const KatetovStep* chosen = nullptr;
      for (; next <= horizon; ++next) {
        const auto& s = r.log[next];
        if (!holds(s, 3) || s.f_m - t <= jj) continue;
        Integer free = phi.preimage_count(OmegaSubset::intervals({{t, s.interval.lo}}), s.interval.lo, s.interval.hi);
        if (2 * free >= Integer(static_cast<unsigned long>(s.n)) * s.f_m) {
          chosen = &s;
          ++next;
          break;
        }
      }
      if (!chosen) {
        r.note = "Case 3 stopped at step " + std::to_string(j) + ": no later n has enough preimages at or above t = " +
                 to_string(t);
        break;
      }
      Integer span = chosen->f_m - t;
      Integer nn = static_cast<unsigned long>(chosen->n);
      Integer q = ceil_div(span, nn);
      std::vector<Integer> pts;
      for (Integer l = 0; l < q; ++l) {
        // integers a with t + l*span/q < a <= t + (l+1)*span/q
        Integer lo = t + floor_div(l * span, q) + 1;
        Integer hi = t + floor_div((l + 1) * span, q) + 1;
        if (lo >= hi) throw certification_error("empty pick window in Case 3");
        pts.push_back(best_target(phi, chosen->interval, lo, hi));
      }
      total += Integer(static_cast<unsigned long>(pts.size()));
      top = pts.back();
      gates.push_back(t);
      picks.push_back({chosen->n, std::move(pts)});
    }
  }

  for (const auto& [n, pts] : picks) r.points.insert(r.points.end(), pts.begin(), pts.end());
  std::sort(r.points.begin(), r.points.end());
  r.points.erase(std::unique(r.points.begin(), r.points.end()), r.points.end());
  r.a = OmegaSubset::from_points(r.points);

  // certified inequalities
  for (std::size_t j = 0; j < picks.size(); ++j) {
    const auto& [n, pts] = picks[j];
    const auto& s = r.log[n];
    KatetovCheck c;
    c.n = n;
    c.bound = r.chosen_case == 2 ? Rational(1, 3) : Rational(1, 2);
    c.value = make_rational(phi.preimage_count(r.a, 0, s.m), s.f_m);
    if (c.value < c.bound) {
      throw certification_error("preimage mass " + to_string(c.value) + " below " + to_string(c.bound) + " at n = " +
                                std::to_string(n));
    }
    DensityTracker track{r.points, c};
    Integer nn = static_cast<unsigned long>(n);
    if (r.chosen_case == 1) {
      // (max I_n, max I_{n+1}]: at most 2/(2n+2)
      Rational bound = make_rational(2, 2 * nn + 2);
      Integer next_max = j + 1 < picks.size() ? max_of(r.log[picks[j + 1].first].interval) : Integer(-1);
      track.at(max_of(s.interval) + 1, bound);
      for (const auto& a : r.points) {
        if (a + 1 > max_of(s.interval) && (next_max < 0 || a + 1 <= next_max)) track.at(a + 1, bound);
      }
    } else if (r.chosen_case == 2) {
      // inside I_n: 2/(2n+2) + 2/(2n+1); past max I_n until the next selected block: below 1/(n+1)
      Rational inside = make_rational(2, 2 * nn + 2) + make_rational(2, 2 * nn + 1);
      Rational after = make_rational(1, nn + 1);
      track.at(s.interval.lo, inside);
      for (const auto& a : pts) {
        if (a + 1 <= max_of(s.interval)) {
          track.at(a + 1, inside);
        } else {
          track.at(a + 1, after, true);
        }
      }
      // |A ∩ i| / i only falls between picks, so the range start past max I_n is the last peak
      track.at(max_of(s.interval) + 1, after, true);
    } else {
      // from t_j through f(m_{n_j}): below 3/j + 2/n_j
      Rational bound = make_rational(3, static_cast<unsigned long>(j + 1)) + make_rational(2, nn);
      track.at(gates[j], bound, true);
      for (const auto& a : pts) track.at(a + 1, bound, true);
    }
    r.checks.push_back(c);
  }
  return r;
}

namespace {

json witnesses_json(const std::vector<ProbeWitness>& ws) {
  json out = json::array();
  for (const auto& w : ws) {
    out.push_back(json::array({integer_json(w.n), integer_json(w.value.get_num()), integer_json(w.value.get_den())}));
  }
  return out;
}

json optional_label(const std::optional<std::uint64_t>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

json to_json(const IncreasingInvarianceReport& r) {
  json dom{{"holds", r.domination.holds}};
  dom["first_failure"] = r.domination.first_failure ? integer_json(*r.domination.first_failure) : json(nullptr);
  return json{{"classification", to_string(r.classification)},
              {"horizon", integer_json(r.horizon)},
              {"witnesses", witnesses_json(r.witnesses)},
              {"parameters", {{"delta", rational_json(r.delta)}, {"last_block", optional_label(r.last_label)}}},
              {"domination", dom},
              {"B", to_json(r.b_verdict)},
              {"C", to_json(r.c_verdict)}};
}

json to_json(const AudReport& r) {
  json levels = json::array();
  json grid = json::array();
  for (const auto& lv : r.levels) {
    grid.push_back(integer_json(lv.m));
    json v;
    if (lv.last_violation) {
      v = json{{"block", lv.last_violation->first}, {"k", integer_json(lv.last_violation->second)}};
    }
    levels.push_back({{"m", integer_json(lv.m)},
                      {"passes_everywhere", lv.passes_everywhere},
                      {"tail_after", optional_label(lv.tail_after)},
                      {"tail_blocks", lv.tail_blocks},
                      {"covers_final_window", lv.covers_final_window},
                      {"last_violation", v}});
  }
  return json{{"classification", to_string(r.classification)},
              {"horizon", r.horizon},
              {"witnesses", witnesses_json(r.witnesses)},
              {"parameters", {{"delta", rational_json(r.delta)}, {"m_grid", grid}}},
              {"levels", levels},
              {"B", to_json(r.b_verdict)}};
}

json to_json(const ZSubsetReport& r) {
  return json{{"asymptotic", to_json(r.asymptotic)}, {"weighted", to_json(r.weighted)}, {"link", to_json(r.link)}};
}

json to_json(const KatetovResult& r) {
  json log = json::array();
  for (const auto& s : r.log) {
    log.push_back({{"n", s.n},
                   {"m", integer_json(s.m)},
                   {"f_m", integer_json(s.f_m)},
                   {"interval", json::array({integer_json(s.interval.lo), integer_json(s.interval.hi)})},
                   {"above", integer_json(s.above)},
                   {"inside", integer_json(s.inside)},
                   {"below", integer_json(s.below)},
                   {"cases", s.cases}});
  }
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"n", c.n},
                      {"preimage_mass", rational_json(c.value)},
                      {"preimage_bound", rational_json(c.bound)},
                      {"density_points", c.density_points},
                      {"worst_point", integer_json(c.worst_point)},
                      {"worst_density", rational_json(c.worst_ratio)},
                      {"density_bound", rational_json(c.worst_bound)}});
  }
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(integer_json(p));
  json out{{"case", r.chosen_case}, {"log", log}, {"checks", checks}, {"A", pts}};
  out["note"] = r.note ? json(*r.note) : json(nullptr);
  return out;
}

}  // namespace densideal
