// densideal command-line front end.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "densideal/constructions.hpp"
#include "densideal/descriptors.hpp"
#include "densideal/errors.hpp"
#include "densideal/probes.hpp"
#include "densideal/serialize.hpp"

using namespace densideal;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitScan = 3;
constexpr int kExitUsage = 64;
constexpr int kExitFailure = 1;

// What a command prints: the JSON document, and a table for --format csv.
struct Output {
  json doc;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void print(const Output& o, const std::string& format, std::ostream& os) {
  if (format == "json") {
    os << o.doc.dump(2) << "\n";
    return;
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
    os << "\n";
  };
  line(o.header);
  for (const auto& r : o.rows) line(r);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Integer> integer_list(const std::string& text) {
  std::vector<Integer> out;
  for (const auto& s : split(text, ',')) out.push_back(eval_integer_expr(s));
  if (out.empty()) throw validation_error("empty list '" + text + "'");
  return out;
}

std::uint64_t label_of(const std::string& text) {
  Integer v = eval_integer_expr(text);
  if (v < 0 || !v.fits_ulong_p()) throw validation_error("label out of range: " + text);
  return v.get_ui();
}

// Rational cells: exact num/den, decimal alongside as annotation.
std::string exact(const Rational& q) { return rational_json(q).get<std::string>(); }
std::vector<std::string> rational_cells(const Rational& q) { return {exact(q), to_decimal(q, 12)}; }

void add_profile_rows(Output& o, const DensityProfile& p, const std::string& tag) {
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    std::vector<std::string> row{tag, to_string(p.checkpoints[i])};
    for (auto& c : rational_cells(p.values[i])) row.push_back(c);
    o.rows.push_back(row);
  }
}

struct Source {
  std::string gallery;
  std::string params = "{}";
  std::string measures;
  std::string b;
  std::string c;
  bool second = false;

  void attach(CLI::App* app, bool with_c) {
    app->add_option("--gallery", gallery, "gallery example supplying measures and witnesses");
    app->add_option("--params", params, "gallery parameters as JSON");
    app->add_option("--measures", measures, "measure sequence descriptor or catalog name");
    app->add_option("--set,--b", b, "set descriptor (B)");
    if (with_c) app->add_option("--c", c, "dominated set descriptor (C)");
    app->add_flag("--second", second, "use the gallery's second sequence (iso_pair)");
  }

  struct Resolved {
    MeasureSequence m;
    std::optional<OmegaSubset> b, c;
  };

  Resolved resolve(const Integer& scan_bound) const {
    std::optional<MeasureSequence> m;
    std::optional<OmegaSubset> bs, cs;
    if (!gallery.empty()) {
      auto g = gallery_instance(gallery, parse_descriptor(params));
      m = second ? g.second : g.measures;
      if (!m) throw validation_error("gallery example '" + gallery + "' has no such measure sequence");
      bs = g.b;
      cs = g.c;
    }
    if (!measures.empty()) m = measures_from_json(parse_descriptor(measures), scan_bound);
    if (!m) throw validation_error("give --gallery or --measures");
    if (!b.empty()) bs = set_from_json(parse_descriptor(b));
    if (!c.empty()) cs = set_from_json(parse_descriptor(c));
    return {*m, bs, cs};
  }
};

OmegaSubset need(const std::optional<OmegaSubset>& s, const char* what) {
  if (!s) throw validation_error(std::string("missing set ") + what);
  return *s;
}

Output blocks_output(const MeasureSequence& m, std::size_t count) {
  Output o;
  o.header = {"label", "lo", "hi", "piece_lo", "piece_hi", "weight", "weight_decimal"};
  json blocks = json::array();
  for (const auto& b : m.first_blocks(count)) {
    blocks.push_back(to_json(b));
    for (const auto& p : b.pieces) {
      std::vector<std::string> row{std::to_string(b.label), to_string(b.span.lo), to_string(b.span.hi),
                                   to_string(p.lo), to_string(p.hi)};
      for (auto& c : rational_cells(p.weight)) row.push_back(c);
      o.rows.push_back(row);
    }
  }
  o.doc = {{"measures", m.descriptor()}, {"flags", m.flags().to_json()}, {"blocks", blocks}};
  if (auto bad = check_flags(m, count)) o.doc["flag_violation"] = *bad;
  return o;
}

Output witness_output(const json& doc, const std::vector<ProbeWitness>& ws, const std::string& classification) {
  Output o;
  o.doc = doc;
  o.header = {"classification", "n", "value", "value_decimal"};
  if (ws.empty()) o.rows.push_back({classification, "", "", ""});
  for (const auto& w : ws) {
    std::vector<std::string> row{classification, to_string(w.n)};
    for (auto& c : rational_cells(w.value)) row.push_back(c);
    o.rows.push_back(row);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact experiments with density ideals on the natural numbers", "densideal"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "key=value configuration file; command-line flags win");

  std::string format = "json";
  std::string scan_bound_text = "10^9";
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--scan-bound", scan_bound_text, "upper bound for searches over positions");

  // gallery
  auto* gallery = app.add_subcommand("gallery", "list or emit gallery examples");
  gallery->require_subcommand(1);
  auto* gallery_list = gallery->add_subcommand("list", "names and parameters");
  auto* gallery_emit = gallery->add_subcommand("emit", "descriptors of one example");
  std::string emit_name, emit_params = "{}";
  gallery_emit->add_option("name", emit_name, "example name")->required();
  gallery_emit->add_option("--params", emit_params, "parameters as JSON");

  // density
  auto* density = app.add_subcommand("density", "partial densities |A ∩ n| / g(n) and their verdict");
  std::string d_set, d_weight, d_checkpoints, d_delta = "1/2", d_threshold = "1/64";
  bool d_ratio = false;
  density->add_option("--set", d_set, "set descriptor")->required();
  density->add_option("--weight", d_weight, "weight descriptor")->required();
  density->add_option("--checkpoints", d_checkpoints, "comma-separated n, expressions allowed")->required();
  density->add_option("--delta", d_delta, "witness level p/q");
  density->add_option("--threshold", d_threshold, "trend-to-zero threshold p/q");
  density->add_flag("--ratio", d_ratio, "also print n / g(n)");

  // measures
  auto* meas = app.add_subcommand("measures", "materialise blocks of a measure sequence");
  Source m_src;
  m_src.attach(meas, false);
  std::string m_weight;
  std::size_t m_blocks = 6;
  meas->add_option("--weight", m_weight, "build the partition from a weight instead");
  meas->add_option("--blocks", m_blocks, "number of blocks");

  // construct
  auto* construct = app.add_subcommand("construct", "conversions between weights and measures");
  construct->require_subcommand(1);
  std::string c_measures, c_weight, c_trace;
  std::size_t c_blocks = 6;
  auto add_common = [&](CLI::App* sub, bool weight_in) {
    if (weight_in) {
      sub->add_option("--weight", c_weight, "weight descriptor")->required();
    } else {
      sub->add_option("--measures", c_measures, "measure sequence descriptor")->required();
    }
    sub->add_option("--blocks", c_blocks, "number of blocks");
  };
  auto* c_wfm = construct->add_subcommand("weight-from-measures", "synthesise a weight from a measure sequence");
  add_common(c_wfm, false);
  c_wfm->add_option("--trace", c_trace, "write the synthesis trace to this file");
  auto* c_mfw = construct->add_subcommand("measures-from-weight", "partition blocks from a weight");
  add_common(c_mfw, true);
  auto* c_regroup = construct->add_subcommand("doubling-regroup", "merge blocks until sizes double");
  add_common(c_regroup, false);
  auto* c_rearr = construct->add_subcommand("monotone-rearrange", "sort atoms inside each block");
  add_common(c_rearr, false);
  auto* c_cover = construct->add_subcommand("cover-initial-gap", "prepend a uniform block before the first");
  add_common(c_cover, false);
  auto* c_lem3 = construct->add_subcommand("lem3-scan", "largest |B ∩ D_n ∩ l| / g(l) reached in three blocks");
  add_common(c_lem3, false);
  std::string c_set, c_horizon;
  c_lem3->add_option("--weight", c_weight, "weight descriptor")->required();
  c_lem3->add_option("--horizon", c_horizon, "position horizon")->required();
  c_lem3->add_option("--set", c_set, "set descriptor")->required();

  // probe
  auto* probe = app.add_subcommand("probe", "finite-horizon evidence for ideal properties");
  probe->require_subcommand(1);
  auto* p_ii = probe->add_subcommand("increasing-invariance", "domination plus mass trends of B and C");
  Source p_src;
  p_src.attach(p_ii, true);
  std::string p_horizon, p_delta = "1/2";
  p_ii->add_option("--horizon", p_horizon, "position horizon, e.g. 3*8!+1")->required();
  p_ii->add_option("--delta", p_delta, "witness level p/q");

  auto* p_aud = probe->add_subcommand("aud", "condition (⋆) tails against the mass of B");
  Source a_src;
  a_src.attach(p_aud, false);
  std::string a_levels = "1,2,4", a_horizon, a_delta = "1/2";
  p_aud->add_option("--levels", a_levels, "levels m, comma-separated");
  p_aud->add_option("--horizon", a_horizon, "last block label")->required();
  p_aud->add_option("--delta", a_delta, "witness level p/q");

  auto* p_z = probe->add_subcommand("z-subset", "asymptotic and weighted densities side by side");
  std::string z_weight, z_set, z_checkpoints;
  p_z->add_option("--weight", z_weight, "weight descriptor")->required();
  p_z->add_option("--set", z_set, "set descriptor")->required();
  p_z->add_option("--checkpoints", z_checkpoints, "comma-separated n")->required();

  auto* p_kat = probe->add_subcommand("katetov", "build the adversary set A for a map and a weight");
  std::string k_weight, k_map = "identity", k_mseq;
  std::size_t k_horizon = 0;
  p_kat->add_option("--weight", k_weight, "weight f")->required();
  p_kat->add_option("--map", k_map, "index map descriptor");
  p_kat->add_option("--m-seq", k_mseq, "m_0, m_1, ... comma-separated")->required();
  p_kat->add_option("--horizon", k_horizon, "largest n to classify")->required();

  // sigma, star, farah
  auto* sigma = app.add_subcommand("sigma", "bucket profile of B in the given blocks");
  Source s_src;
  s_src.attach(sigma, false);
  std::string s_labels;
  sigma->add_option("--labels", s_labels, "block labels, comma-separated")->required();

  auto* star = app.add_subcommand("star", "condition (⋆) at one level over a block range");
  Source t_src;
  t_src.attach(star, false);
  std::string t_level, t_lo, t_hi;
  star->add_option("--level", t_level, "level m")->required();
  star->add_option("--lo", t_lo, "range is lo < label <= hi")->required();
  star->add_option("--hi", t_hi, "last label")->required();

  auto* farah = app.add_subcommand("farah", "Farah's conditions (D1)-(D3) up to a label");
  Source f_src;
  f_src.attach(farah, false);
  std::string f_upto, f_threshold = "1/64";
  farah->add_option("--upto", f_upto, "last block label")->required();
  farah->add_option("--threshold", f_threshold, "trend threshold p/q");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    Integer scan_bound = eval_integer_expr(scan_bound_text);
    if (scan_bound < 1) throw validation_error("--scan-bound must be positive");
    Output out;

    if (*gallery_list) {
      json arr = json::array();
      out.header = {"name", "summary", "defaults"};
      for (const auto& e : gallery_entries()) {
        arr.push_back({{"name", e.name}, {"summary", e.summary}, {"defaults", e.defaults}});
        out.rows.push_back({e.name, e.summary, e.defaults.dump()});
      }
      out.doc = {{"examples", arr}};
    } else if (*gallery_emit) {
      auto g = gallery_instance(emit_name, parse_descriptor(emit_params));
      out.doc = to_json(g);
      out.header = {"field", "descriptor"};
      for (const auto& [k, v] : out.doc.items()) out.rows.push_back({k, v.dump()});
    } else if (*density) {
      auto a = set_from_json(parse_descriptor(d_set));
      auto g = weight_from_json(parse_descriptor(d_weight));
      auto cps = integer_list(d_checkpoints);
      auto v = verdict(a, g, cps, parse_rational(d_delta), parse_rational(d_threshold));
      out.doc = {{"set", a.descriptor()}, {"weight", g.descriptor()}, {"verdict", to_json(v)}};
      if (auto w = h_membership_warning(g)) out.doc["warning"] = *w;
      out.header = {"series", "n", "value", "value_decimal"};
      add_profile_rows(out, v.evidence, "density");
      if (d_ratio) {
        auto r = ratio_profile(g, cps);
        out.doc["ratio"] = to_json(r);
        add_profile_rows(out, r, "ratio");
      }
    } else if (*meas) {
      if (!m_weight.empty()) {
        auto g = weight_from_json(parse_descriptor(m_weight));
        out = blocks_output(measures_from_weight(g, m_blocks, scan_bound), m_blocks);
      } else {
        out = blocks_output(m_src.resolve(scan_bound).m, m_blocks);
      }
    } else if (*c_wfm) {
      auto m = measures_from_json(parse_descriptor(c_measures), scan_bound);
      auto res = weight_from_measures(m, c_blocks);
      if (!c_trace.empty()) {
        std::ofstream f(c_trace);
        if (!f) throw validation_error("cannot write trace file " + c_trace);
        f << to_json(res.trace).dump(2) << "\n";
      }
      json ends = json::array();
      out.header = {"label", "lo", "hi", "g_at_max", "r", "branch"};
      for (const auto& b : res.trace.blocks) {
        Integer top = b.span.hi - 1;
        ends.push_back({{"label", b.label}, {"max", integer_json(top)}, {"g", integer_json(res.weight(top))}});
        out.rows.push_back({std::to_string(b.label), to_string(b.span.lo), to_string(b.span.hi),
                            to_string(res.weight(top)), to_string(b.r), b.branch});
      }
      out.doc = {{"weight", res.weight.descriptor()}, {"block_ends", ends}};
      if (auto bad = check_trace(res.trace, m)) out.doc["trace_check"] = *bad;
      else out.doc["trace_check"] = "ok";
    } else if (*c_mfw) {
      auto g = weight_from_json(parse_descriptor(c_weight));
      out = blocks_output(measures_from_weight(g, c_blocks, scan_bound), c_blocks);
    } else if (*c_regroup || *c_rearr || *c_cover) {
      auto m = measures_from_json(parse_descriptor(c_measures), scan_bound);
      if (*c_regroup) {
        out = blocks_output(doubling_regroup(m, c_blocks), c_blocks);
      } else if (*c_cover) {
        out = blocks_output(cover_initial_gap(m, c_blocks), c_blocks);
      } else {
        auto r = monotone_rearrange(m, c_blocks);
        out = blocks_output(r.measures, c_blocks);
        out.doc["map"] = r.map.descriptor();
      }
    } else if (*c_lem3) {
      auto m = measures_from_json(parse_descriptor(c_measures), scan_bound);
      auto g = weight_from_json(parse_descriptor(c_weight));
      auto b = set_from_json(parse_descriptor(c_set));
      auto r = lem3_witness_scan(m, g, b, eval_integer_expr(c_horizon));
      out.header = {"label", "point", "value", "value_decimal"};
      if (!r) {
        out.doc = {{"result", nullptr}, {"note", "fewer than three blocks meet B with positive value"}};
      } else {
        out.doc = to_json(*r);
        for (const auto& w : r->witnesses) {
          std::vector<std::string> row{std::to_string(w.label), to_string(w.point)};
          for (auto& c : rational_cells(w.value)) row.push_back(c);
          out.rows.push_back(row);
        }
      }
    } else if (*p_ii) {
      auto src = p_src.resolve(scan_bound);
      auto r = increasing_invariance_probe(src.m, need(src.b, "B"), need(src.c, "C"), eval_integer_expr(p_horizon),
                                           parse_rational(p_delta));
      out = witness_output(to_json(r), r.witnesses, to_string(r.classification));
    } else if (*p_aud) {
      auto src = a_src.resolve(scan_bound);
      auto r = aud_probe(src.m, need(src.b, "B"), integer_list(a_levels), label_of(a_horizon), parse_rational(a_delta));
      out = witness_output(to_json(r), r.witnesses, to_string(r.classification));
    } else if (*p_z) {
      auto r = z_subset_probe(weight_from_json(parse_descriptor(z_weight)), set_from_json(parse_descriptor(z_set)),
                              integer_list(z_checkpoints));
      out.doc = to_json(r);
      out.header = {"series", "n", "value", "value_decimal"};
      add_profile_rows(out, r.asymptotic, "asymptotic");
      add_profile_rows(out, r.weighted, "weighted");
      add_profile_rows(out, r.link, "link");
    } else if (*p_kat) {
      auto r = katetov_witness(weight_from_json(parse_descriptor(k_weight)), map_from_json(parse_descriptor(k_map)),
                               integer_list(k_mseq), k_horizon);
      out.doc = to_json(r);
      out.header = {"n", "m", "f_m", "above", "inside", "below", "cases"};
      for (const auto& s : r.log) {
        std::string cases;
        for (int c : s.cases) cases += (cases.empty() ? "" : " ") + std::to_string(c);
        out.rows.push_back({std::to_string(s.n), to_string(s.m), to_string(s.f_m), to_string(s.above),
                            to_string(s.inside), to_string(s.below), cases});
      }
    } else if (*sigma) {
      auto src = s_src.resolve(scan_bound);
      auto b = need(src.b, "B");
      json arr = json::array();
      out.header = {"label", "d", "k", "count", "sigma", "sigma_decimal"};
      for (const auto& l : integer_list(s_labels)) {
        auto s = sigma_profile(src.m, b, label_of(to_string(l)));
        arr.push_back(to_json(s));
        for (const auto& e : s.buckets) {
          std::vector<std::string> row{std::to_string(s.label), to_string(s.d), to_string(e.k), to_string(e.count)};
          for (auto& c : rational_cells(e.sigma)) row.push_back(c);
          out.rows.push_back(row);
        }
      }
      out.doc = {{"profiles", arr}};
    } else if (*star) {
      auto src = t_src.resolve(scan_bound);
      StarParameters sp{eval_integer_expr(t_level), label_of(t_lo), label_of(t_hi)};
      auto r = star_condition_check(src.m, need(src.b, "B"), sp);
      out.doc = to_json(r);
      out.header = {"holds", "blocks_checked", "violation_label", "violation_k"};
      out.rows.push_back({r.holds ? "true" : "false", std::to_string(r.blocks_checked),
                          r.first_violation ? std::to_string(r.first_violation->first) : "",
                          r.first_violation ? to_string(r.first_violation->second) : ""});
    } else if (*farah) {
      auto src = f_src.resolve(scan_bound);
      auto r = farah_check(src.m, label_of(f_upto), parse_rational(f_threshold));
      out.doc = to_json(r);
      out.header = {"series", "n", "value", "value_decimal"};
      add_profile_rows(out, r.d2, "d2");
      out.rows.push_back({"d1", "", exact(r.d1), to_decimal(r.d1, 12)});
      out.rows.push_back({"d3", "", exact(r.d3), to_decimal(r.d3, 12)});
    }
    print(out, format, std::cout);
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const scan_bound_error& e) {
    std::cerr << "scan bound exceeded: " << e.what() << "\n";
    return kExitScan;
  } catch (const degenerate_input_error& e) {
    std::cerr << "degenerate input: " << e.what() << "\n";
    return kExitScan;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
