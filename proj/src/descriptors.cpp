#include "densideal/descriptors.hpp"

#include <algorithm>

#include "densideal/errors.hpp"
#include "densideal/serialize.hpp"

namespace densideal {

namespace {

std::string kind_of(const json& j) {
  if (!j.is_object()) throw validation_error("descriptor must be an object or a catalog name");
  const auto& k = require(j, "kind");
  if (!k.is_string()) throw validation_error("descriptor kind must be a string");
  return k.get<std::string>();
}

std::size_t json_count(const json& j, const char* field) {
  Integer v = json_integer(j, field);
  if (v < 0 || !v.fits_ulong_p()) throw validation_error(std::string(field) + " out of range");
  return v.get_ui();
}

std::vector<Integer> integer_list(const json& j, const char* field) {
  if (!j.is_array()) throw validation_error(std::string(field) + " must be an array");
  std::vector<Integer> out;
  for (const auto& x : j) out.push_back(json_integer(x, field));
  return out;
}

bool half_is_last(const json& j) {
  std::string h = require(j, "half").get<std::string>();
  if (h != "first" && h != "last") throw validation_error("half must be 'first' or 'last'");
  return h == "last";
}

}  // namespace

json parse_descriptor(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw validation_error(std::string("malformed JSON descriptor: ") + e.what());
    }
  }
  return json(text);
}

OmegaSubset set_from_json(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "omega") return OmegaSubset::omega();
    if (s == "empty") return OmegaSubset::empty();
    throw validation_error("unknown set name '" + s + "'");
  }
  std::string kind = kind_of(j);
  if (kind == "omega") return OmegaSubset::omega();
  if (kind == "finite") return OmegaSubset::finite(integer_list(require(j, "elements"), "elements"));
  if (kind == "blocks") {
    std::vector<Interval> blocks;
    for (const auto& iv : require(j, "intervals")) {
      if (!iv.is_array() || iv.size() != 2) throw validation_error("interval must be [lo, hi]");
      blocks.push_back({json_integer(iv[0], "lo"), json_integer(iv[1], "hi")});
    }
    return OmegaSubset::intervals(std::move(blocks));
  }
  if (kind == "periodic") {
    return OmegaSubset::periodic(json_integer(require(j, "modulus"), "modulus"),
                                 integer_list(require(j, "residues"), "residues"));
  }
  if (kind == "at_least") return OmegaSubset::at_least(json_integer(require(j, "from"), "from"));
  if (kind == "union") return set_union(set_from_json(require(j, "left")), set_from_json(require(j, "right")));
  if (kind == "intersection") {
    return set_intersection(set_from_json(require(j, "left")), set_from_json(require(j, "right")));
  }
  if (kind == "difference") {
    return set_difference(set_from_json(require(j, "left")), set_from_json(require(j, "right")));
  }
  if (kind == "complement") return set_complement(set_from_json(require(j, "of")));
  if (kind == "factorial_band") {
    return gallery::factorial_band(json_count(require(j, "from"), "from"), json_count(require(j, "to"), "to"));
  }
  if (kind == "branch") return gallery::branch(json_rational(require(j, "parameter"), "parameter"));
  if (kind == "bucket_union") return gallery::bucket_union();
  if (kind == "doubling_half") return gallery::doubling_half(half_is_last(j));
  if (kind == "factorial_half") return gallery::factorial_half(half_is_last(j));
  if (kind == "antichain_support") return gallery::antichain_support(set_from_json(require(j, "member")));
  if (kind == "antichain_gap") return gallery::antichain_gap(set_from_json(require(j, "member")));
  throw validation_error("unknown set kind '" + kind + "'");
}

namespace {

weights::PlateauBase plateau_base_from_json(const json& j) {
  weights::PlateauBase base;
  if (j.is_string() && j.get<std::string>() == "factorial") return base;
  std::string kind = kind_of(j);
  if (kind == "factorial") {
    base.factorial_shift = j.contains("shift") ? json_count(j["shift"], "shift") : 1;
    return base;
  }
  if (kind == "list") {
    base.explicit_values = integer_list(require(j, "values"), "values");
    return base;
  }
  throw validation_error("unknown plateau base kind '" + kind + "'");
}

}  // namespace

WeightFunction weight_from_json(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "n+1") return weights::affine(1, 0, 1);
    if (s == "sqrt") return weights::root_floor(2);
    if (s == "log2") return weights::log_floor(2, 1);
    throw validation_error("unknown weight name '" + s + "'");
  }
  std::string kind = kind_of(j);
  if (kind == "affine") {
    return weights::affine(json_integer(require(j, "a"), "a"), json_integer(require(j, "b"), "b"),
                           json_integer(require(j, "c"), "c"));
  }
  if (kind == "constant") return weights::constant(json_integer(require(j, "value"), "value"));
  if (kind == "log_floor") {
    return weights::log_floor(json_integer(require(j, "base"), "base"), json_integer(require(j, "shift"), "shift"));
  }
  if (kind == "root_floor") return weights::root_floor(json_count(require(j, "r"), "r"));
  if (kind == "plateau_fL") {
    return weights::plateau(plateau_base_from_json(require(j, "base")), set_from_json(require(j, "L")));
  }
  if (kind == "table") {
    std::vector<weights::TableRun> runs;
    for (const auto& r : require(j, "runs")) {
      if (!r.is_array() || r.size() != 3) throw validation_error("table run must be [lo, hi, value]");
      runs.push_back({json_integer(r[0], "lo"), json_integer(r[1], "hi"), json_integer(r[2], "value")});
    }
    json extra = j;
    extra.erase("runs");
    extra.erase("kind");
    return weights::table(std::move(runs), extra);
  }
  if (kind == "scaled") {
    return weights::scaled(json_integer(require(j, "factor"), "factor"), weight_from_json(require(j, "of")));
  }
  throw validation_error("unknown weight kind '" + kind + "'");
}

MeasureSequence measures_from_json(const json& j, const Integer& scan_bound) {
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (kind_of(j) == "catalog") {
    name = require(j, "name").get<std::string>();
  }
  if (!name.empty()) {
    if (name == "uniform_doubling") return measures::uniform_doubling();
    if (name == "eu_blocks") return measures::eu_blocks();
    if (name == "heavy_last_half") return measures::heavy_last_half();
    if (name == "growing_mass") return measures::growing_mass();
    if (name == "triangular_uniform") return measures::triangular_uniform();
    if (name == "factorial_first_halves") return measures::factorial_halves(true);
    if (name == "factorial_last_halves") return measures::factorial_halves(false);
    if (name == "bucketed") return measures::bucketed();
    if (name == "antichain_blocks") {
      if (!j.is_object()) throw validation_error("antichain_blocks needs a member set");
      return measures::antichain_blocks(set_from_json(require(j, "member")));
    }
    throw validation_error("unknown measure sequence '" + name + "'");
  }
  std::string kind = kind_of(j);
  if (kind == "from_weight") {
    return measures_from_weight(weight_from_json(require(j, "weight")),
                                json_count(require(j, "blocks"), "blocks"), scan_bound);
  }
  auto inner = [&] { return measures_from_json(require(j, "of"), scan_bound); };
  std::size_t count = j.contains("blocks") ? json_count(j["blocks"], "blocks") : 0;
  if (kind == "cover_initial_gap" || kind == "doubling_regroup" || kind == "monotone_rearrange") {
    if (count == 0) throw validation_error(kind + " needs blocks >= 1");
    if (kind == "cover_initial_gap") return cover_initial_gap(inner(), count);
    if (kind == "doubling_regroup") return doubling_regroup(inner(), count);
    return monotone_rearrange(inner(), count).measures;
  }
  throw validation_error("unknown measure kind '" + kind + "'");
}

IndexMap map_from_json(const json& j) {
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    std::string kind = kind_of(j);
    if (kind == "identity") return IndexMap::identity();
    if (kind == "explicit") {
      std::vector<MapPiece> pieces;
      for (const auto& p : require(j, "pieces")) pieces.push_back(map_piece_from_json(p));
      return IndexMap::from_pieces(std::move(pieces));
    }
    if (kind != "catalog") throw validation_error("unknown map kind '" + kind + "'");
    name = require(j, "name").get<std::string>();
  }
  if (name == "identity") return IndexMap::identity();
  if (name == "reverse_factorial_blocks") return gallery::reverse_factorial_blocks();
  if (name == "reverse_triangular_blocks") return gallery::reverse_triangular_blocks();
  throw validation_error("unknown map '" + name + "'");
}

const std::vector<GalleryEntry>& gallery_entries() {
  static const std::vector<GalleryEntry> entries{
      {"eu_not_ii", "uniform 1/k! on (2k!, 3k!]; C = the blocks, B = (k!, 2k!]", json::object()},
      {"antichain_eu_not_simple", "blocks D_i of size i! indexed by one family member; B = gaps before, C = blocks",
       json{{"count", 4}, {"member", 0}}},
      {"almost_disjoint_family", "branches of (i+1)/(2i+3) in the binary tree, coded as naturals",
       json{{"count", 16}, {"horizon", "2^20"}}},
      {"antichain_eu_simple", "plateau weights f_L, one per family member",
       json{{"count", 3}, {"base", "factorial"}}},
      {"ii_not_aud", "bucketed blocks; B = the buckets L^n_1..L^n_{k_n}", json::object()},
      {"aud_not_ii", "atoms 1/2^n on the last half of [2^{n+1}-2, 2^{n+2}-2); B = first halves, C = last halves",
       json::object()},
      {"iso_pair", "blocks of size 2n!, mass on the first or the last half, and the block-reversing map",
       json::object()},
      {"perm_breaks_ii", "k blocks of size k; B = minima of the images, C = the image of the block with largest minimum",
       json{{"groups", 42}, {"map", "identity"}}},
  };
  return entries;
}

namespace {

std::size_t param_count(const json& p, const char* key) { return json_count(require(p, key), key); }

}  // namespace

GalleryInstance gallery_instance(const std::string& name, const json& params) {
  const auto& entries = gallery_entries();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const GalleryEntry& e) { return e.name == name; });
  if (it == entries.end()) throw validation_error("unknown gallery example '" + name + "'");
  if (!params.is_null() && !params.is_object()) throw validation_error("gallery parameters must be an object");

  GalleryInstance g;
  g.name = name;
  g.params = it->defaults;
  if (params.is_object()) {
    for (const auto& [k, v] : params.items()) {
      if (!g.params.contains(k)) throw validation_error("'" + name + "' takes no parameter '" + k + "'");
      g.params[k] = v;
    }
  }
  const json& p = g.params;

  if (name == "eu_not_ii") {
    auto ex = gallery::eu_not_ii();
    g.measures = ex.measures;
    g.b = ex.witnesses.b;
    g.c = ex.witnesses.c;
  } else if (name == "antichain_eu_not_simple") {
    std::size_t count = param_count(p, "count"), member = param_count(p, "member");
    if (member >= count) throw validation_error("member index must be below count");
    g.family = gallery::almost_disjoint_family(std::max<std::size_t>(count, 2));
    auto members = gallery::antichain_eu_not_simple(g.family, count);
    g.measures = members[member].measures;
    g.b = members[member].witnesses.b;
    g.c = members[member].witnesses.c;
    json starts = json::array();
    for (std::size_t i = 0; i <= 8; ++i) starts.push_back(integer_json(measures::antichain_start(i)));
    g.facts["n_sequence"] = starts;
  } else if (name == "almost_disjoint_family") {
    g.family = gallery::almost_disjoint_family(param_count(p, "count"));
    Integer horizon = json_integer(require(p, "horizon"), "horizon");
    json certs = json::array();
    for (const auto& c : gallery::certify_almost_disjoint(g.family, horizon)) {
      certs.push_back({{"pair", {c.left, c.right}}, {"common", integer_json(c.common)}, {"last", integer_json(c.last)}});
    }
    g.facts["intersections"] = certs;
  } else if (name == "antichain_eu_simple") {
    g.family = gallery::almost_disjoint_family(std::max<std::size_t>(param_count(p, "count"), 2));
    g.family.resize(param_count(p, "count"));
    weights::PlateauBase base = plateau_base_from_json(require(p, "base"));
    g.weights = gallery::antichain_eu_simple(g.family, base);
    json ends = json::array();
    for (const auto& l : g.family) {
      json row = json::array();
      for (const auto& e : gallery::plateau_ends(base, l, 3)) row.push_back(integer_json(e));
      ends.push_back(row);
    }
    g.facts["plateau_ends"] = ends;
  } else if (name == "ii_not_aud") {
    auto ex = gallery::ii_not_aud();
    g.measures = ex.measures;
    g.b = ex.b;
  } else if (name == "aud_not_ii") {
    auto ex = gallery::aud_not_ii();
    g.measures = ex.measures;
    g.b = ex.witnesses.b;
    g.c = ex.witnesses.c;
  } else if (name == "iso_pair") {
    auto ex = gallery::iso_pair();
    g.measures = ex.first;
    g.second = ex.second;
    g.map = ex.swap;
    g.b = ex.witnesses.b;
    g.c = ex.witnesses.c;
  } else if (name == "perm_breaks_ii") {
    auto phi = map_from_json(require(p, "map"));
    auto ex = gallery::perm_breaks_ii(phi, param_count(p, "groups"));
    g.measures = ex.measures;
    g.map = phi;
    g.b = ex.witnesses.b;
    g.c = ex.witnesses.c;
    g.facts["horizon"] = integer_json(ex.horizon);
  }
  return g;
}

json to_json(const GalleryInstance& g) {
  json out{{"name", g.name}, {"params", g.params}};
  if (g.measures) out["measures"] = g.measures->descriptor();
  if (g.second) out["second_measures"] = g.second->descriptor();
  if (g.map) out["map"] = g.map->descriptor();
  if (g.b) out["B"] = g.b->descriptor();
  if (g.c) out["C"] = g.c->descriptor();
  if (!g.family.empty()) {
    json fam = json::array();
    for (const auto& s : g.family) fam.push_back(s.descriptor());
    out["family"] = fam;
  }
  if (!g.weights.empty()) {
    json ws = json::array();
    for (const auto& w : g.weights) ws.push_back(w.descriptor());
    out["weights"] = ws;
  }
  if (!g.facts.empty()) out["facts"] = g.facts;
  return out;
}

}  // namespace densideal
