#pragma once

#include <optional>
#include <string>
#include <vector>

#include "densideal/constructions.hpp"
#include "densideal/gallery.hpp"

namespace densideal {

// Rebuild objects from the descriptors they emit. Strings are catalog shorthands:
// sets "omega" / "empty", weights "n+1" / "sqrt" / "log2", measures by catalog name,
// maps "identity" / "reverse_factorial_blocks" / "reverse_triangular_blocks".
// Anything unknown is a validation_error.
OmegaSubset set_from_json(const json& j);
WeightFunction weight_from_json(const json& j);
MeasureSequence measures_from_json(const json& j, const Integer& scan_bound = kDefaultScanBound);
IndexMap map_from_json(const json& j);

// Parses text as JSON when it starts with '{' or '[', otherwise as a bare string.
json parse_descriptor(const std::string& text);

struct GalleryEntry {
  std::string name;
  std::string summary;
  json defaults;  // accepted parameters with their default values
};
const std::vector<GalleryEntry>& gallery_entries();

// A gallery example resolved with parameters. Fields a given example lacks stay empty.
struct GalleryInstance {
  std::string name;
  json params;  // defaults merged with the caller's values
  std::optional<MeasureSequence> measures;
  std::optional<MeasureSequence> second;  // iso_pair's ν
  std::optional<IndexMap> map;
  std::optional<OmegaSubset> b;
  std::optional<OmegaSubset> c;
  std::vector<OmegaSubset> family;
  std::vector<WeightFunction> weights;
  json facts = json::object();  // small derived values worth printing alongside
};
GalleryInstance gallery_instance(const std::string& name, const json& params = json::object());
json to_json(const GalleryInstance& g);

}  // namespace densideal
