#include "densideal/serialize.hpp"

#include "densideal/errors.hpp"

namespace densideal {

Integer json_integer(const json& j, const char* field) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return Integer(std::to_string(j.get<std::uint64_t>()), 10);
    return Integer(std::to_string(j.get<std::int64_t>()), 10);
  }
  if (j.is_string()) return eval_integer_expr(j.get<std::string>());
  throw validation_error(std::string("field '") + field + "' must be an integer or integer string");
}

Rational json_rational(const json& j, const char* field) {
  if (j.is_object()) return make_rational(json_integer(require(j, "num")), json_integer(require(j, "den")));
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(json_integer(j, field));
  throw validation_error(std::string("field '") + field + "' must be a rational \"p/q\"");
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw validation_error(std::string("missing field '") + key + "'");
  return obj.at(key);
}

}  // namespace densideal
