#pragma once

#include <string>

#include <json.hpp>

#include "densideal/numeric.hpp"

namespace densideal {

using json = nlohmann::json;

// Output side: integers as decimal strings, rationals always as "num/den".
inline json integer_json(const Integer& n) { return n.get_str(10); }
inline json rational_json(const Rational& q) { return q.get_num().get_str(10) + "/" + q.get_den().get_str(10); }

// Input side: accepts JSON numbers, decimal strings or integer expressions like "3*8!+1".
Integer json_integer(const json& j, const char* field = "value");
// Accepts "p/q", integers, or {"num": .., "den": ..}.
Rational json_rational(const json& j, const char* field = "value");

const json& require(const json& obj, const char* key);

}  // namespace densideal
