#include "densideal/numeric.hpp"

#include <cctype>
#include <climits>
#include <string>

#include "densideal/errors.hpp"

namespace densideal {

Integer factorial(unsigned long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

Integer pow_int(const Integer& base, unsigned long exp) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Integer ceil_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Integer floor_of(const Rational& q) { return floor_div(q.get_num(), q.get_den()); }
Integer ceil_of(const Rational& q) { return ceil_div(q.get_num(), q.get_den()); }

Integer lcm(const Integer& a, const Integer& b) {
  Integer out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw validation_error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Integer parse_integer(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (!s.empty() && s[0] == '+') s = s.substr(1);
  if (s.empty()) throw validation_error("empty integer literal");
  std::size_t digits_from = s[0] == '-' ? 1 : 0;
  if (digits_from == s.size()) throw validation_error("malformed integer literal: " + std::string(text));
  for (std::size_t i = digits_from; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw validation_error("malformed integer literal: " + std::string(text));
    }
  }
  return Integer(s, 10);
}

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text));
  return make_rational(parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1)));
}

std::string to_string(const Integer& n) { return n.get_str(10); }

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str(10);
  return q.get_num().get_str(10) + "/" + q.get_den().get_str(10);
}

std::string to_decimal(const Rational& q, int digits) {
  Integer num = q.get_num();
  const Integer& den = q.get_den();
  std::string sign;
  if (num < 0) {
    sign = "-";
    num = -num;
  }
  Integer whole = floor_div(num, den);
  Integer rem = num - whole * den;
  std::string out = sign + whole.get_str(10);
  if (digits <= 0) return out;
  out += '.';
  for (int i = 0; i < digits; ++i) {
    rem *= 10;
    Integer digit = floor_div(rem, den);
    rem -= digit * den;
    out += static_cast<char>('0' + digit.get_si());
  }
  return out;
}

std::uint64_t to_u64(const Integer& n) {
  if (n < 0 || mpz_sizeinbase(n.get_mpz_t(), 2) > 64) {
    throw validation_error("value out of 64-bit range: " + to_string(n));
  }
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, n.get_mpz_t());
  return out;
}

long to_long(const Integer& n) {
  if (!n.fits_slong_p()) throw validation_error("value out of range: " + to_string(n));
  return n.get_si();
}

namespace {

// expr   := term (('+'|'-') term)*
// term   := power ('*' power)*
// power  := postfix ('^' power)?
// postfix:= atom '!'*
// atom   := digits | '(' expr ')'
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Integer parse() {
    Integer v = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw validation_error("bad integer expression '" + std::string(text_) + "': " + why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Integer expr() {
    Integer v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  Integer term() {
    Integer v = power();
    while (eat('*')) v *= power();
    return v;
  }

  Integer power() {
    Integer base = postfix();
    if (eat('^')) {
      Integer e = power();
      if (e < 0 || !e.fits_ulong_p() || e > 1'000'000) fail("exponent out of range");
      return pow_int(base, e.get_ui());
    }
    return base;
  }

  Integer postfix() {
    Integer v = atom();
    while (eat('!')) {
      if (v < 0 || v > 100'000) fail("factorial argument out of range");
      v = factorial(v.get_ui());
    }
    return v;
  }

  Integer atom() {
    skip_ws();
    if (eat('(')) {
      Integer v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return Integer(std::string(text_.substr(start, pos_ - start)), 10);
  }
};

}  // namespace

Integer eval_integer_expr(std::string_view text) { return ExprParser(text).parse(); }

}  // namespace densideal
