#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dibmine/text.hpp"

// Numeric-literal grammar shared by the tokenizer and the quantity scanner.
// Recognized shapes: plain decimals, thousands-separated integers,
// scientific notation (28.4×10^3 and 2.84e4), bare powers of ten, and ±
// uncertainty forms, optionally parenthesized: (28.4±0.1)×10^3.
//
// Values are computed from the written digits with one exact integer and
// one power-of-ten operation, so "28.4×10^3" is exactly 28400.

namespace dibmine::qty {

enum class LiteralStyle {
  plain,        // 28.4
  thousands,    // 28,400
  scientific,   // 28.4×10^3
  e_notation,   // 2.84e4
  pow10,        // 10^3
  pm,           // 441.9±1.0
  pm_paren,     // (28.4±0.1)×10^3
};

struct NumericLiteral {
  std::string raw;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::size_t token_index = 0;

  double mantissa = 0.0;                // as written, e.g. 28.4
  int exponent10 = 0;                   // from ×10^k or e-notation
  std::optional<double> uncertainty;    // absolute, at value scale

  // Exact decomposition: mantissa = digits / 10^shift.
  std::int64_t digits = 0;
  int shift = 0;
  std::int64_t unc_digits = 0;
  int unc_shift = 0;
  bool exact = true;  // false when the digit string overflowed 64 bits
  LiteralStyle style = LiteralStyle::plain;

  double value() const {
    if (!exact) return mantissa * std::pow(10.0, exponent10);
    return scaled(digits, exponent10 - shift);
  }

  double sigma() const { return uncertainty.value_or(0.0); }

  // digits × 10^k with the power applied as a single exact multiply or
  // divide; 10^k is an exact double for |k| ≤ 22.
  static double scaled(std::int64_t digit_value, int k) {
    const double d = static_cast<double>(digit_value);
    if (k == 0) return d;
    if (k > 0 && k <= 22) return d * pow10_exact(k);
    if (k < 0 && k >= -22) return d / pow10_exact(-k);
    return d * std::pow(10.0, k);
  }

  static double pow10_exact(int k) {
    double p = 1.0;
    while (k-- > 0) p *= 10.0;
    return p;
  }
};

namespace numdetail {

struct Cursor {
  const std::vector<char32_t>& cps;
  std::size_t i = 0;

  bool done() const { return i >= cps.size(); }
  char32_t peek() const { return done() ? 0 : cps[i]; }
  bool eat(char32_t c) {
    if (peek() == c) {
      ++i;
      return true;
    }
    return false;
  }
};

struct CoreNumber {
  std::string digit_string;  // digits only, no separators
  int shift = 0;             // digits after the decimal point
  bool negative = false;
  bool thousands = false;
};

inline bool parse_sign(Cursor& c, bool& negative) {
  if (c.eat('-') || c.eat(0x2212)) {
    negative = true;
    return true;
  }
  if (c.eat('+')) return true;
  return false;
}

// plain := d+ ['.' d+] | '.' d+
// thousands := d{1,3} (',' d{3})+ ['.' d+]
inline bool parse_core(Cursor& c, CoreNumber& out) {
  out = CoreNumber{};
  parse_sign(c, out.negative);
  std::size_t int_digits = 0;
  while (text::is_ascii_digit(c.peek())) {
    out.digit_string += static_cast<char>(c.peek());
    ++c.i;
    ++int_digits;
  }
  if (int_digits >= 1 && int_digits <= 3 && c.peek() == ',') {
    // Candidate thousands groups; only commit if every group has 3 digits.
    const std::size_t mark = c.i;
    std::string groups;
    bool ok = true;
    while (c.peek() == ',') {
      ++c.i;
      std::size_t n = 0;
      while (text::is_ascii_digit(c.peek()) && n < 3) {
        groups += static_cast<char>(c.peek());
        ++c.i;
        ++n;
      }
      if (n != 3 || text::is_ascii_digit(c.peek())) {
        ok = false;
        break;
      }
    }
    if (ok && !groups.empty()) {
      out.digit_string += groups;
      out.thousands = true;
    } else {
      c.i = mark;  // not a thousands form; stop at the comma
    }
  }
  if (c.peek() == '.') {
    const std::size_t mark = c.i;
    ++c.i;
    std::size_t frac = 0;
    std::string frac_digits;
    while (text::is_ascii_digit(c.peek())) {
      frac_digits += static_cast<char>(c.peek());
      ++c.i;
      ++frac;
    }
    if (frac == 0) {
      c.i = mark;  // trailing dot is sentence punctuation, not a decimal
    } else {
      out.digit_string += frac_digits;
      out.shift = static_cast<int>(frac);
    }
  }
  return !out.digit_string.empty();
}

inline bool is_mult_sign(char32_t cp) {
  return cp == 0x00D7 || cp == 'x' || cp == 'X' || cp == '*' || cp == 0x00B7 ||
         cp == 0x22C5;
}

// exp := mult '10' '^' int | [eE] int      (superscripts already folded)
inline bool parse_exponent(Cursor& c, int& exponent, bool& e_form) {
  const std::size_t mark = c.i;
  bool neg = false;
  if (c.eat('e') || c.eat('E')) {
    e_form = true;
  } else if (is_mult_sign(c.peek())) {
    ++c.i;
    if (!(c.eat('1') && c.eat('0') && c.eat('^'))) {
      c.i = mark;
      return false;
    }
    e_form = false;
  } else {
    return false;
  }
  parse_sign(c, neg);
  std::size_t n = 0;
  long acc = 0;
  while (text::is_ascii_digit(c.peek()) && n < 9) {
    acc = acc * 10 + static_cast<long>(c.peek() - '0');
    ++c.i;
    ++n;
  }
  if (n == 0 || text::is_ascii_digit(c.peek())) {
    c.i = mark;
    return false;
  }
  exponent = static_cast<int>(neg ? -acc : acc);
  return true;
}

inline bool digits_to_i64(const std::string& ds, bool negative,
                          std::int64_t& out) {
  if (ds.size() > 18) return false;
  std::int64_t acc = 0;
  for (char ch : ds) acc = acc * 10 + (ch - '0');
  out = negative ? -acc : acc;
  return true;
}

inline double core_as_double(const CoreNumber& core) {
  std::int64_t d = 0;
  if (digits_to_i64(core.digit_string, core.negative, d))
    return NumericLiteral::scaled(d, -core.shift);
  std::string s = core.negative ? "-" : "";
  s += core.digit_string;
  s += "e-" + std::to_string(core.shift);
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace numdetail

// Matches `token` against the numeric-literal grammar; the whole token must
// match. Fills everything except the span/token_index bookkeeping.
inline std::optional<NumericLiteral> parse_numeric_literal(
    std::string_view token) {
  using namespace numdetail;
  const std::string folded = text::fold_superscripts(token);
  std::vector<char32_t> cps;
  cps.reserve(folded.size());
  {
    std::size_t i = 0;
    while (i < folded.size()) {
      std::size_t len = 0;
      cps.push_back(text::decode_utf8(folded, i, len));
      i += len;
    }
  }
  Cursor c{cps};

  NumericLiteral lit;
  lit.raw = std::string(token);
  CoreNumber value_core, unc_core;
  bool has_unc = false;
  bool paren = false;

  if (c.eat('(')) {
    if (!parse_core(c, value_core) || !c.eat(0x00B1) ||
        !parse_core(c, unc_core) || !c.eat(')'))
      return std::nullopt;
    has_unc = true;
    paren = true;
  } else {
    if (!parse_core(c, value_core)) return std::nullopt;
    if (c.eat(0x00B1)) {
      if (!parse_core(c, unc_core)) return std::nullopt;
      has_unc = true;
    }
  }

  int exponent = 0;
  bool e_form = false;
  bool has_exp = parse_exponent(c, exponent, e_form);

  // Bare power of ten: the core "10" directly followed by ^k.
  bool pow10_form = false;
  if (!has_unc && !has_exp && value_core.digit_string == "10" &&
      value_core.shift == 0 && c.peek() == '^') {
    ++c.i;
    bool neg = false;
    parse_sign(c, neg);
    std::size_t n = 0;
    long acc = 0;
    while (text::is_ascii_digit(c.peek()) && n < 9) {
      acc = acc * 10 + static_cast<long>(c.peek() - '0');
      ++c.i;
      ++n;
    }
    if (n == 0) return std::nullopt;
    exponent = static_cast<int>(neg ? -acc : acc);
    value_core.digit_string = "1";
    if (value_core.negative) return std::nullopt;
    pow10_form = true;
    has_exp = true;
  }

  if (!c.done()) return std::nullopt;
  if (has_unc && unc_core.negative) return std::nullopt;

  lit.exponent10 = exponent;
  lit.shift = value_core.shift;
  lit.exact = digits_to_i64(value_core.digit_string, value_core.negative,
                            lit.digits);
  lit.mantissa = core_as_double(value_core);
  if (has_unc) {
    lit.unc_shift = unc_core.shift;
    std::int64_t ud = 0;
    if (!digits_to_i64(unc_core.digit_string, unc_core.negative, ud))
      lit.exact = false;
    lit.unc_digits = ud;
    if (lit.exact) {
      lit.uncertainty = NumericLiteral::scaled(ud, exponent - unc_core.shift);
    } else {
      lit.uncertainty =
          core_as_double(unc_core) * std::pow(10.0, exponent);
    }
  }

  if (has_unc)
    lit.style = paren ? LiteralStyle::pm_paren : LiteralStyle::pm;
  else if (pow10_form)
    lit.style = LiteralStyle::pow10;
  else if (has_exp)
    lit.style = e_form ? LiteralStyle::e_notation : LiteralStyle::scientific;
  else
    lit.style = value_core.thousands ? LiteralStyle::thousands
                                     : LiteralStyle::plain;
  return lit;
}

inline bool is_numeric_token(std::string_view token) {
  return parse_numeric_literal(token).has_value();
}

namespace numdetail {

inline std::string render_mantissa(std::int64_t digits, int shift,
                                   bool thousands) {
  const bool neg = digits < 0;
  std::string ds = std::to_string(neg ? -digits : digits);
  while (static_cast<int>(ds.size()) <= shift) ds.insert(ds.begin(), '0');
  std::string intpart = ds.substr(0, ds.size() - shift);
  std::string frac = shift > 0 ? ds.substr(ds.size() - shift) : "";
  if (thousands) {
    std::string grouped;
    int count = 0;
    for (auto it = intpart.rbegin(); it != intpart.rend(); ++it) {
      if (count != 0 && count % 3 == 0) grouped += ',';
      grouped += *it;
      ++count;
    }
    std::reverse(grouped.begin(), grouped.end());
    intpart = grouped;
  }
  std::string out = neg ? "-" : "";
  out += intpart;
  if (!frac.empty()) out += "." + frac;
  return out;
}

}  // namespace numdetail

// Canonical rendering; parse(format(lit)) reproduces lit's value fields.
inline std::string format_numeric_literal(const NumericLiteral& lit) {
  using numdetail::render_mantissa;
  const std::string exp_suffix =
      lit.style == LiteralStyle::e_notation
          ? "e" + std::to_string(lit.exponent10)
          : "×10^" + std::to_string(lit.exponent10);
  switch (lit.style) {
    case LiteralStyle::pow10:
      return "10^" + std::to_string(lit.exponent10);
    case LiteralStyle::plain:
      return render_mantissa(lit.digits, lit.shift, false);
    case LiteralStyle::thousands:
      return render_mantissa(lit.digits, lit.shift, true);
    case LiteralStyle::scientific:
    case LiteralStyle::e_notation:
      return render_mantissa(lit.digits, lit.shift, false) + exp_suffix;
    case LiteralStyle::pm: {
      std::string out = render_mantissa(lit.digits, lit.shift, false);
      out += "±" + render_mantissa(lit.unc_digits, lit.unc_shift, false);
      if (lit.exponent10 != 0) out += exp_suffix;
      return out;
    }
    case LiteralStyle::pm_paren: {
      std::string out = "(" + render_mantissa(lit.digits, lit.shift, false);
      out += "±" + render_mantissa(lit.unc_digits, lit.unc_shift, false) + ")";
      if (lit.exponent10 != 0) out += exp_suffix;
      return out;
    }
  }
  return lit.raw;
}

}  // namespace dibmine::qty
