#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 helpers shared by the tokenizer and the unit parser.
// Only the code points that actually occur in scientific abstracts get
// special treatment; everything else passes through untouched.

namespace dibmine::text {

// Decodes the code point starting at byte `i`; stores its byte length in
// `len`. Invalid sequences are consumed one byte at a time.
inline char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto at = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    len = 2;
    return ((b0 & 0x1Fu) << 6) | at(1);
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    len = 3;
    return ((b0 & 0x0Fu) << 12) | (at(1) << 6) | at(2);
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    len = 4;
    return ((b0 & 0x07u) << 18) | (at(1) << 12) | (at(2) << 6) | at(3);
  }
  len = 1;
  return b0;
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_ascii_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v';
}

// '~' counts as whitespace: it renders as a non-breaking space in the
// LaTeX-derived abstracts this library consumes ("1500~\AA").
inline bool is_separator(char32_t cp) {
  return is_ascii_space(cp) || cp == '~' || cp == 0x00A0 /* nbsp */;
}

inline bool is_ascii_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

inline bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
  }
  switch (cp) {
    case 0x00B1:  // ±
    case 0x00D7:  // ×
    case 0x2212:  // − minus sign
    case 0x2013:  // – en dash
    case 0x2014:  // — em dash
    case 0x2026:  // …
    case 0x2018:
    case 0x2019:  // ‘ ’
    case 0x201C:
    case 0x201D:  // “ ”
    case 0x00AB:
    case 0x00BB:  // « »
    case 0x2039:
    case 0x203A:  // ‹ ›
      return true;
    default:
      return false;
  }
}

// ASCII plus Latin-1 letters; leaves other scripts untouched. Enough to
// normalize "Å" to "å" so vocabulary keys are case-insensitive.
inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = 0;
    char32_t cp = decode_utf8(s, i, len);
    if (cp >= 'A' && cp <= 'Z') {
      cp += 0x20;
    } else if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) {
      cp += 0x20;
    }
    encode_utf8(cp, out);
    i += len;
  }
  return out;
}

// Rewrites Unicode superscript exponents ("s⁻¹", "×10⁻⁴") into caret form
// ("s^-1", "×10^-4").
inline std::string fold_superscripts(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  bool in_sup = false;
  while (i < s.size()) {
    std::size_t len = 0;
    char32_t cp = decode_utf8(s, i, len);
    int digit = -1;
    bool minus = false;
    switch (cp) {
      case 0x00B2: digit = 2; break;
      case 0x00B3: digit = 3; break;
      case 0x00B9: digit = 1; break;
      case 0x2070: digit = 0; break;
      case 0x2074: digit = 4; break;
      case 0x2075: digit = 5; break;
      case 0x2076: digit = 6; break;
      case 0x2077: digit = 7; break;
      case 0x2078: digit = 8; break;
      case 0x2079: digit = 9; break;
      case 0x207B: minus = true; break;
      default: break;
    }
    if (digit >= 0 || minus) {
      if (!in_sup) {
        out += '^';
        in_sup = true;
      }
      out += minus ? '-' : static_cast<char>('0' + digit);
    } else {
      in_sup = false;
      encode_utf8(cp, out);
    }
    i += len;
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace dibmine::text
