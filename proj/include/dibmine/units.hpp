#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dibmine/error.hpp"
#include "dibmine/text.hpp"

// Dimensional-analysis engine: exact rational dimension vectors over the
// seven SI base dimensions, a unit registry with SI-prefix resolution, a
// parser for compound unit expressions, and the ambiguity table that lists
// surface symbols shared by several units (the "Å"/"A" case).

namespace dibmine::units {

// Exact rational number for dimension exponents. Equality of dimensions has
// to be an exact predicate, so floats are out.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw DimensionError("rational with zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  double as_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Parses "2", "-2" or "3/2".
  static std::optional<Rational> parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t num = 0, den = 1;
    std::size_t slash = s.find('/');
    auto parse_int = [](std::string_view v, std::int64_t& out) {
      if (v.empty()) return false;
      bool neg = false;
      std::size_t i = 0;
      if (v[0] == '+' || v[0] == '-') {
        neg = v[0] == '-';
        i = 1;
      }
      if (i == v.size()) return false;
      std::int64_t acc = 0;
      for (; i < v.size(); ++i) {
        if (v[i] < '0' || v[i] > '9') return false;
        acc = acc * 10 + (v[i] - '0');
      }
      out = neg ? -acc : acc;
      return true;
    };
    if (slash == std::string_view::npos) {
      if (!parse_int(s, num)) return std::nullopt;
      return Rational(num);
    }
    if (!parse_int(s.substr(0, slash), num) ||
        !parse_int(s.substr(slash + 1), den) || den == 0)
      return std::nullopt;
    return Rational(num, den);
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Exponent tuple over (length, mass, time, current, temperature, amount,
// luminous intensity). The zero vector is dimensionless.
struct DimensionVector {
  static constexpr std::size_t kBaseCount = 7;
  enum Axis : std::size_t {
    kLength = 0,
    kMass,
    kTime,
    kCurrent,
    kTemperature,
    kAmount,
    kLuminousIntensity,
  };

  std::array<Rational, kBaseCount> exponents{};

  static DimensionVector dimensionless() { return {}; }
  static DimensionVector base(Axis axis, Rational e = Rational(1)) {
    DimensionVector d;
    d.exponents[axis] = e;
    return d;
  }
  static DimensionVector length() { return base(kLength); }
  static DimensionVector mass() { return base(kMass); }
  static DimensionVector time() { return base(kTime); }
  static DimensionVector current() { return base(kCurrent); }

  bool is_dimensionless() const {
    for (const auto& e : exponents)
      if (!e.is_zero()) return false;
    return true;
  }

  friend DimensionVector operator+(const DimensionVector& a,
                                   const DimensionVector& b) {
    DimensionVector d;
    for (std::size_t i = 0; i < kBaseCount; ++i)
      d.exponents[i] = a.exponents[i] + b.exponents[i];
    return d;
  }
  friend DimensionVector operator-(const DimensionVector& a,
                                   const DimensionVector& b) {
    DimensionVector d;
    for (std::size_t i = 0; i < kBaseCount; ++i)
      d.exponents[i] = a.exponents[i] - b.exponents[i];
    return d;
  }
  DimensionVector scaled(const Rational& k) const {
    DimensionVector d;
    for (std::size_t i = 0; i < kBaseCount; ++i)
      d.exponents[i] = exponents[i] * k;
    return d;
  }
  friend bool operator==(const DimensionVector& a, const DimensionVector& b) {
    return a.exponents == b.exponents;
  }
  friend bool operator!=(const DimensionVector& a, const DimensionVector& b) {
    return !(a == b);
  }

  std::string str() const {
    static constexpr std::array<const char*, kBaseCount> names = {
        "L", "M", "T", "I", "Th", "N", "J"};
    std::string out;
    for (std::size_t i = 0; i < kBaseCount; ++i) {
      if (exponents[i].is_zero()) continue;
      if (!out.empty()) out += "·";
      out += names[i];
      out += "^";
      out += exponents[i].str();
    }
    return out.empty() ? "1" : out;
  }
};

// One base-unit factor of a unit's SI expansion, e.g. ("m", 1) or ("s", -2).
struct UnitFactor {
  std::string base;  // one of m, kg, s, A, K, mol, cd
  Rational exponent;

  friend bool operator==(const UnitFactor& a, const UnitFactor& b) {
    return a.base == b.base && a.exponent == b.exponent;
  }
};

inline std::optional<DimensionVector::Axis> base_axis(std::string_view base) {
  if (base == "m") return DimensionVector::kLength;
  if (base == "kg") return DimensionVector::kMass;
  if (base == "s") return DimensionVector::kTime;
  if (base == "A") return DimensionVector::kCurrent;
  if (base == "K") return DimensionVector::kTemperature;
  if (base == "mol") return DimensionVector::kAmount;
  if (base == "cd") return DimensionVector::kLuminousIntensity;
  return std::nullopt;
}

// A concrete unit: canonical name, SI base-unit expansion, and the scale
// factor to the SI-coherent unit of the same dimension.
struct UnitExpr {
  std::string canonical_name;
  std::vector<UnitFactor> factors;  // merged, sorted by base symbol
  double si_scale = 1.0;

  DimensionVector dimension() const {
    DimensionVector d;
    for (const auto& f : factors) {
      const auto axis = base_axis(f.base);
      if (!axis) throw DimensionError("unknown base unit: " + f.base);
      d.exponents[*axis] = d.exponents[*axis] + f.exponent;
    }
    return d;
  }

  // Token used when the unit appears in a mask ("NUM--Nanometer").
  std::string mask_name() const {
    std::string n = canonical_name;
    if (!n.empty() && n[0] >= 'a' && n[0] <= 'z') n[0] -= 0x20;
    return n;
  }

  UnitExpr pow(const Rational& e) const {
    UnitExpr u;
    u.canonical_name = canonical_name;
    if (e != Rational(1)) u.canonical_name += "^" + e.str();
    for (const auto& f : factors) {
      const Rational ne = f.exponent * e;
      if (!ne.is_zero()) u.factors.push_back({f.base, ne});
    }
    u.si_scale = std::pow(si_scale, e.as_double());
    return u;
  }

  friend bool operator==(const UnitExpr& a, const UnitExpr& b) {
    return a.canonical_name == b.canonical_name && a.factors == b.factors &&
           a.si_scale == b.si_scale;
  }
};

namespace detail {

inline void merge_factors(std::vector<UnitFactor>& factors) {
  std::sort(factors.begin(), factors.end(),
            [](const UnitFactor& a, const UnitFactor& b) {
              return a.base < b.base;
            });
  std::vector<UnitFactor> merged;
  for (const auto& f : factors) {
    if (!merged.empty() && merged.back().base == f.base) {
      merged.back().exponent = merged.back().exponent + f.exponent;
    } else {
      merged.push_back(f);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const UnitFactor& f) {
                                return f.exponent.is_zero();
                              }),
               merged.end());
  factors = std::move(merged);
}

}  // namespace detail

inline UnitExpr operator*(const UnitExpr& a, const UnitExpr& b) {
  UnitExpr u;
  u.canonical_name = a.canonical_name + "·" + b.canonical_name;
  u.factors = a.factors;
  u.factors.insert(u.factors.end(), b.factors.begin(), b.factors.end());
  detail::merge_factors(u.factors);
  u.si_scale = a.si_scale * b.si_scale;
  return u;
}

inline UnitExpr operator/(const UnitExpr& a, const UnitExpr& b) {
  UnitExpr u;
  u.canonical_name = a.canonical_name + "/" + b.canonical_name;
  u.factors = a.factors;
  for (const auto& f : b.factors) u.factors.push_back({f.base, -f.exponent});
  detail::merge_factors(u.factors);
  u.si_scale = a.si_scale / b.si_scale;
  return u;
}

inline DimensionVector dimension_of(const UnitExpr& unit) {
  return unit.dimension();
}

struct SiPrefix {
  std::string name;
  std::vector<std::string> symbols;
  double factor;
};

inline const std::vector<SiPrefix>& si_prefixes() {
  static const std::vector<SiPrefix> prefixes = {
      {"yotta", {"Y"}, 1e24},  {"zetta", {"Z"}, 1e21},
      {"exa", {"E"}, 1e18},    {"peta", {"P"}, 1e15},
      {"tera", {"T"}, 1e12},   {"giga", {"G"}, 1e9},
      {"mega", {"M"}, 1e6},    {"kilo", {"k"}, 1e3},
      {"hecto", {"h"}, 1e2},   {"deka", {"da"}, 1e1},
      {"deci", {"d"}, 1e-1},   {"centi", {"c"}, 1e-2},
      {"milli", {"m"}, 1e-3},  {"micro", {"µ", "μ", "u"}, 1e-6},
      {"nano", {"n"}, 1e-9},   {"pico", {"p"}, 1e-12},
      {"femto", {"f"}, 1e-15}, {"atto", {"a"}, 1e-18},
      {"zepto", {"z"}, 1e-21}, {"yocto", {"y"}, 1e-24},
  };
  return prefixes;
}

// Registry of named units. Immutable after construction; lookups resolve
// aliases first, then SI-prefixed forms of prefixable units.
class UnitRegistry {
 public:
  struct Entry {
    UnitExpr unit;
    bool prefixable = false;
    std::vector<std::string> aliases;
  };

  void add(const std::string& canonical, std::vector<UnitFactor> factors,
           double si_scale, bool prefixable,
           std::vector<std::string> aliases = {}) {
    detail::merge_factors(factors);
    Entry e;
    e.unit = UnitExpr{canonical, std::move(factors), si_scale};
    e.unit.dimension();  // validates base symbols
    e.prefixable = prefixable;
    e.aliases = std::move(aliases);
    if (by_name_.count(canonical))
      throw FormatError("duplicate unit name: " + canonical);
    const std::size_t idx = entries_.size();
    by_name_[canonical] = idx;
    by_alias_[canonical] = idx;
    for (const auto& a : e.aliases) {
      if (by_alias_.count(a) && by_alias_[a] != idx)
        throw FormatError("duplicate unit alias: " + a);
      by_alias_[a] = idx;
    }
    entries_.push_back(std::move(e));
  }

  const UnitExpr* find_canonical(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &entries_[it->second].unit;
  }

  // Resolves a bare symbol: exact alias first, then prefix + prefixable
  // alias. Returns nullopt for unknown symbols.
  std::optional<UnitExpr> resolve_symbol(std::string_view symbol) const {
    std::string sym = normalize_symbol(symbol);
    auto it = by_alias_.find(sym);
    if (it != by_alias_.end()) return entries_[it->second].unit;
    for (const auto& prefix : si_prefixes()) {
      for (const auto& ps : prefix.symbols) {
        if (sym.size() <= ps.size() || sym.compare(0, ps.size(), ps) != 0)
          continue;
        auto rest = by_alias_.find(std::string_view(sym).substr(ps.size()));
        if (rest == by_alias_.end()) continue;
        const Entry& e = entries_[rest->second];
        if (!e.prefixable) continue;
        UnitExpr u = e.unit;
        u.canonical_name = prefix.name + e.unit.canonical_name;
        u.si_scale *= prefix.factor;
        return u;
      }
      if (sym.size() > prefix.name.size() &&
          sym.compare(0, prefix.name.size(), prefix.name) == 0) {
        auto rest =
            by_alias_.find(std::string_view(sym).substr(prefix.name.size()));
        if (rest != by_alias_.end() && entries_[rest->second].prefixable) {
          UnitExpr u = entries_[rest->second].unit;
          u.canonical_name = prefix.name + u.canonical_name;
          u.si_scale *= prefix.factor;
          return u;
        }
      }
    }
    return std::nullopt;
  }

  // All registered units of the given dimension, in registration order,
  // minus the canonical names in `exclude`.
  std::vector<UnitExpr> units_of_dimension(
      const DimensionVector& dim,
      const std::vector<std::string>& exclude = {}) const {
    std::vector<UnitExpr> out;
    for (const auto& e : entries_) {
      if (e.unit.dimension() != dim) continue;
      if (std::find(exclude.begin(), exclude.end(), e.unit.canonical_name) !=
          exclude.end())
        continue;
      out.push_back(e.unit);
    }
    return out;
  }

  const std::vector<Entry>& entries() const { return entries_; }

  static const UnitRegistry& builtin();

  // Loads a registry from the documented config format:
  //   unit <name> <expansion|-> <si_scale> prefixable=<yes|no> [aliases=a,b]
  // where <expansion> is a '*'-joined list of base factors like m^1*s^-2.
  static UnitRegistry parse_config(std::istream& in) {
    UnitRegistry reg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view v = text::trim(line);
      if (v.empty() || v[0] == '#') continue;
      std::istringstream fields{std::string(v)};
      std::string kw, name, expansion, scale_str;
      fields >> kw >> name >> expansion >> scale_str;
      if (kw != "unit" || name.empty() || expansion.empty() ||
          scale_str.empty())
        throw FormatError("units config line " + std::to_string(line_no) +
                          ": expected 'unit <name> <expansion> <scale> ...'");
      std::vector<UnitFactor> factors;
      if (expansion != "-") {
        for (auto part : text::split(expansion, '*')) {
          std::size_t caret = part.find('^');
          std::string base(part.substr(
              0, caret == std::string_view::npos ? part.size() : caret));
          Rational e(1);
          if (caret != std::string_view::npos) {
            auto parsed = Rational::parse(part.substr(caret + 1));
            if (!parsed)
              throw FormatError("units config line " +
                                std::to_string(line_no) + ": bad exponent");
            e = *parsed;
          }
          if (!base_axis(base))
            throw FormatError("units config line " + std::to_string(line_no) +
                              ": unknown base unit " + base);
          factors.push_back({base, e});
        }
      }
      double scale = 0;
      try {
        scale = std::stod(scale_str);
      } catch (const std::exception&) {
        throw FormatError("units config line " + std::to_string(line_no) +
                          ": bad scale " + scale_str);
      }
      if (!(scale > 0))
        throw FormatError("units config line " + std::to_string(line_no) +
                          ": si_scale must be positive");
      bool prefixable = false;
      std::vector<std::string> aliases;
      std::string opt;
      while (fields >> opt) {
        if (opt == "prefixable=yes")
          prefixable = true;
        else if (opt == "prefixable=no")
          prefixable = false;
        else if (opt.rfind("aliases=", 0) == 0) {
          for (auto a : text::split(std::string_view(opt).substr(8), ','))
            if (!a.empty()) aliases.emplace_back(a);
        } else {
          throw FormatError("units config line " + std::to_string(line_no) +
                            ": unknown option " + opt);
        }
      }
      reg.add(name, std::move(factors), scale, prefixable, std::move(aliases));
    }
    return reg;
  }

  static UnitRegistry load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open unit registry: " + path);
    return parse_config(in);
  }

 private:
  // Folds the Greek mu into the micro sign so both spellings of µm hit the
  // same alias.
  static std::string normalize_symbol(std::string_view symbol) {
    std::string out;
    out.reserve(symbol.size());
    std::size_t i = 0;
    while (i < symbol.size()) {
      std::size_t len = 0;
      char32_t cp = text::decode_utf8(symbol, i, len);
      if (cp == 0x03BC) cp = 0x00B5;
      text::encode_utf8(cp, out);
      i += len;
    }
    return out;
  }

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::map<std::string, std::size_t, std::less<>> by_alias_;
};

inline const UnitRegistry& UnitRegistry::builtin() {
  static const UnitRegistry reg = [] {
    UnitRegistry r;
    using F = std::vector<UnitFactor>;
    const Rational one(1), two(2), three(3), four(4);
    // SI base units.
    r.add("meter", F{{"m", one}}, 1.0, true, {"m", "metre"});
    r.add("second", F{{"s", one}}, 1.0, true, {"s", "sec"});
    r.add("gram", F{{"kg", one}}, 1e-3, true, {"g"});
    r.add("ampere", F{{"A", one}}, 1.0, true, {"A", "amp"});
    r.add("milliampere", F{{"A", one}}, 1e-3, false, {"mA"});
    r.add("microampere", F{{"A", one}}, 1e-6, false, {"µA", "uA"});
    r.add("kelvin", F{{"K", one}}, 1.0, true, {"K"});
    r.add("mole", F{{"mol", one}}, 1.0, true, {"mol"});
    r.add("candela", F{{"cd", one}}, 1.0, true, {"cd"});
    // Common length units registered first-class so they participate as
    // same-dimension peers with stable canonical names.
    r.add("kilometer", F{{"m", one}}, 1e3, false, {"km"});
    r.add("centimeter", F{{"m", one}}, 1e-2, false, {"cm"});
    r.add("millimeter", F{{"m", one}}, 1e-3, false, {"mm"});
    r.add("micrometer", F{{"m", one}}, 1e-6, false, {"µm", "um"});
    r.add("micron", F{{"m", one}}, 1e-6, false);
    r.add("nanometer", F{{"m", one}}, 1e-9, false, {"nm"});
    r.add("picometer", F{{"m", one}}, 1e-12, false, {"pm"});
    r.add("angstrom", F{{"m", one}}, 1e-10, false, {"Å", "Angstrom"});
    r.add("parsec", F{{"m", one}}, 3.0856775814913673e16, true, {"pc"});
    // Named SI derived units.
    r.add("hertz", F{{"s", -one}}, 1.0, true, {"Hz"});
    r.add("newton", F{{"kg", one}, {"m", one}, {"s", -two}}, 1.0, true, {"N"});
    r.add("pascal", F{{"kg", one}, {"m", -one}, {"s", -two}}, 1.0, true,
          {"Pa"});
    r.add("joule", F{{"kg", one}, {"m", two}, {"s", -two}}, 1.0, true, {"J"});
    r.add("watt", F{{"kg", one}, {"m", two}, {"s", -three}}, 1.0, true, {"W"});
    r.add("coulomb", F{{"A", one}, {"s", one}}, 1.0, true, {"C"});
    r.add("volt", F{{"kg", one}, {"m", two}, {"s", -three}, {"A", -one}}, 1.0,
          true, {"V"});
    r.add("farad", F{{"A", two}, {"s", four}, {"kg", -one}, {"m", -two}}, 1.0,
          true, {"F"});
    r.add("ohm", F{{"kg", one}, {"m", two}, {"s", -three}, {"A", -two}}, 1.0,
          true, {"Ω"});
    r.add("siemens", F{{"A", two}, {"s", three}, {"kg", -one}, {"m", -two}},
          1.0, true, {"S"});
    r.add("weber", F{{"kg", one}, {"m", two}, {"s", -two}, {"A", -one}}, 1.0,
          true, {"Wb"});
    r.add("tesla", F{{"kg", one}, {"s", -two}, {"A", -one}}, 1.0, true, {"T"});
    r.add("henry", F{{"kg", one}, {"m", two}, {"s", -two}, {"A", -two}}, 1.0,
          true, {"H"});
    r.add("lumen", F{{"cd", one}}, 1.0, true, {"lm"});
    r.add("lux", F{{"cd", one}, {"m", -two}}, 1.0, true, {"lx"});
    r.add("becquerel", F{{"s", -one}}, 1.0, false, {"Bq"});
    // Laboratory and astronomy units.
    r.add("electronvolt", F{{"kg", one}, {"m", two}, {"s", -two}},
          1.602176634e-19, true, {"eV"});
    r.add("liter", F{{"m", three}}, 1e-3, true, {"L", "l", "litre"});
    r.add("bar", F{{"kg", one}, {"m", -one}, {"s", -two}}, 1e5, true);
    r.add("atmosphere", F{{"kg", one}, {"m", -one}, {"s", -two}}, 101325.0,
          false, {"atm"});
    r.add("torr", F{{"kg", one}, {"m", -one}, {"s", -two}},
          101325.0 / 760.0, false, {"Torr"});
    r.add("dalton", F{{"kg", one}}, 1.66053906660e-27, true, {"Da"});
    r.add("minute", F{{"s", one}}, 60.0, false, {"min"});
    r.add("hour", F{{"s", one}}, 3600.0, false, {"h", "hr"});
    r.add("day", F{{"s", one}}, 86400.0, false, {"d"});
    r.add("year", F{{"s", one}}, 3.15576e7, false, {"yr"});
    r.add("erg", F{{"kg", one}, {"m", two}, {"s", -two}}, 1e-7, false);
    r.add("dyne", F{{"kg", one}, {"m", one}, {"s", -two}}, 1e-5, false,
          {"dyn"});
    r.add("gauss", F{{"kg", one}, {"s", -two}, {"A", -one}}, 1e-4, false,
          {"G"});
    r.add("calorie", F{{"kg", one}, {"m", two}, {"s", -two}}, 4.184, true,
          {"cal"});
    r.add("jansky", F{{"kg", one}, {"s", -two}}, 1e-26, true, {"Jy"});
    // Dimensionless units.
    r.add("radian", F{}, 1.0, false, {"rad"});
    r.add("steradian", F{}, 1.0, false, {"sr"});
    r.add("degree", F{}, 0.017453292519943295, false, {"deg", "°"});
    r.add("percent", F{}, 1e-2, false, {"%"});
    r.add("ppm", F{}, 1e-6, false);
    r.add("ppb", F{}, 1e-9, false);
    return r;
  }();
  return reg;
}

// Maps a surface symbol to the units that share it. Candidate lists keep
// their configured order (it drives mask-token layout); every list must
// have pairwise-distinct dimensions or disambiguation by dimension would
// be ill-posed.
class AmbiguityTable {
 public:
  void add(const std::string& surface, std::vector<std::string> candidates,
           const UnitRegistry& reg) {
    if (candidates.size() < 2)
      throw FormatError("ambiguity entry for '" + surface +
                        "' needs at least two candidates");
    std::vector<DimensionVector> dims;
    for (const auto& name : candidates) {
      const UnitExpr* u = reg.find_canonical(name);
      if (!u)
        throw FormatError("ambiguity candidate '" + name +
                          "' is not in the unit registry");
      for (const auto& d : dims)
        if (d == u->dimension())
          throw FormatError("ambiguity entry for '" + surface +
                            "' has candidates of equal dimension");
      dims.push_back(u->dimension());
    }
    table_[surface] = std::move(candidates);
  }

  const std::vector<std::string>* find(std::string_view surface) const {
    auto it = table_.find(surface);
    return it == table_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return table_.size(); }

  static const AmbiguityTable& builtin() {
    static const AmbiguityTable table = [] {
      AmbiguityTable t;
      const auto& reg = UnitRegistry::builtin();
      t.add("A", {"angstrom", "ampere"}, reg);
      t.add("Å", {"angstrom", "ampere"}, reg);
      return t;
    }();
    return table;
  }

  // Config format: one entry per line, `ambiguous <surface> = <a>, <b>`.
  static AmbiguityTable parse_config(std::istream& in,
                                     const UnitRegistry& reg) {
    AmbiguityTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view v = text::trim(line);
      if (v.empty() || v[0] == '#') continue;
      const std::string_view kw = "ambiguous";
      if (v.substr(0, kw.size()) != kw)
        throw FormatError("ambiguity config line " + std::to_string(line_no) +
                          ": expected 'ambiguous <surface> = <a>, <b>'");
      v = text::trim(v.substr(kw.size()));
      std::size_t eq = v.find('=');
      if (eq == std::string_view::npos)
        throw FormatError("ambiguity config line " + std::to_string(line_no) +
                          ": missing '='");
      std::string surface{text::trim(v.substr(0, eq))};
      std::vector<std::string> candidates;
      for (auto part : text::split(v.substr(eq + 1), ','))
        if (!text::trim(part).empty())
          candidates.emplace_back(text::trim(part));
      t.add(surface, std::move(candidates), reg);
    }
    return t;
  }

  static AmbiguityTable load(const std::string& path,
                             const UnitRegistry& reg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ambiguity table: " + path);
    return parse_config(in, reg);
  }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> table_;
};

enum class UnitParseKind { not_a_unit, resolved, ambiguous };

struct UnitParse {
  UnitParseKind kind = UnitParseKind::not_a_unit;
  UnitExpr unit;                    // valid when resolved
  std::vector<UnitExpr> candidates;  // valid when ambiguous, table order

  bool is_unit() const { return kind != UnitParseKind::not_a_unit; }
};

namespace detail {

struct UnitToken {
  std::string symbol;
  Rational exponent{1};
};

// Splits one side of a quotient into power factors. Separators are '*',
// '·' and '⋅'; exponents use '^'.
inline bool lex_segment(std::string_view seg, bool denominator,
                        std::vector<UnitToken>& out) {
  std::string norm;
  std::size_t i = 0;
  while (i < seg.size()) {
    std::size_t len = 0;
    char32_t cp = text::decode_utf8(seg, i, len);
    if (cp == 0x00B7 || cp == 0x22C5)
      norm += '*';
    else
      norm.append(seg.substr(i, len));
    i += len;
  }
  for (auto factor : text::split(norm, '*')) {
    if (factor.empty()) return false;
    std::size_t caret = factor.find('^');
    std::string symbol(
        factor.substr(0, caret == std::string_view::npos ? factor.size()
                                                         : caret));
    Rational e(1);
    if (caret != std::string_view::npos) {
      std::string_view es = factor.substr(caret + 1);
      if (es.size() >= 2 && es.front() == '(' && es.back() == ')')
        es = es.substr(1, es.size() - 2);
      auto parsed = Rational::parse(es);
      if (!parsed) return false;
      e = *parsed;
    }
    if (symbol.empty()) return false;
    if (denominator) e = -e;
    out.push_back({std::move(symbol), e});
  }
  return true;
}

}  // namespace detail

// Parses a unit expression: single symbols, SI-prefixed symbols, products,
// quotients and integer (or rational) powers. If the whole surface form is
// listed in the ambiguity table, the candidate list is returned instead of
// a resolution. Unknown symbols yield `not_a_unit`.
inline UnitParse parse_unit(std::string_view input_text,
                            const UnitRegistry& reg,
                            const AmbiguityTable* ambiguity = nullptr) {
  UnitParse result;
  std::string_view stripped = text::trim(input_text);
  if (stripped.empty()) return result;

  if (ambiguity != nullptr) {
    if (const auto* candidates = ambiguity->find(stripped)) {
      result.kind = UnitParseKind::ambiguous;
      for (const auto& name : *candidates) {
        const UnitExpr* u = reg.find_canonical(name);
        if (u) result.candidates.push_back(*u);
      }
      if (result.candidates.size() >= 2) return result;
      result = UnitParse{};  // table entry unusable; fall through
    }
  }

  const std::string folded = text::fold_superscripts(stripped);
  std::vector<detail::UnitToken> tokens;
  bool denominator = false;
  for (auto segment : text::split(folded, '/')) {
    if (segment.empty()) return UnitParse{};
    if (!detail::lex_segment(segment, denominator, tokens))
      return UnitParse{};
    denominator = true;  // everything after the first '/' divides
  }
  if (tokens.empty()) return UnitParse{};

  UnitExpr combined;
  std::string name;
  bool first = true;
  for (const auto& tok : tokens) {
    auto resolved = reg.resolve_symbol(tok.symbol);
    if (!resolved) return UnitParse{};
    const UnitExpr powered = resolved->pow(tok.exponent);
    const bool negated = !first && tok.exponent.num() < 0;
    const Rational shown = negated ? -tok.exponent : tok.exponent;
    std::string piece = resolved->canonical_name;
    if (shown != Rational(1)) piece += "^" + shown.str();
    if (first) {
      combined = powered;
      name = std::move(piece);
      first = false;
    } else {
      combined.factors.insert(combined.factors.end(), powered.factors.begin(),
                              powered.factors.end());
      detail::merge_factors(combined.factors);
      combined.si_scale *= powered.si_scale;
      name += negated ? "/" : "·";
      name += piece;
    }
  }
  combined.canonical_name = std::move(name);

  result.kind = UnitParseKind::resolved;
  result.unit = std::move(combined);
  return result;
}

// Converts `value` between units of equal dimension. Uncertainties scale by
// the same factor, so callers convert them with the same call.
inline double convert(double value, const UnitExpr& from, const UnitExpr& to) {
  if (from.dimension() != to.dimension())
    throw DimensionError("cannot convert " + from.canonical_name + " [" +
                         from.dimension().str() + "] to " + to.canonical_name +
                         " [" + to.dimension().str() + "]");
  return value * (from.si_scale / to.si_scale);
}

}  // namespace dibmine::units
