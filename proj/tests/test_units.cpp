#include <catch2/catch.hpp>

#include <random>
#include <sstream>

#include "dibmine/units.hpp"

using namespace dibmine;
using namespace dibmine::units;

TEST_CASE("registry lookup resolves nm to nanometer") {
  const auto& reg = UnitRegistry::builtin();
  const auto parsed = parse_unit("nm", reg);
  REQUIRE(parsed.kind == UnitParseKind::resolved);
  CHECK(parsed.unit.canonical_name == "nanometer");
  CHECK(parsed.unit.si_scale == Approx(1e-9));
  CHECK(parsed.unit.dimension() == DimensionVector::length());
}

TEST_CASE("A is ambiguous between angstrom and ampere") {
  const auto& reg = UnitRegistry::builtin();
  const auto& amb = AmbiguityTable::builtin();
  for (const char* surface : {"A", "Å"}) {
    const auto parsed = parse_unit(surface, reg, &amb);
    REQUIRE(parsed.kind == UnitParseKind::ambiguous);
    REQUIRE(parsed.candidates.size() == 2);
    CHECK(parsed.candidates[0].canonical_name == "angstrom");
    CHECK(parsed.candidates[1].canonical_name == "ampere");
  }
  // Without the table the registry alias wins.
  const auto raw = parse_unit("A", reg);
  REQUIRE(raw.kind == UnitParseKind::resolved);
  CHECK(raw.unit.canonical_name == "ampere");
}

TEST_CASE("compound expression km/s^2") {
  const auto& reg = UnitRegistry::builtin();
  const auto parsed = parse_unit("km/s^2", reg);
  REQUIRE(parsed.kind == UnitParseKind::resolved);
  // Hand-computed: km = 1000 m, /s^2 leaves the scale at 1000.
  CHECK(parsed.unit.si_scale == Approx(1000.0));
  DimensionVector expected;
  expected.exponents[DimensionVector::kLength] = Rational(1);
  expected.exponents[DimensionVector::kTime] = Rational(-2);
  CHECK(parsed.unit.dimension() == expected);
  CHECK(parsed.unit.canonical_name == "kilometer/second^2");
}

TEST_CASE("more parser shapes") {
  const auto& reg = UnitRegistry::builtin();
  CHECK(parse_unit("m/s", reg).kind == UnitParseKind::resolved);
  CHECK(parse_unit("keV", reg).unit.si_scale ==
        Approx(1.602176634e-19 * 1e3));
  CHECK(parse_unit("MHz", reg).unit.si_scale == Approx(1e6));
  CHECK(parse_unit("µm", reg).unit.canonical_name == "micrometer");
  CHECK(parse_unit("μm", reg).unit.canonical_name == "micrometer");
  CHECK(parse_unit("kg·m/s^2", reg).unit.dimension() ==
        parse_unit("N", reg).unit.dimension());
  CHECK(parse_unit("s⁻¹", reg).unit.dimension() ==
        DimensionVector::base(DimensionVector::kTime, Rational(-1)));
  CHECK_FALSE(parse_unit("notaunit", reg).is_unit());
  CHECK_FALSE(parse_unit("", reg).is_unit());
  CHECK_FALSE(parse_unit("q/x", reg).is_unit());
}

TEST_CASE("dimension_of base cases") {
  const auto& reg = UnitRegistry::builtin();
  CHECK(dimension_of(*reg.find_canonical("angstrom")) ==
        DimensionVector::length());
  CHECK(dimension_of(*reg.find_canonical("ampere")) ==
        DimensionVector::current());
  CHECK(dimension_of(*reg.find_canonical("ppm")).is_dimensionless());
}

TEST_CASE("convert reproduces the angstrom/micron equivalence") {
  const auto& reg = UnitRegistry::builtin();
  const auto& angstrom = *reg.find_canonical("angstrom");
  const auto& micron = *reg.find_canonical("micron");
  const auto& nanometer = *reg.find_canonical("nanometer");
  CHECK(convert(1500.0, angstrom, micron) ==
        Approx(0.15).epsilon(1e-12));
  CHECK(convert(1.0, nanometer, angstrom) == Approx(10.0).epsilon(1e-12));
  CHECK(convert(42.25, micron, micron) == 42.25);
}

TEST_CASE("convert rejects mismatched dimensions") {
  const auto& reg = UnitRegistry::builtin();
  const auto& angstrom = *reg.find_canonical("angstrom");
  const auto& ampere = *reg.find_canonical("ampere");
  try {
    convert(1.0, angstrom, ampere);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("angstrom") != std::string::npos);
    CHECK(what.find("ampere") != std::string::npos);
    CHECK(what.find("L^1") != std::string::npos);
    CHECK(what.find("I^1") != std::string::npos);
  }
}

TEST_CASE("units_of_dimension enumerations") {
  const auto& reg = UnitRegistry::builtin();
  const auto lengths = reg.units_of_dimension(DimensionVector::length());
  CHECK(lengths.size() >= 4);
  auto has = [&](const char* name) {
    for (const auto& u : lengths)
      if (u.canonical_name == name) return true;
    return false;
  };
  CHECK(has("meter"));
  CHECK(has("angstrom"));
  CHECK(has("micron"));
  CHECK(has("nanometer"));

  for (const auto& u :
       reg.units_of_dimension(DimensionVector::dimensionless()))
    CHECK(u.dimension().is_dimensionless());

  DimensionVector odd;
  odd.exponents[DimensionVector::kTemperature] = Rational(5);
  CHECK(reg.units_of_dimension(odd).empty());

  const auto excluded = reg.units_of_dimension(DimensionVector::length(),
                                               {"meter", "angstrom"});
  CHECK_FALSE(std::any_of(excluded.begin(), excluded.end(), [](const auto& u) {
    return u.canonical_name == "meter" || u.canonical_name == "angstrom";
  }));
}

TEST_CASE("round-trip conversion over all same-dimension pairs") {
  const auto& reg = UnitRegistry::builtin();
  const auto& entries = reg.entries();
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> value_dist(0.1, 1e6);
  for (const auto& a : entries)
    for (const auto& b : entries) {
      if (a.unit.dimension() != b.unit.dimension()) continue;
      const double x = value_dist(gen);
      const double back = convert(convert(x, a.unit, b.unit), b.unit, a.unit);
      CHECK(back == Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("dimension_of is additive over unit products") {
  const auto& reg = UnitRegistry::builtin();
  const auto& entries = reg.entries();
  std::mt19937 gen(7);
  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& u = entries[pick(gen)].unit;
    const auto& v = entries[pick(gen)].unit;
    CHECK(dimension_of(u * v) == dimension_of(u) + dimension_of(v));
    CHECK(dimension_of(u / v) == dimension_of(u) - dimension_of(v));
  }
}

TEST_CASE("ambiguity table rejects same-dimension candidates") {
  const auto& reg = UnitRegistry::builtin();
  std::istringstream bad("ambiguous x = meter, angstrom\n");
  CHECK_THROWS_AS(AmbiguityTable::parse_config(bad, reg), FormatError);

  std::istringstream unknown("ambiguous x = meter, notaunit\n");
  CHECK_THROWS_AS(AmbiguityTable::parse_config(unknown, reg), FormatError);

  std::istringstream single("ambiguous x = meter\n");
  CHECK_THROWS_AS(AmbiguityTable::parse_config(single, reg), FormatError);

  std::istringstream good("# comment\nambiguous A = angstrom, ampere\n");
  const auto table = AmbiguityTable::parse_config(good, reg);
  REQUIRE(table.find("A") != nullptr);
  CHECK(table.find("A")->size() == 2);
}

TEST_CASE("registry config round-trips a custom unit") {
  std::istringstream cfg(
      "# custom registry\n"
      "unit meter m 1 prefixable=yes aliases=m\n"
      "unit second s 1 prefixable=yes aliases=s\n"
      "unit furlong m 201.168 prefixable=no aliases=fur\n"
      "unit knot m^1*s^-1 0.514444 prefixable=no\n");
  const auto reg = UnitRegistry::parse_config(cfg);
  REQUIRE(reg.find_canonical("furlong") != nullptr);
  CHECK(reg.resolve_symbol("fur")->si_scale == Approx(201.168));
  CHECK(reg.resolve_symbol("km")->si_scale == Approx(1000.0));
  const auto knot = reg.find_canonical("knot");
  DimensionVector speed;
  speed.exponents[DimensionVector::kLength] = Rational(1);
  speed.exponents[DimensionVector::kTime] = Rational(-1);
  CHECK(knot->dimension() == speed);

  std::istringstream bad("unit broken zz 1 prefixable=no\n");
  CHECK_THROWS_AS(UnitRegistry::parse_config(bad), FormatError);
}

TEST_CASE("shipped config files load") {
  const std::string data = DIBMINE_DATA_DIR;
  const auto reg = UnitRegistry::load(data + "/units.conf");
  REQUIRE(reg.find_canonical("inch") != nullptr);
  CHECK(convert(1.0, *reg.find_canonical("foot"),
                *reg.find_canonical("inch")) == Approx(12.0));
  const auto amb = AmbiguityTable::load(data + "/ambiguity.conf",
                                        UnitRegistry::builtin());
  REQUIRE(amb.find("Å") != nullptr);
  CHECK(amb.find("Å")->front() == "angstrom");
}

TEST_CASE("rational arithmetic stays exact") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK((Rational(3, 2) * Rational(2, 3)) == Rational(1));
  CHECK(Rational::parse("3/2") == Rational(3, 2));
  CHECK(Rational::parse("-2") == Rational(-2));
  CHECK_FALSE(Rational::parse("x").has_value());
}
