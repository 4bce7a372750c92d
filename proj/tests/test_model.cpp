#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vitalfuse/model.hpp"

using namespace vf::model;

namespace {
std::filesystem::path temp_file(const char* name) {
  auto p = std::filesystem::temp_directory_path() / "vf_model_tests";
  std::filesystem::create_directories(p);
  return p / name;
}
}  // namespace

TEST_CASE("kind and group tokens round-trip") {
  for (auto k : kAllVitalKinds) {
    auto back = kind_from_token(kind_token(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
  }
  CHECK(!kind_from_token("pulse").has_value());
  for (auto g : kAllVitalGroups) {
    auto back = group_from_token(group_token(g));
    REQUIRE(back.has_value());
    CHECK(*back == g);
  }
  CHECK(group_of(VitalKind::BloodPressureSystolic) == VitalGroup::BloodPressure);
  CHECK(group_of(VitalKind::BloodPressureDiastolic) == VitalGroup::BloodPressure);
  CHECK(group_of(VitalKind::HeartRate) == VitalGroup::Heart);
  CHECK(group_of(VitalKind::RespiratoryRate) == VitalGroup::Respiratory);
  CHECK(group_of(VitalKind::BodyTemperature) == VitalGroup::Temperature);
  CHECK(group_of(VitalKind::BloodPh) == VitalGroup::BloodPh);
}

TEST_CASE("age brackets partition and boundaries resolve upward") {
  CHECK(bracket(17) == AgeBracket::Under18);
  CHECK(bracket(0) == AgeBracket::Under18);
  CHECK(bracket(18) == AgeBracket::B18_25);
  CHECK(bracket(25) == AgeBracket::B18_25);
  CHECK(bracket(26) == AgeBracket::B28_35);
  CHECK(bracket(30) == AgeBracket::B28_35);
  CHECK(bracket(35) == AgeBracket::B28_35);
  CHECK(bracket(36) == AgeBracket::B36_45);
  CHECK(bracket(45) == AgeBracket::B36_45);  // the double-listed age goes young
  CHECK(bracket(46) == AgeBracket::B45_55);
  CHECK(bracket(56) == AgeBracket::B56_65);
  CHECK(bracket(65) == AgeBracket::B56_65);
  CHECK(bracket(66) == AgeBracket::Over65);
  CHECK(bracket(130) == AgeBracket::Over65);
  CHECK_THROWS_AS(bracket(-1), std::invalid_argument);
  CHECK_THROWS_AS(bracket(131), std::invalid_argument);
}

TEST_CASE("every published range cell is retrievable bit-exact") {
  const auto& r = NormalRanges::defaults();
  const Interval heart[7] = {{70, 73}, {70, 73}, {71, 74}, {71, 75},
                             {72, 76}, {72, 75}, {70, 73}};
  const Interval resp[7] = {{25, 35}, {18, 20}, {10, 22}, {10, 22},
                            {10, 22}, {10, 22}, {10, 22}};
  const double sys_hi[7] = {120, 120, 134, 137, 142, 144, 144};
  const double dia_hi[7] = {80, 80, 85, 87, 89, 90, 90};
  for (int b = 0; b < kAgeBracketCount; ++b) {
    auto ab = static_cast<AgeBracket>(b);
    CHECK(r.range(VitalKind::HeartRate, ab) == heart[b]);
    CHECK(r.range(VitalKind::RespiratoryRate, ab) == resp[b]);
    CHECK(r.range(VitalKind::BloodPressureSystolic, ab) ==
          Interval{90, sys_hi[b]});
    CHECK(r.range(VitalKind::BloodPressureDiastolic, ab) ==
          Interval{60, dia_hi[b]});
    CHECK(r.range(VitalKind::BodyTemperature, ab) == Interval{36.1, 37.2});
    CHECK(r.range(VitalKind::BloodPh, ab) == Interval{7.35, 7.45});
  }
}

TEST_CASE("range lookups by age match the published cells") {
  const auto& r = NormalRanges::defaults();
  CHECK(r.range_for_age(VitalKind::BloodPh, 40) == Interval{7.35, 7.45});
  CHECK(r.range_for_age(VitalKind::HeartRate, 20) == Interval{70, 73});
  CHECK(r.range_for_age(VitalKind::RespiratoryRate, 20) == Interval{18, 20});
}

TEST_CASE("set_range validates") {
  NormalRanges r = NormalRanges::defaults();
  CHECK_THROWS_AS(r.set_range(VitalKind::HeartRate, AgeBracket::B18_25, {73, 70}),
                  std::invalid_argument);
  CHECK_THROWS_AS(r.set_range(VitalKind::HeartRate, AgeBracket::B18_25, {70, 70}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      r.set_range(VitalKind::HeartRate, AgeBracket::B18_25,
                  {0, std::numeric_limits<double>::infinity()}),
      std::invalid_argument);
}

TEST_CASE("ranges save/load round-trip and overrides apply") {
  auto file = temp_file("ranges.conf");
  NormalRanges r = NormalRanges::defaults();
  r.set_range(VitalKind::HeartRate, AgeBracket::B28_35, {60, 100});
  r.set_version(3);
  r.save(file);

  auto back = NormalRanges::load(file);
  CHECK(back.version() == 3);
  for (auto k : kAllVitalKinds)
    for (int b = 0; b < kAgeBracketCount; ++b)
      CHECK(back.range(k, static_cast<AgeBracket>(b)) ==
            r.range(k, static_cast<AgeBracket>(b)));

  SUBCASE("partial file overrides only its keys") {
    auto partial = temp_file("partial.conf");
    std::ofstream out(partial);
    out << "# comment\nheart_rate.18_25 = 50,110\n";
    out.close();
    auto loaded = NormalRanges::load(partial);
    CHECK(loaded.range(VitalKind::HeartRate, AgeBracket::B18_25) ==
          Interval{50, 110});
    CHECK(loaded.range(VitalKind::BloodPh, AgeBracket::B18_25) ==
          Interval{7.35, 7.45});
  }
  SUBCASE("unknown key rejected") {
    auto bad = temp_file("bad.conf");
    std::ofstream out(bad);
    out << "pulse.18_25 = 50,110\n";
    out.close();
    CHECK_THROWS_AS(NormalRanges::load(bad), std::invalid_argument);
  }
  SUBCASE("inverted interval rejected") {
    auto bad = temp_file("bad2.conf");
    std::ofstream out(bad);
    out << "heart_rate.18_25 = 110,50\n";
    out.close();
    CHECK_THROWS_AS(NormalRanges::load(bad), std::invalid_argument);
  }
}

TEST_CASE("band thresholds follow the normalized overshoot") {
  const Interval iv{10, 20};  // width 10
  CHECK(band_in(iv, 10) == Band::Normal);
  CHECK(band_in(iv, 20) == Band::Normal);
  CHECK(band_in(iv, 15) == Band::Normal);
  // above: d = (v-20)/10
  CHECK(band_in(iv, 22.5) == Band::Medium);    // d = 0.25
  CHECK(band_in(iv, 22.6) == Band::High);      // d = 0.26
  CHECK(band_in(iv, 27.5) == Band::High);      // d = 0.75
  CHECK(band_in(iv, 27.6) == Band::Highest);   // d = 0.76
  // below: d = (10-v)/10
  CHECK(band_in(iv, 7.5) == Band::Medium);
  CHECK(band_in(iv, 7.4) == Band::Low);
  CHECK(band_in(iv, 2.5) == Band::Low);
  CHECK(band_in(iv, 2.4) == Band::Lowest);
}

TEST_CASE("band(kind, value, age) agrees with range membership") {
  const auto& r = NormalRanges::defaults();
  CHECK(band(VitalKind::BodyTemperature, 36.8, 30, r) == Band::Normal);
  for (auto k : kAllVitalKinds) {
    for (int age : {0, 17, 18, 25, 26, 35, 36, 45, 46, 55, 56, 65, 66, 99}) {
      auto iv = r.range_for_age(k, age);
      for (double v : {iv.lo, iv.hi, (iv.lo + iv.hi) / 2, iv.lo - 0.01,
                       iv.hi + 0.01, iv.hi + 10 * iv.width()}) {
        const bool normal = band(k, v, age, r) == Band::Normal;
        CHECK(normal == iv.contains(v));
      }
    }
  }
}

TEST_CASE("band ranks and worse_band") {
  CHECK(band_rank(Band::Normal) == 0);
  CHECK(band_rank(Band::Medium) == 1);
  CHECK(band_rank(Band::High) == 2);
  CHECK(band_rank(Band::Low) == 2);
  CHECK(band_rank(Band::Highest) == 3);
  CHECK(band_rank(Band::Lowest) == 3);
  CHECK(worse_band(Band::Normal, Band::Medium) == Band::Medium);
  CHECK(worse_band(Band::Highest, Band::Medium) == Band::Highest);
  CHECK(worse_band(Band::Low, Band::High) == Band::Low);  // equal rank keeps a
  CHECK(worse_band(Band::High, Band::Low) == Band::High);
}

TEST_CASE("band names round-trip") {
  for (int i = 0; i < kBandCount; ++i) {
    auto b = static_cast<Band>(i);
    auto back = band_from_name(band_name(b));
    REQUIRE(back.has_value());
    CHECK(*back == b);
  }
  for (auto r : {RiskLevel::Low, RiskLevel::Medium, RiskLevel::High,
                 RiskLevel::Highest}) {
    auto back = risk_from_name(risk_name(r));
    REQUIRE(back.has_value());
    CHECK(*back == r);
  }
}

TEST_CASE("band pattern codes are a 7776-point bijection") {
  for (int code = 0; code < 7776; ++code) {
    auto bv = decode_bands(code);
    CHECK(encode_bands(bv) == code);
  }
  BandedVitals bv;
  bv[VitalGroup::Temperature] = Band::Highest;
  auto code = encode_bands(bv);
  CHECK(decode_bands(code) == bv);
}

TEST_CASE("risk levels are totally ordered") {
  CHECK(risk_rank(RiskLevel::Low) < risk_rank(RiskLevel::Medium));
  CHECK(risk_rank(RiskLevel::Medium) < risk_rank(RiskLevel::High));
  CHECK(risk_rank(RiskLevel::High) < risk_rank(RiskLevel::Highest));
}
