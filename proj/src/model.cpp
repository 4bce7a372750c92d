#include "vitalfuse/model.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace vf::model {

namespace {

constexpr std::array<std::string_view, kVitalKindCount> kKindTokens = {
    "heart_rate",   "respiratory_rate", "bp_systolic",
    "bp_diastolic", "body_temperature", "blood_ph",
};

constexpr std::array<std::string_view, kVitalGroupCount> kGroupTokens = {
    "respiratory", "blood_ph", "heart", "blood_pressure", "temperature",
};

constexpr std::array<std::string_view, kAgeBracketCount> kBracketTokens = {
    "under_18", "18_25", "28_35", "36_45", "45_55", "56_65", "over_65",
};

constexpr std::array<std::string_view, kBandCount> kBandNames = {
    "Lowest", "Low", "Normal", "Medium", "High", "Highest",
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view kind_token(VitalKind k) {
  return kKindTokens[static_cast<int>(k)];
}

std::optional<VitalKind> kind_from_token(std::string_view token) {
  for (int i = 0; i < kVitalKindCount; ++i)
    if (kKindTokens[i] == token) return static_cast<VitalKind>(i);
  return std::nullopt;
}

VitalGroup group_of(VitalKind k) {
  switch (k) {
    case VitalKind::HeartRate: return VitalGroup::Heart;
    case VitalKind::RespiratoryRate: return VitalGroup::Respiratory;
    case VitalKind::BloodPressureSystolic:
    case VitalKind::BloodPressureDiastolic: return VitalGroup::BloodPressure;
    case VitalKind::BodyTemperature: return VitalGroup::Temperature;
    case VitalKind::BloodPh: return VitalGroup::BloodPh;
  }
  throw std::invalid_argument("bad VitalKind");
}

std::string_view group_token(VitalGroup g) {
  return kGroupTokens[static_cast<int>(g)];
}

std::optional<VitalGroup> group_from_token(std::string_view token) {
  for (int i = 0; i < kVitalGroupCount; ++i)
    if (kGroupTokens[i] == token) return static_cast<VitalGroup>(i);
  return std::nullopt;
}

std::string_view bracket_token(AgeBracket b) {
  return kBracketTokens[static_cast<int>(b)];
}

AgeBracket bracket(int age_years) {
  if (age_years < 0 || age_years > 130)
    throw std::invalid_argument("age out of range [0,130]: " +
                                std::to_string(age_years));
  if (age_years < 18) return AgeBracket::Under18;
  if (age_years < 26) return AgeBracket::B18_25;
  if (age_years < 36) return AgeBracket::B28_35;
  if (age_years < 46) return AgeBracket::B36_45;
  if (age_years < 56) return AgeBracket::B45_55;
  if (age_years < 66) return AgeBracket::B56_65;
  return AgeBracket::Over65;
}

namespace {

// Published adult reference table. Respiratory rows above 18-25 reuse the
// broad 10-22 adult span; blood pressure cells are the textbook "top"
// readings, widened downward to the hypotension floor (90/60).
NormalRanges build_defaults() {
  NormalRanges r;
  const std::array<Interval, kAgeBracketCount> heart = {{
      {70, 73}, {70, 73}, {71, 74}, {71, 75}, {72, 76}, {72, 75}, {70, 73},
  }};
  const std::array<Interval, kAgeBracketCount> resp = {{
      {25, 35}, {18, 20}, {10, 22}, {10, 22}, {10, 22}, {10, 22}, {10, 22},
  }};
  const std::array<double, kAgeBracketCount> sys_hi = {120, 120, 134, 137,
                                                       142, 144, 144};
  const std::array<double, kAgeBracketCount> dia_hi = {80, 80, 85, 87,
                                                       89, 90, 90};
  for (int b = 0; b < kAgeBracketCount; ++b) {
    auto ab = static_cast<AgeBracket>(b);
    r.set_range(VitalKind::HeartRate, ab, heart[b]);
    r.set_range(VitalKind::RespiratoryRate, ab, resp[b]);
    r.set_range(VitalKind::BloodPressureSystolic, ab, {90, sys_hi[b]});
    r.set_range(VitalKind::BloodPressureDiastolic, ab, {60, dia_hi[b]});
    r.set_range(VitalKind::BodyTemperature, ab, {36.1, 37.2});
    r.set_range(VitalKind::BloodPh, ab, {7.35, 7.45});
  }
  return r;
}

}  // namespace

const NormalRanges& NormalRanges::defaults() {
  static const NormalRanges r = build_defaults();
  return r;
}

Interval NormalRanges::range(VitalKind k, AgeBracket b) const {
  return table_[static_cast<int>(k)][static_cast<int>(b)];
}

Interval NormalRanges::range_for_age(VitalKind k, int age_years) const {
  return range(k, bracket(age_years));
}

void NormalRanges::set_range(VitalKind k, AgeBracket b, Interval iv) {
  if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
    throw std::invalid_argument("range must satisfy lo < hi and be finite");
  table_[static_cast<int>(k)][static_cast<int>(b)] = iv;
}

NormalRanges NormalRanges::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open ranges file: " + file.string());
  NormalRanges r = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    key = trim(key);
    if (key.empty()) continue;
    if (eq == std::string::npos)
      throw std::invalid_argument("ranges line " + std::to_string(lineno) +
                                  ": missing '='");
    std::string val = trim(line.substr(eq + 1));
    if (key == "version") {
      r.version_ = std::stoi(val);
      continue;
    }
    auto dot = key.find('.');
    if (dot == std::string::npos)
      throw std::invalid_argument("ranges line " + std::to_string(lineno) +
                                  ": key must be kind.bracket or version");
    auto kind = kind_from_token(key.substr(0, dot));
    std::string_view brtok = std::string_view(key).substr(dot + 1);
    std::optional<AgeBracket> br;
    for (int i = 0; i < kAgeBracketCount; ++i)
      if (kBracketTokens[i] == brtok) br = static_cast<AgeBracket>(i);
    if (!kind || !br)
      throw std::invalid_argument("ranges line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    auto comma = val.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("ranges line " + std::to_string(lineno) +
                                  ": value must be lo,hi");
    Interval iv{std::stod(trim(val.substr(0, comma))),
                std::stod(trim(val.substr(comma + 1)))};
    r.set_range(*kind, *br, iv);
  }
  return r;
}

void NormalRanges::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write ranges file: " + file.string());
  out << "version = " << version_ << "\n";
  for (auto k : kAllVitalKinds) {
    for (int b = 0; b < kAgeBracketCount; ++b) {
      Interval iv = range(k, static_cast<AgeBracket>(b));
      out << kind_token(k) << '.' << kBracketTokens[b] << " = " << iv.lo << ','
          << iv.hi;
      if (k == VitalKind::RespiratoryRate && b >= 2)
        out << "  # adult span carried across older brackets";
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::string_view band_name(Band b) { return kBandNames[static_cast<int>(b)]; }

std::optional<Band> band_from_name(std::string_view name) {
  std::string n = lower(name);
  for (int i = 0; i < kBandCount; ++i)
    if (lower(kBandNames[i]) == n) return static_cast<Band>(i);
  return std::nullopt;
}

int band_rank(Band b) {
  switch (b) {
    case Band::Normal: return 0;
    case Band::Medium: return 1;
    case Band::High:
    case Band::Low: return 2;
    case Band::Highest:
    case Band::Lowest: return 3;
  }
  throw std::invalid_argument("bad Band");
}

Band worse_band(Band a, Band b) { return band_rank(b) > band_rank(a) ? b : a; }

Band band_in(const Interval& iv, double value) {
  const double w = iv.width();
  double d;
  bool above;
  if (value > iv.hi) {
    d = (value - iv.hi) / w;
    above = true;
  } else if (value < iv.lo) {
    d = (iv.lo - value) / w;
    above = false;
  } else {
    return Band::Normal;
  }
  if (d <= 0.25) return Band::Medium;
  if (d <= 0.75) return above ? Band::High : Band::Low;
  return above ? Band::Highest : Band::Lowest;
}

Band band(VitalKind k, double value, int age_years, const NormalRanges& ranges) {
  return band_in(ranges.range_for_age(k, age_years), value);
}

int encode_bands(const BandedVitals& bv) {
  int code = 0;
  for (int g = 0; g < kVitalGroupCount; ++g)
    code = code * kBandCount + static_cast<int>(bv.bands[g]);
  return code;
}

BandedVitals decode_bands(int code) {
  if (code < 0 || code >= 7776)
    throw std::invalid_argument("band code out of range");
  BandedVitals bv;
  for (int g = kVitalGroupCount - 1; g >= 0; --g) {
    bv.bands[g] = static_cast<Band>(code % kBandCount);
    code /= kBandCount;
  }
  return bv;
}

namespace {
constexpr std::array<std::string_view, 4> kRiskNames = {"Low", "Medium", "High",
                                                        "Highest"};
}

std::string_view risk_name(RiskLevel r) {
  return kRiskNames[static_cast<int>(r)];
}

std::optional<RiskLevel> risk_from_name(std::string_view name) {
  std::string n = lower(name);
  for (int i = 0; i < 4; ++i)
    if (lower(kRiskNames[i]) == n) return static_cast<RiskLevel>(i);
  return std::nullopt;
}

int risk_rank(RiskLevel r) { return static_cast<int>(r); }

}  // namespace vf::model
