#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

// Core domain vocabulary: vital kinds, patient samples, age brackets,
// age-dependent normal ranges, and deviation bands.

namespace vf::model {

enum class VitalKind {
  HeartRate,
  RespiratoryRate,
  BloodPressureSystolic,
  BloodPressureDiastolic,
  BodyTemperature,
  BloodPh,
};
inline constexpr int kVitalKindCount = 6;
inline constexpr std::array<VitalKind, kVitalKindCount> kAllVitalKinds = {
    VitalKind::HeartRate,           VitalKind::RespiratoryRate,
    VitalKind::BloodPressureSystolic, VitalKind::BloodPressureDiastolic,
    VitalKind::BodyTemperature,     VitalKind::BloodPh,
};

// Wire/config token, e.g. "heart_rate".
std::string_view kind_token(VitalKind k);
std::optional<VitalKind> kind_from_token(std::string_view token);

// The five monitored vital groups in fixed table order. Systolic and
// diastolic pressure collapse into one BloodPressure group.
enum class VitalGroup { Respiratory, BloodPh, Heart, BloodPressure, Temperature };
inline constexpr int kVitalGroupCount = 5;
inline constexpr std::array<VitalGroup, kVitalGroupCount> kAllVitalGroups = {
    VitalGroup::Respiratory, VitalGroup::BloodPh, VitalGroup::Heart,
    VitalGroup::BloodPressure, VitalGroup::Temperature,
};
VitalGroup group_of(VitalKind k);
std::string_view group_token(VitalGroup g);
std::optional<VitalGroup> group_from_token(std::string_view token);

struct VitalSample {
  std::string patient_id;
  VitalKind kind;
  std::int64_t ts_ms = 0;
  double value = 0;
  std::uint64_t seq = 0;
  friend bool operator==(const VitalSample&, const VitalSample&) = default;
};

struct PatientProfile {
  std::string patient_id;
  int age_years = 0;
};

enum class AgeBracket { Under18, B18_25, B28_35, B36_45, B45_55, B56_65, Over65 };
inline constexpr int kAgeBracketCount = 7;
std::string_view bracket_token(AgeBracket b);

// Age in whole years -> bracket. Boundary ages resolve upward: 18 is adult,
// 26 falls in the 28-35 row, 36/46/56/66 start their rows.
// Throws std::invalid_argument outside [0, 130].
AgeBracket bracket(int age_years);

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Age-dependent normal ranges, keyed by (kind, bracket). Defaults are the
// compiled-in clinical table; a key=value config file can override cells.
class NormalRanges {
 public:
  static const NormalRanges& defaults();
  // Loads overrides on top of the defaults. Unknown keys or malformed
  // numbers throw std::invalid_argument. Format, one per line:
  //   <kind_token>.<bracket_token> = lo,hi
  // plus an optional "version = <int>" line. '#' starts a comment.
  static NormalRanges load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  Interval range(VitalKind k, AgeBracket b) const;
  Interval range_for_age(VitalKind k, int age_years) const;
  void set_range(VitalKind k, AgeBracket b, Interval iv);
  int version() const { return version_; }
  void set_version(int v) { version_ = v; }

 private:
  std::array<std::array<Interval, kAgeBracketCount>, kVitalKindCount> table_{};
  int version_ = 1;
};

// Deviation band of a reading relative to its normal range [a, b] with
// width w. Let d be the normalized overshoot ((v-b)/w above, (a-v)/w below):
//   d <= 0          Normal
//   0 < d <= 0.25   Medium
//   0.25 < d <= 0.75  High (above) / Low (below)
//   d > 0.75        Highest (above) / Lowest (below)
enum class Band { Lowest, Low, Normal, Medium, High, Highest };
inline constexpr int kBandCount = 6;
std::string_view band_name(Band b);
std::optional<Band> band_from_name(std::string_view name);

// Severity rank: Normal 0, Medium 1, High/Low 2, Highest/Lowest 3.
int band_rank(Band b);
// Higher rank wins; equal ranks keep a.
Band worse_band(Band a, Band b);

Band band(VitalKind k, double value, int age_years,
          const NormalRanges& ranges = NormalRanges::defaults());
Band band_in(const Interval& iv, double value);

// One band per vital group, fixed order (Respiratory, BloodPh, Heart,
// BloodPressure, Temperature).
struct BandedVitals {
  std::array<Band, kVitalGroupCount> bands{Band::Normal, Band::Normal,
                                           Band::Normal, Band::Normal,
                                           Band::Normal};
  Band& operator[](VitalGroup g) { return bands[static_cast<int>(g)]; }
  Band operator[](VitalGroup g) const { return bands[static_cast<int>(g)]; }
  friend bool operator==(const BandedVitals&, const BandedVitals&) = default;
};

// Dense index of a band pattern, base-6 digits in group order. [0, 7776).
int encode_bands(const BandedVitals& bv);
BandedVitals decode_bands(int code);

enum class RiskLevel { Low, Medium, High, Highest };
std::string_view risk_name(RiskLevel r);
std::optional<RiskLevel> risk_from_name(std::string_view name);
int risk_rank(RiskLevel r);

}  // namespace vf::model
