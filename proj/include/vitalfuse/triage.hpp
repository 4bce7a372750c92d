#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vitalfuse/fusion.hpp"
#include "vitalfuse/model.hpp"

// Risk classification and recommendations. Band patterns matching one of
// the 15 published rule rows take that row's risk; everything else goes
// through evidence fusion, lifted to a monotone safety envelope so a
// strictly worse vital never lowers the fused risk.

namespace vf::triage {

struct RuleRow {
  model::BandedVitals pattern;
  model::RiskLevel risk;
};

// The 15 rule rows, table order.
const std::array<RuleRow, 15>& rule_table();

enum class TriagePath { RuleTable, DsFallback };
std::string_view path_name(TriagePath p);

struct ClassifyResult {
  model::RiskLevel risk = model::RiskLevel::Low;
  TriagePath path = TriagePath::DsFallback;
  std::optional<int> matched_row;                  // rule-table index, 0-based
  std::optional<fusion::BeliefInterval> interval;  // fallback evidence
};

// Total classifier over Band^5 for a fixed sensor-reliability vector.
// Fallback risks are precomputed once: fused decision (upgraded to Highest
// when the decision is High and any band is extreme), then lifted so that
// no single-band worsening within the fallback set can lower the risk.
class Classifier {
 public:
  explicit Classifier(
      std::array<double, model::kVitalGroupCount> reliabilities);
  ClassifyResult classify(const model::BandedVitals& bands) const;
  const std::array<double, model::kVitalGroupCount>& reliabilities() const {
    return reliabilities_;
  }

 private:
  std::array<double, model::kVitalGroupCount> reliabilities_;
  std::array<std::uint8_t, 7776> risk_;       // RiskLevel per pattern code
  std::array<std::int8_t, 7776> rule_row_;    // -1 = fallback
};

struct Recommendation {
  model::VitalGroup vital;
  std::string text;
  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

// The published decision text for (risk level, vital group). Highest uses
// the High row.
const std::string& decision_text(model::RiskLevel risk, model::VitalGroup g);

// One recommendation per contributing vital; an empty contributing set at
// Low risk yields the Low-risk entries for all five vitals.
std::vector<Recommendation> recommend(
    model::RiskLevel risk, const std::set<model::VitalGroup>& contributing);

enum class Color { Red, Yellow, Green };
std::string_view color_name(Color c);
Color color(model::RiskLevel risk);

struct TriageReport {
  std::string patient_id;
  std::int64_t ts_ms = 0;
  model::BandedVitals bands;
  model::RiskLevel risk = model::RiskLevel::Low;
  TriagePath path = TriagePath::DsFallback;
  std::optional<int> matched_row;
  std::optional<fusion::BeliefInterval> interval;
  bool escalated = false;  // risk was Highest, High-row texts applied
  std::vector<model::VitalGroup> contributing;
  std::vector<Recommendation> recommendations;
  Color display_color = Color::Green;
  std::optional<model::BandedVitals> predicted_bands;
  std::optional<model::RiskLevel> predicted_risk;

  std::string to_json_line() const;
  static TriageReport from_json_line(std::string_view line);
};

// classify + recommend + color + next-epoch prediction in one record.
TriageReport make_report(const std::string& patient_id, std::int64_t ts_ms,
                         const model::BandedVitals& bands,
                         const Classifier& classifier,
                         std::optional<model::BandedVitals> predicted_bands);

}  // namespace vf::triage
