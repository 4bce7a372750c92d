#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vitalfuse/anomaly.hpp"
#include "vitalfuse/clean.hpp"
#include "vitalfuse/cli/config.hpp"
#include "vitalfuse/cli/eventlog.hpp"
#include "vitalfuse/features.hpp"
#include "vitalfuse/forecast.hpp"
#include "vitalfuse/model.hpp"
#include "vitalfuse/triage.hpp"

namespace vf::cli {

// Streaming orchestration: clean -> epoch rows -> anomaly labels ->
// features -> triage, all appended to the event log. A row is labeled once
// its next row exists (the labeler looks one epoch ahead); finish() flushes
// the rest. Single writer; the ingest sink serialization provides that.
class Pipeline {
 public:
  Pipeline(const RunConfig& cfg, const model::NormalRanges& ranges,
           std::map<std::string, int> patient_ages, EventLog& log,
           const triage::Classifier& classifier);

  void push(const model::VitalSample& s);
  void finish();

  struct Totals {
    std::uint64_t samples_in = 0;
    std::uint64_t samples_accepted = 0;
    std::uint64_t rows = 0;
    std::uint64_t reports = 0;
    std::uint64_t red_reports = 0;
    std::uint64_t emergency_rows = 0;
    std::uint64_t late_samples = 0;
    std::uint64_t clean_drops = 0;
  };
  const Totals& totals() const { return totals_; }

  struct PatientLast {
    model::BandedVitals bands;
    model::RiskLevel risk = model::RiskLevel::Low;
    std::optional<model::RiskLevel> predicted_risk;
    std::int64_t ts_ms = 0;
    std::uint64_t rows = 0;
  };
  // Latest classified state per patient (sorted by id).
  std::vector<std::pair<std::string, PatientLast>> snapshot() const;

  // Invoked after each triage report is appended (live rendering hook).
  std::function<void(const triage::TriageReport&)> on_report;

 private:
  struct KindForecaster {
    bool has_model = false;  // persistence fallback when no checkpoint
    forecast::LstmModel model;
    forecast::Standardizer std;
    forecast::LstmState state;
  };

  struct PatientState {
    int age = 30;
    clean::Cleaner cleaner;
    anomaly::RecordGrid grid;
    std::vector<model::BandedVitals> row_bands;
    std::size_t labeled_rows = 0;
    bool row_open = false;
    anomaly::GridRow open_row;
    std::int64_t open_epoch = 0;
    std::array<std::int64_t, model::kVitalKindCount> open_cell_ts{};
    std::array<std::optional<double>, model::kVitalKindCount> last_value{};
    // feature channels: [value, first difference] per epoch row
    std::vector<std::pair<std::vector<double>, std::vector<double>>>
        warmup_pairs;
    std::optional<double> prev_resp, prev_heart;
    std::optional<features::LinearMap> fmap;
    double tau = 0;
    features::FeatureState fstate;
    std::array<KindForecaster, model::kVitalKindCount> forecasters;
    PatientLast last;
  };

  PatientState& patient(const std::string& id);
  void finalize_open_row(const std::string& id, PatientState& ps);
  void label_pending(const std::string& id, PatientState& ps, bool at_end);
  void emit_row(const std::string& id, PatientState& ps, std::size_t r);
  model::BandedVitals bands_for_row(const PatientState& ps,
                                    const anomaly::GridRow& row) const;
  std::optional<model::BandedVitals> predict_bands(PatientState& ps,
                                                   const anomaly::GridRow& row);
  void update_features(const std::string& id, PatientState& ps, std::size_t r);

  const RunConfig& cfg_;
  const model::NormalRanges& ranges_;
  std::map<std::string, int> ages_;
  EventLog& log_;
  const triage::Classifier& classifier_;
  std::map<std::string, PatientState> patients_;
  Totals totals_;
  bool finished_ = false;
};

}  // namespace vf::cli
