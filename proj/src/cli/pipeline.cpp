#include "vitalfuse/cli/pipeline.hpp"

#include <cmath>
#include <limits>

namespace vf::cli {

using model::Band;
using model::BandedVitals;
using model::VitalKind;

namespace {

constexpr std::size_t kFeatureWarmupRows = 12;

}  // namespace

Pipeline::Pipeline(const RunConfig& cfg, const model::NormalRanges& ranges,
                   std::map<std::string, int> patient_ages, EventLog& log,
                   const triage::Classifier& classifier)
    : cfg_(cfg),
      ranges_(ranges),
      ages_(std::move(patient_ages)),
      log_(log),
      classifier_(classifier) {}

Pipeline::PatientState& Pipeline::patient(const std::string& id) {
  auto it = patients_.find(id);
  if (it != patients_.end()) return it->second;
  PatientState ps;
  auto age_it = ages_.find(id);
  ps.age = age_it != ages_.end() ? age_it->second : cfg_.default_age;
  ps.grid.patient_id = id;
  ps.grid.epoch_s = cfg_.epoch_s;
  ps.fstate.timeout_s = cfg_.feature_timeout_s;
  // pick up any trained checkpoints for this patient
  for (auto kind : model::kAllVitalKinds) {
    const auto file = cfg_.data_dir / "models" / EventLog::sanitize_id(id) /
                      (std::string(model::kind_token(kind)) + ".ckpt");
    if (!std::filesystem::exists(file)) continue;
    auto& fc = ps.forecasters[static_cast<int>(kind)];
    auto [m, s] = forecast::load_checkpoint(file);
    fc.model = std::move(m);
    fc.std = s;
    fc.has_model = true;
  }
  return patients_.emplace(id, std::move(ps)).first->second;
}

void Pipeline::push(const model::VitalSample& s) {
  if (finished_) throw std::logic_error("push after finish");
  ++totals_.samples_in;
  PatientState& ps = patient(s.patient_id);
  auto kept = ps.cleaner.push(s);
  if (!kept) return;
  ++totals_.samples_accepted;

  nlohmann::ordered_json j;
  j["type"] = "sample";
  j["patient"] = s.patient_id;
  j["kind"] = model::kind_token(s.kind);
  j["ts_ms"] = s.ts_ms;
  j["value"] = s.value;
  j["seq"] = s.seq;
  log_.append(s.patient_id, j.dump());

  const auto epoch_ms = static_cast<std::int64_t>(cfg_.epoch_s * 1000.0);
  std::int64_t e = s.ts_ms / epoch_ms;
  if (s.ts_ms < 0 && s.ts_ms % epoch_ms != 0) --e;
  if (ps.row_open && e < ps.open_epoch) {
    ++totals_.late_samples;  // row already sealed; dropped from the grid
    return;
  }
  if (!ps.row_open || e != ps.open_epoch) {
    if (ps.row_open) finalize_open_row(s.patient_id, ps);
    ps.open_row = anomaly::GridRow{e * epoch_ms, {}};
    ps.open_epoch = e;
    ps.row_open = true;
    ps.open_cell_ts.fill(std::numeric_limits<std::int64_t>::min());
  }
  const int k = static_cast<int>(s.kind);
  if (s.ts_ms >= ps.open_cell_ts[k]) {
    ps.open_row.cells[k] = s.value;
    ps.open_cell_ts[k] = s.ts_ms;
  }
}

BandedVitals Pipeline::bands_for_row(const PatientState& ps,
                                     const anomaly::GridRow& row) const {
  // effective value per kind: this row's cell, else carry-forward
  std::array<std::optional<double>, model::kVitalKindCount> eff = ps.last_value;
  for (int k = 0; k < model::kVitalKindCount; ++k)
    if (row.cells[k]) eff[k] = row.cells[k];

  BandedVitals bv;  // defaults Normal; a never-seen vital stays Normal
  for (int k = 0; k < model::kVitalKindCount; ++k) {
    if (!eff[k]) continue;
    const auto kind = static_cast<VitalKind>(k);
    const Band b = model::band(kind, *eff[k], ps.age, ranges_);
    auto& slot = bv[model::group_of(kind)];
    slot = kind == VitalKind::BloodPressureDiastolic ? model::worse_band(slot, b)
                                                     : b;
  }
  // note: systolic is banded before diastolic (kind order), so the blood
  // pressure slot ends up as the worse of the two, systolic winning ties
  return bv;
}

std::optional<BandedVitals> Pipeline::predict_bands(
    PatientState& ps, const anomaly::GridRow& row) {
  std::array<std::optional<double>, model::kVitalKindCount> eff = ps.last_value;
  for (int k = 0; k < model::kVitalKindCount; ++k)
    if (row.cells[k]) eff[k] = row.cells[k];

  BandedVitals bv;
  for (int k = 0; k < model::kVitalKindCount; ++k) {
    if (!eff[k]) continue;
    auto& fc = ps.forecasters[k];
    double next = *eff[k];
    if (fc.has_model) {
      const double z = fc.std.standardize(*eff[k]);
      next = fc.std.destandardize(forecast::lstm_step(fc.model, fc.state, z));
    }
    const auto kind = static_cast<VitalKind>(k);
    const Band b = model::band(kind, next, ps.age, ranges_);
    auto& slot = bv[model::group_of(kind)];
    slot = kind == VitalKind::BloodPressureDiastolic ? model::worse_band(slot, b)
                                                     : b;
  }
  return bv;
}

void Pipeline::finalize_open_row(const std::string& id, PatientState& ps) {
  if (!ps.row_open) return;
  ps.row_open = false;
  if (ps.open_row.empty()) return;
  ps.row_bands.push_back(bands_for_row(ps, ps.open_row));
  ps.grid.rows.push_back(ps.open_row);
  ++totals_.rows;
  for (int k = 0; k < model::kVitalKindCount; ++k)
    if (ps.open_row.cells[k]) ps.last_value[k] = ps.open_row.cells[k];
  label_pending(id, ps, false);
}

void Pipeline::label_pending(const std::string& id, PatientState& ps,
                             bool at_end) {
  // a row is labeled once its successor exists (or at shutdown)
  while (ps.labeled_rows + (at_end ? 0 : 1) < ps.grid.rows.size())
    emit_row(id, ps, ps.labeled_rows);
}

void Pipeline::update_features(const std::string& id, PatientState& ps,
                               std::size_t r) {
  const anomaly::GridRow& row = ps.grid.rows[r];
  const auto& resp_cell =
      row.cells[static_cast<int>(VitalKind::RespiratoryRate)];
  const auto& heart_cell = row.cells[static_cast<int>(VitalKind::HeartRate)];

  auto fvec = [](double value, std::optional<double>& prev) {
    const double diff = prev ? value - *prev : 0.0;
    prev = value;
    return std::vector<double>{value, diff};
  };

  std::vector<double> rv, hv;
  if (resp_cell) rv = fvec(*resp_cell, ps.prev_resp);
  if (heart_cell) hv = fvec(*heart_cell, ps.prev_heart);

  if (!ps.fmap) {
    if (!rv.empty() && !hv.empty()) ps.warmup_pairs.emplace_back(hv, rv);
    if (ps.warmup_pairs.size() < kFeatureWarmupRows) return;
    ps.fmap = features::fit_map(ps.warmup_pairs);
    // calibrate the skew threshold on the warmup window's scores
    std::vector<double> scores;
    scores.reserve(ps.warmup_pairs.size());
    for (const auto& [h, rr] : ps.warmup_pairs)
      scores.push_back(features::skew_score(
          *ps.fmap, features::map_heart_to_resp(*ps.fmap, h)));
    ps.tau = features::skew_threshold(scores).tau;
    ps.fstate.r0 = ps.fmap->mr;
    ps.fstate.h0 = ps.fmap->mh;
    ps.fstate.rm = ps.fmap->mr;
    ps.fstate.hm = ps.fmap->mh;
    ps.fstate.tr_ms = row.epoch_start_ms;
    ps.fstate.th_ms = row.epoch_start_ms;
    return;
  }

  const std::int64_t now = row.epoch_start_ms;
  if (!rv.empty())
    ps.fstate = features::update_state(ps.fstate, features::FeatureChannel::Respiration, rv, now);
  if (!hv.empty())
    ps.fstate = features::update_state(ps.fstate, features::FeatureChannel::Heart, hv, now);
  if (rv.empty() && hv.empty()) return;

  const auto fr = features::map_heart_to_resp(*ps.fmap, ps.fstate.hm);
  const double score = features::skew_score(*ps.fmap, fr);
  const bool skewed = features::classify_feature_vector(*ps.fmap, fr, ps.tau) ==
                      features::SkewClass::Skewed;
  nlohmann::ordered_json j;
  j["type"] = "features";
  j["patient"] = id;
  j["ts_ms"] = now;
  j["score"] = score;
  j["tau"] = ps.tau;
  j["skewed"] = skewed;
  log_.append(id, j.dump());
}

void Pipeline::emit_row(const std::string& id, PatientState& ps,
                        std::size_t r) {
  const anomaly::GridRow& row = ps.grid.rows[r];
  const anomaly::LabelRow labels =
      anomaly::classify_row(ps.grid, r, ranges_, ps.age);
  std::array<std::optional<Band>, model::kVitalGroupCount> cell_bands;
  for (int g = 0; g < model::kVitalGroupCount; ++g)
    cell_bands[g] = anomaly::group_band(
        row, static_cast<model::VitalGroup>(g), ranges_, ps.age);
  const anomaly::RowFlag flag = anomaly::row_flag(labels, cell_bands);
  if (flag == anomaly::RowFlag::Emergency) ++totals_.emergency_rows;

  nlohmann::ordered_json j;
  j["type"] = "anomaly_row";
  j["patient"] = id;
  j["ts_ms"] = row.epoch_start_ms;
  nlohmann::ordered_json jl;
  for (int g = 0; g < model::kVitalGroupCount; ++g) {
    const auto tok =
        std::string(model::group_token(static_cast<model::VitalGroup>(g)));
    if (labels[g]) jl[tok] = anomaly::label_name(*labels[g]);
    else jl[tok] = nullptr;
  }
  j["labels"] = jl;
  j["flag"] = anomaly::flag_name(flag);
  log_.append(id, j.dump());

  update_features(id, ps, r);

  const BandedVitals& bands = ps.row_bands[r];
  auto predicted = predict_bands(ps, row);
  triage::TriageReport rep = triage::make_report(id, row.epoch_start_ms, bands,
                                                 classifier_, predicted);
  log_.append(id, rep.to_json_line());
  ++totals_.reports;
  if (rep.display_color == triage::Color::Red) ++totals_.red_reports;

  ps.last.bands = bands;
  ps.last.risk = rep.risk;
  ps.last.predicted_risk = rep.predicted_risk;
  ps.last.ts_ms = row.epoch_start_ms;
  ps.last.rows = r + 1;
  ++ps.labeled_rows;
  if (on_report) on_report(rep);
}

void Pipeline::finish() {
  if (finished_) return;
  finished_ = true;
  for (auto& [id, ps] : patients_) {
    finalize_open_row(id, ps);
    label_pending(id, ps, true);
    const auto& rep = ps.cleaner.report();
    totals_.clean_drops += rep.dropped_empty + rep.dropped_duplicates +
                           rep.dropped_out_of_physical_bounds;
    nlohmann::ordered_json j;
    j["type"] = "clean_report";
    j["patient"] = id;
    j["rejected_unstructured"] = rep.rejected_unstructured;
    j["dropped_empty"] = rep.dropped_empty;
    j["dropped_duplicates"] = rep.dropped_duplicates;
    j["dropped_out_of_physical_bounds"] = rep.dropped_out_of_physical_bounds;
    j["accepted"] = rep.accepted;
    log_.append(id, j.dump());
  }
  log_.flush();
}

std::vector<std::pair<std::string, Pipeline::PatientLast>> Pipeline::snapshot()
    const {
  std::vector<std::pair<std::string, PatientLast>> out;
  out.reserve(patients_.size());
  for (const auto& [id, ps] : patients_) out.emplace_back(id, ps.last);
  return out;
}

}  // namespace vf::cli
