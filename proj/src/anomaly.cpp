#include "vitalfuse/anomaly.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vf::anomaly {

RecordGrid align_epochs(std::span<const model::VitalSample> samples,
                        double epoch_s) {
  if (!(epoch_s > 0)) throw std::invalid_argument("epoch_s must be > 0");
  RecordGrid grid;
  grid.epoch_s = epoch_s;
  const auto epoch_ms = static_cast<std::int64_t>(epoch_s * 1000.0);
  GridRow cur;
  bool open = false;
  std::int64_t cur_epoch = 0;
  std::array<std::int64_t, model::kVitalKindCount> cell_ts{};

  auto flush = [&] {
    if (open && !cur.empty()) grid.rows.push_back(cur);
    open = false;
  };

  for (const auto& s : samples) {
    if (!grid.patient_id.empty() && s.patient_id != grid.patient_id)
      throw std::invalid_argument("align_epochs wants a single patient");
    if (grid.patient_id.empty()) grid.patient_id = s.patient_id;
    std::int64_t e = s.ts_ms / epoch_ms;
    if (s.ts_ms < 0 && s.ts_ms % epoch_ms != 0) --e;  // floor
    if (!open || e != cur_epoch) {
      if (open && e < cur_epoch)
        throw std::invalid_argument("samples must be epoch-ordered");
      flush();
      cur = GridRow{e * epoch_ms, {}};
      cur_epoch = e;
      open = true;
      cell_ts.fill(std::numeric_limits<std::int64_t>::min());
    }
    const int k = static_cast<int>(s.kind);
    if (s.ts_ms >= cell_ts[k]) {  // later reading wins the cell
      cur.cells[k] = s.value;
      cell_ts[k] = s.ts_ms;
    }
  }
  flush();
  return grid;
}

std::string_view label_name(AnomalyLabel l) {
  switch (l) {
    case AnomalyLabel::Normal: return "normal";
    case AnomalyLabel::ReadingError: return "reading_error";
    case AnomalyLabel::Anomaly: return "anomaly";
  }
  return "?";
}

namespace {

const std::array<std::vector<model::VitalKind>, model::kVitalGroupCount>&
group_kinds() {
  static const std::array<std::vector<model::VitalKind>,
                          model::kVitalGroupCount>
      k = {{{model::VitalKind::RespiratoryRate},
            {model::VitalKind::BloodPh},
            {model::VitalKind::HeartRate},
            {model::VitalKind::BloodPressureSystolic,
             model::VitalKind::BloodPressureDiastolic},
            {model::VitalKind::BodyTemperature}}};
  return k;
}

}  // namespace

bool group_present(const GridRow& row, model::VitalGroup g) {
  for (auto k : group_kinds()[static_cast<int>(g)])
    if (row.cells[static_cast<int>(k)]) return true;
  return false;
}

bool group_in_range(const GridRow& row, model::VitalGroup g,
                    const model::NormalRanges& ranges, int age_years) {
  bool any = false;
  for (auto k : group_kinds()[static_cast<int>(g)]) {
    const auto& cell = row.cells[static_cast<int>(k)];
    if (!cell) continue;
    any = true;
    if (!ranges.range_for_age(k, age_years).contains(*cell)) return false;
  }
  return any;
}

std::optional<model::Band> group_band(const GridRow& row, model::VitalGroup g,
                                      const model::NormalRanges& ranges,
                                      int age_years) {
  std::optional<model::Band> out;
  for (auto k : group_kinds()[static_cast<int>(g)]) {
    const auto& cell = row.cells[static_cast<int>(k)];
    if (!cell) continue;
    model::Band b = model::band(k, *cell, age_years, ranges);
    out = out ? model::worse_band(*out, b) : b;
  }
  return out;
}

LabelRow classify_row(const RecordGrid& grid, std::size_t row_index,
                      const model::NormalRanges& ranges, int age_years) {
  if (row_index >= grid.rows.size())
    throw std::invalid_argument("row index out of range");
  const GridRow& row = grid.rows[row_index];
  LabelRow labels{};
  for (int gi = 0; gi < model::kVitalGroupCount; ++gi) {
    const auto g = static_cast<model::VitalGroup>(gi);
    if (!group_present(row, g)) continue;
    if (group_in_range(row, g, ranges, age_years)) {
      labels[gi] = AnomalyLabel::Normal;
      continue;
    }
    // Reading error needs total lack of corroboration: every other
    // non-empty group of this row in range, and this group in range in the
    // adjacent rows where it exists.
    bool isolated = true;
    for (int oi = 0; oi < model::kVitalGroupCount && isolated; ++oi) {
      if (oi == gi) continue;
      const auto og = static_cast<model::VitalGroup>(oi);
      if (group_present(row, og) && !group_in_range(row, og, ranges, age_years))
        isolated = false;
    }
    for (std::size_t nb : {row_index - 1, row_index + 1}) {
      if (!isolated) break;
      if (nb >= grid.rows.size()) continue;  // wraps for index 0 too
      const GridRow& other = grid.rows[nb];
      if (group_present(other, g) &&
          !group_in_range(other, g, ranges, age_years))
        isolated = false;
    }
    labels[gi] = isolated ? AnomalyLabel::ReadingError : AnomalyLabel::Anomaly;
  }
  return labels;
}

std::vector<LabelRow> classify_grid(const RecordGrid& grid,
                                    const model::NormalRanges& ranges,
                                    int age_years) {
  if (grid.rows.empty()) throw std::invalid_argument("empty grid");
  std::vector<LabelRow> out;
  out.reserve(grid.rows.size());
  for (std::size_t r = 0; r < grid.rows.size(); ++r)
    out.push_back(classify_row(grid, r, ranges, age_years));
  return out;
}

std::string_view flag_name(RowFlag f) {
  switch (f) {
    case RowFlag::Normal: return "normal";
    case RowFlag::Suspect: return "suspect";
    case RowFlag::Emergency: return "emergency";
  }
  return "?";
}

RowFlag row_flag(const LabelRow& labels,
                 const std::array<std::optional<model::Band>,
                                  model::kVitalGroupCount>& bands) {
  int anomalies = 0;
  bool extreme = false;
  for (int gi = 0; gi < model::kVitalGroupCount; ++gi) {
    if (labels[gi] != AnomalyLabel::Anomaly) continue;
    ++anomalies;
    if (bands[gi] && model::band_rank(*bands[gi]) == 3) extreme = true;
  }
  if (anomalies >= 2 || (anomalies >= 1 && extreme)) return RowFlag::Emergency;
  if (anomalies == 1) return RowFlag::Suspect;
  return RowFlag::Normal;
}

std::string labels_csv(const RecordGrid& grid,
                       std::span<const LabelRow> labels) {
  std::ostringstream os;
  os << "epoch_start_ms";
  for (auto g : model::kAllVitalGroups) os << ',' << model::group_token(g);
  os << '\n';
  for (std::size_t r = 0; r < labels.size(); ++r) {
    os << grid.rows[r].epoch_start_ms;
    for (int gi = 0; gi < model::kVitalGroupCount; ++gi) {
      os << ',';
      if (labels[r][gi]) os << label_name(*labels[r][gi]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace vf::anomaly
