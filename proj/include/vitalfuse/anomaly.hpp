#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vitalfuse/model.hpp"

// Epoch-aligned record grid and the reading-error vs anomaly split: an
// out-of-range cell corroborated by nothing (rest of its row in range,
// temporal neighbors in range) is a reading error; any corroboration makes
// it a true anomaly.

namespace vf::anomaly {

struct GridRow {
  std::int64_t epoch_start_ms = 0;
  // raw kind slots; the blood-pressure group spans two of them
  std::array<std::optional<double>, model::kVitalKindCount> cells{};
  bool empty() const {
    for (const auto& c : cells)
      if (c) return false;
    return true;
  }
};

struct RecordGrid {
  std::string patient_id;
  double epoch_s = 60;
  std::vector<GridRow> rows;  // strictly time-ordered, no all-empty rows
};

// Buckets one patient's cleaned samples into fixed epochs, last value per
// kind wins within an epoch, all-empty epochs emit no row.
// Throws std::invalid_argument when epoch_s <= 0.
RecordGrid align_epochs(std::span<const model::VitalSample> samples,
                        double epoch_s);

enum class AnomalyLabel { Normal, ReadingError, Anomaly };
std::string_view label_name(AnomalyLabel l);

// One optional label per vital group; empty where the group has no reading.
using LabelRow = std::array<std::optional<AnomalyLabel>, model::kVitalGroupCount>;

bool group_present(const GridRow& row, model::VitalGroup g);
// All present component kinds of the group within the normal range. False
// when the group has no reading.
bool group_in_range(const GridRow& row, model::VitalGroup g,
                    const model::NormalRanges& ranges, int age_years);
// Worst component band of the group; nullopt when absent.
std::optional<model::Band> group_band(const GridRow& row, model::VitalGroup g,
                                      const model::NormalRanges& ranges,
                                      int age_years);

// Labels for one row, using the rows before/after it (where they exist) for
// temporal corroboration.
LabelRow classify_row(const RecordGrid& grid, std::size_t row_index,
                      const model::NormalRanges& ranges, int age_years);

// Whole-grid classification. Throws std::invalid_argument on an empty grid.
std::vector<LabelRow> classify_grid(const RecordGrid& grid,
                                    const model::NormalRanges& ranges,
                                    int age_years);

// emergency: >= 2 anomaly cells, or any anomaly cell in an extreme band;
// suspect: exactly one anomaly cell otherwise; normal: no anomaly cells.
enum class RowFlag { Normal, Suspect, Emergency };
std::string_view flag_name(RowFlag f);
RowFlag row_flag(const LabelRow& labels,
                 const std::array<std::optional<model::Band>,
                                  model::kVitalGroupCount>& bands);

// CSV export: header + one line per row (epoch ts, five label columns).
std::string labels_csv(const RecordGrid& grid,
                       std::span<const LabelRow> labels);

}  // namespace vf::anomaly
