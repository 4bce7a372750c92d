#include <doctest.h>

#include <optional>
#include <random>
#include <vector>

#include "vitalfuse/anomaly.hpp"

using namespace vf::anomaly;
using vf::model::AgeBracket;
using vf::model::Band;
using vf::model::NormalRanges;
using vf::model::VitalGroup;
using vf::model::VitalKind;
using vf::model::VitalSample;

namespace {

constexpr int kAge = 30;

VitalSample s(VitalKind k, std::int64_t ts, double v) {
  return {"p-001", k, ts, v, 0};
}

GridRow row(std::int64_t ts,
            std::array<std::optional<double>, vf::model::kVitalKindCount> c) {
  return GridRow{ts, c};
}

// Independent re-statement of the labeling contract, straight from the
// post-condition: per-cell range test, then isolation checks done with
// plain loops over the row and the column neighbors.
std::array<std::optional<AnomalyLabel>, vf::model::kVitalGroupCount>
oracle_row(const RecordGrid& g, std::size_t r, const NormalRanges& ranges,
           int age) {
  std::array<std::optional<AnomalyLabel>, vf::model::kVitalGroupCount> out{};
  for (int gi = 0; gi < vf::model::kVitalGroupCount; ++gi) {
    auto group = static_cast<VitalGroup>(gi);
    if (!group_present(g.rows[r], group)) continue;
    if (group_in_range(g.rows[r], group, ranges, age)) {
      out[gi] = AnomalyLabel::Normal;
      continue;
    }
    bool others_ok = true;
    for (int gj = 0; gj < vf::model::kVitalGroupCount; ++gj) {
      if (gj == gi) continue;
      auto other = static_cast<VitalGroup>(gj);
      if (!group_present(g.rows[r], other)) continue;
      if (!group_in_range(g.rows[r], other, ranges, age)) others_ok = false;
    }
    bool neighbors_ok = true;
    if (r > 0 && group_present(g.rows[r - 1], group) &&
        !group_in_range(g.rows[r - 1], group, ranges, age))
      neighbors_ok = false;
    if (r + 1 < g.rows.size() && group_present(g.rows[r + 1], group) &&
        !group_in_range(g.rows[r + 1], group, ranges, age))
      neighbors_ok = false;
    out[gi] = (others_ok && neighbors_ok) ? AnomalyLabel::ReadingError
                                          : AnomalyLabel::Anomaly;
  }
  return out;
}

}  // namespace

TEST_CASE("epoch alignment buckets by floor and keeps the last value") {
  std::vector<VitalSample> in = {
      s(VitalKind::HeartRate, 0, 70),
      s(VitalKind::HeartRate, 59'999, 72),  // same epoch, later -> wins
      s(VitalKind::RespiratoryRate, 30'000, 18),
      s(VitalKind::HeartRate, 60'000, 75),  // next epoch
      s(VitalKind::HeartRate, 200'000, 71),  // two empty epochs skipped
  };
  auto g = align_epochs(in, 60.0);
  REQUIRE(g.rows.size() == 3);
  CHECK(g.patient_id == "p-001");
  CHECK(g.rows[0].epoch_start_ms == 0);
  CHECK(g.rows[0].cells[0] == 72.0);
  CHECK(g.rows[0].cells[1] == 18.0);
  CHECK(g.rows[1].epoch_start_ms == 60'000);
  CHECK(g.rows[1].cells[0] == 75.0);
  CHECK(g.rows[2].epoch_start_ms == 180'000);
  CHECK(g.rows[2].cells[0] == 71.0);
}

TEST_CASE("alignment floors negative timestamps toward minus infinity") {
  std::vector<VitalSample> in = {s(VitalKind::HeartRate, -1, 70)};
  auto g = align_epochs(in, 60.0);
  REQUIRE(g.rows.size() == 1);
  CHECK(g.rows[0].epoch_start_ms == -60'000);
}

TEST_CASE("one sample of each kind fills one row") {
  std::vector<VitalSample> in;
  double vals[] = {72, 18, 110, 70, 36.8, 7.4};
  for (int k = 0; k < vf::model::kVitalKindCount; ++k)
    in.push_back(s(static_cast<VitalKind>(k), 100, vals[k]));
  auto g = align_epochs(in, 60.0);
  REQUIRE(g.rows.size() == 1);
  for (int k = 0; k < vf::model::kVitalKindCount; ++k)
    CHECK(g.rows[0].cells[k] == vals[k]);
  CHECK(!g.rows[0].empty());
}

TEST_CASE("alignment validates input") {
  std::vector<VitalSample> in = {s(VitalKind::HeartRate, 0, 70)};
  CHECK_THROWS_AS(align_epochs(in, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(align_epochs(in, -5.0), std::invalid_argument);
  std::vector<VitalSample> two = {s(VitalKind::HeartRate, 0, 70),
                                  {"p-002", VitalKind::HeartRate, 0, 70, 0}};
  CHECK_THROWS_AS(align_epochs(two, 60.0), std::invalid_argument);
  CHECK(align_epochs({}, 60.0).rows.empty());
}

TEST_CASE("group handling: blood pressure spans two kinds") {
  const auto& ranges = NormalRanges::defaults();
  GridRow r = row(0, {std::nullopt, std::nullopt, 110.0, 70.0, std::nullopt,
                      std::nullopt});
  CHECK(group_present(r, VitalGroup::BloodPressure));
  CHECK(!group_present(r, VitalGroup::Heart));
  CHECK(group_in_range(r, VitalGroup::BloodPressure, ranges, kAge));
  r.cells[3] = 200.0;  // diastolic wildly high
  CHECK(!group_in_range(r, VitalGroup::BloodPressure, ranges, kAge));
  auto b = group_band(r, VitalGroup::BloodPressure, ranges, kAge);
  REQUIRE(b.has_value());
  CHECK(*b == Band::Highest);
  CHECK(!group_band(r, VitalGroup::Heart, ranges, kAge).has_value());
}

TEST_CASE("an isolated out-of-range reading is an error in readings") {
  RecordGrid g;
  g.patient_id = "p-001";
  g.epoch_s = 60;
  g.rows = {
      row(0, {72.0, 18.0, 110.0, 70.0, 36.8, 7.4}),
      row(60'000, {72.0, 18.0, 110.0, 70.0, 39.5, 7.4}),  // lone spike
      row(120'000, {72.0, 18.0, 110.0, 70.0, 36.9, 7.4}),
  };
  auto labels = classify_grid(g, NormalRanges::defaults(), kAge);
  REQUIRE(labels.size() == 3);
  CHECK(labels[1][static_cast<int>(VitalGroup::Temperature)] ==
        AnomalyLabel::ReadingError);
  for (int gi = 0; gi < vf::model::kVitalGroupCount; ++gi) {
    CHECK(labels[0][gi] == AnomalyLabel::Normal);
    CHECK(labels[2][gi] == AnomalyLabel::Normal);
  }
}

TEST_CASE("row corroboration turns both readings into anomalies") {
  RecordGrid g;
  g.patient_id = "p-001";
  g.epoch_s = 60;
  g.rows = {
      row(0, {72.0, 18.0, 110.0, 70.0, 36.8, 7.4}),
      // temperature 39.5 with respiratory 10 in the same row (age 30 range
      // is 10-22, so use 9 to leave range)
      row(60'000, {72.0, 9.0, 110.0, 70.0, 39.5, 7.4}),
      row(120'000, {72.0, 18.0, 110.0, 70.0, 36.9, 7.4}),
  };
  auto labels = classify_grid(g, NormalRanges::defaults(), kAge);
  CHECK(labels[1][static_cast<int>(VitalGroup::Temperature)] ==
        AnomalyLabel::Anomaly);
  CHECK(labels[1][static_cast<int>(VitalGroup::Respiratory)] ==
        AnomalyLabel::Anomaly);
}

TEST_CASE("column corroboration: a persistent deviation is an anomaly") {
  RecordGrid g;
  g.patient_id = "p-001";
  g.epoch_s = 60;
  g.rows = {
      row(0, {72.0, 18.0, 110.0, 70.0, 39.2, 7.4}),
      row(60'000, {72.0, 18.0, 110.0, 70.0, 39.5, 7.4}),
      row(120'000, {72.0, 18.0, 110.0, 70.0, 39.4, 7.4}),
  };
  auto labels = classify_grid(g, NormalRanges::defaults(), kAge);
  for (std::size_t r = 0; r < 3; ++r)
    CHECK(labels[r][static_cast<int>(VitalGroup::Temperature)] ==
          AnomalyLabel::Anomaly);
}

TEST_CASE("single-row grids can still isolate a reading error") {
  RecordGrid g;
  g.patient_id = "p-001";
  g.epoch_s = 60;
  g.rows = {row(0, {72.0, 18.0, 110.0, 70.0, 39.5, 7.4})};
  auto labels = classify_grid(g, NormalRanges::defaults(), kAge);
  CHECK(labels[0][static_cast<int>(VitalGroup::Temperature)] ==
        AnomalyLabel::ReadingError);
}

TEST_CASE("in-range cells are never flagged") {
  std::mt19937_64 rng(31);
  const auto& ranges = NormalRanges::defaults();
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    RecordGrid g;
    g.patient_id = "p-001";
    g.epoch_s = 60;
    for (int r = 0; r < 3; ++r) {
      GridRow gr{r * 60'000, {}};
      for (int k = 0; k < vf::model::kVitalKindCount; ++k) {
        auto iv = ranges.range_for_age(static_cast<VitalKind>(k), kAge);
        double roll = u(rng);
        if (roll < 0.2) continue;  // absent
        if (roll < 0.6)
          gr.cells[k] = iv.lo + u(rng) * iv.width();  // in range
        else
          gr.cells[k] = u(rng) < 0.5 ? iv.lo - (0.1 + u(rng)) * iv.width()
                                     : iv.hi + (0.1 + u(rng)) * iv.width();
      }
      if (!gr.empty()) g.rows.push_back(gr);
    }
    if (g.rows.empty()) continue;
    auto labels = classify_grid(g, ranges, kAge);
    for (std::size_t r = 0; r < g.rows.size(); ++r)
      for (int gi = 0; gi < vf::model::kVitalGroupCount; ++gi) {
        auto group = static_cast<VitalGroup>(gi);
        if (!group_present(g.rows[r], group)) {
          CHECK(!labels[r][gi].has_value());
        } else if (group_in_range(g.rows[r], group, ranges, kAge)) {
          CHECK(labels[r][gi] == AnomalyLabel::Normal);
        } else {
          CHECK(labels[r][gi] != AnomalyLabel::Normal);
        }
      }
  }
}

TEST_CASE("random grids agree with the brute-force oracle") {
  std::mt19937_64 rng(32);
  const auto& ranges = NormalRanges::defaults();
  std::uniform_int_distribution<int> cell(0, 3);  // absent/below/in/above
  for (int trial = 0; trial < 1000; ++trial) {
    RecordGrid g;
    g.patient_id = "p-001";
    g.epoch_s = 60;
    for (int r = 0; r < 3; ++r) {
      GridRow gr{r * 60'000, {}};
      for (int k = 0; k < vf::model::kVitalKindCount; ++k) {
        auto iv = ranges.range_for_age(static_cast<VitalKind>(k), kAge);
        switch (cell(rng)) {
          case 0: break;
          case 1: gr.cells[k] = iv.lo - 0.3 * iv.width(); break;
          case 2: gr.cells[k] = (iv.lo + iv.hi) / 2; break;
          case 3: gr.cells[k] = iv.hi + 0.3 * iv.width(); break;
        }
      }
      if (!gr.empty()) g.rows.push_back(gr);
    }
    if (g.rows.empty()) continue;
    auto labels = classify_grid(g, ranges, kAge);
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
      auto expect = oracle_row(g, r, ranges, kAge);
      for (int gi = 0; gi < vf::model::kVitalGroupCount; ++gi)
        CHECK(labels[r][gi] == expect[gi]);
    }
  }
}

TEST_CASE("row flags follow the anomaly census") {
  using OB = std::optional<Band>;
  std::array<OB, 5> mid_bands = {Band::Normal, Band::Normal, Band::Normal,
                                 Band::Normal, Band::Medium};
  LabelRow none{};
  for (auto& l : none) l = AnomalyLabel::Normal;
  CHECK(row_flag(none, mid_bands) == RowFlag::Normal);

  LabelRow one = none;
  one[4] = AnomalyLabel::Anomaly;  // medium-band anomaly
  CHECK(row_flag(one, mid_bands) == RowFlag::Suspect);

  LabelRow two = one;
  two[0] = AnomalyLabel::Anomaly;
  CHECK(row_flag(two, mid_bands) == RowFlag::Emergency);

  // one anomaly banding to an extreme escalates by itself
  std::array<OB, 5> extreme = {Band::Lowest, Band::Normal, Band::Normal,
                               Band::Normal, Band::Normal};
  LabelRow resp{};
  for (auto& l : resp) l = AnomalyLabel::Normal;
  resp[0] = AnomalyLabel::Anomaly;
  CHECK(row_flag(resp, extreme) == RowFlag::Emergency);

  // reading errors never escalate
  LabelRow err = none;
  err[4] = AnomalyLabel::ReadingError;
  CHECK(row_flag(err, mid_bands) == RowFlag::Normal);
}

TEST_CASE("label matrices export as CSV") {
  RecordGrid g;
  g.patient_id = "p-001";
  g.epoch_s = 60;
  g.rows = {row(0, {72.0, 18.0, 110.0, 70.0, 39.5, 7.4})};
  auto labels = classify_grid(g, NormalRanges::defaults(), kAge);
  auto csv = labels_csv(g, labels);
  CHECK(csv.find("epoch_start_ms") != std::string::npos);
  CHECK(csv.find("reading_error") != std::string::npos);
  CHECK(csv.find("normal") != std::string::npos);
}
