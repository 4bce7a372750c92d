#include "vitalfuse/clean.hpp"

#include <cmath>

namespace vf::clean {

model::Interval physical_bounds(model::VitalKind k) {
  using model::VitalKind;
  switch (k) {
    case VitalKind::HeartRate: return {20, 250};
    case VitalKind::RespiratoryRate: return {2, 80};
    case VitalKind::BloodPressureSystolic: return {40, 300};
    case VitalKind::BloodPressureDiastolic: return {20, 200};
    case VitalKind::BodyTemperature: return {30, 45};
    case VitalKind::BloodPh: return {6.5, 8.0};
  }
  throw std::invalid_argument("bad VitalKind");
}

std::optional<model::VitalSample> Cleaner::push(model::VitalSample s) {
  if (s.patient_id.empty()) {
    ++report_.dropped_empty;
    return std::nullopt;
  }
  Key key{static_cast<int>(s.kind), s.ts_ms, s.seq};
  if (!seen_[s.patient_id].insert(key).second) {
    ++report_.dropped_duplicates;
    return std::nullopt;
  }
  if (!std::isfinite(s.value) || !physical_bounds(s.kind).contains(s.value)) {
    ++report_.dropped_out_of_physical_bounds;
    return std::nullopt;
  }
  ++report_.accepted;
  return s;
}

std::pair<std::vector<model::VitalSample>, CleanReport> clean_batch(
    std::span<const model::VitalSample> samples) {
  Cleaner c;
  std::vector<model::VitalSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    if (auto kept = c.push(s)) out.push_back(std::move(*kept));
  return {std::move(out), c.report()};
}

}  // namespace vf::clean
