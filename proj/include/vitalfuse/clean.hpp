#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vitalfuse/model.hpp"

// Drops records a downstream stage must never see: blank patient ids,
// exact duplicates, and values outside hard physical bounds. Malformed
// lines never reach this layer; ingest counts them and the pipeline folds
// that count in via add_unstructured.

namespace vf::clean {

struct CleanReport {
  std::uint64_t rejected_unstructured = 0;
  std::uint64_t dropped_empty = 0;
  std::uint64_t dropped_duplicates = 0;
  std::uint64_t dropped_out_of_physical_bounds = 0;
  std::uint64_t accepted = 0;
  std::uint64_t total_seen() const {
    return dropped_empty + dropped_duplicates + dropped_out_of_physical_bounds +
           accepted;
  }
  friend bool operator==(const CleanReport&, const CleanReport&) = default;
};

// Hard plausibility bounds per kind, independent of age:
//   heart rate 20..250 /min, respiratory rate 2..80 /min,
//   systolic 40..300 mmHg, diastolic 20..200 mmHg,
//   temperature 30..45 C, pH 6.5..8.0.
model::Interval physical_bounds(model::VitalKind k);

// Streaming cleaner; remembers (patient, kind, ts, seq) keys for dedup.
class Cleaner {
 public:
  // Returns the sample if it survived, nullopt if dropped.
  std::optional<model::VitalSample> push(model::VitalSample s);
  void add_unstructured(std::uint64_t n) { report_.rejected_unstructured += n; }
  const CleanReport& report() const { return report_; }

 private:
  using Key = std::tuple<int, std::int64_t, std::uint64_t>;
  std::unordered_map<std::string, std::set<Key>> seen_;
  CleanReport report_;
};

std::pair<std::vector<model::VitalSample>, CleanReport> clean_batch(
    std::span<const model::VitalSample> samples);

}  // namespace vf::clean
