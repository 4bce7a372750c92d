#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vitalfuse/model.hpp"

// Wire protocol (one JSON object per line), replay files, the TCP ingestion
// server, and the seeded patient-sensor simulator.

namespace vf::ingest {

inline constexpr std::size_t kMaxLineBytes = 1024;

struct ParseResult {
  std::optional<model::VitalSample> sample;
  std::string error;             // set iff !sample
  std::size_t error_offset = 0;  // byte offset into the line
  explicit operator bool() const { return sample.has_value(); }
};

// Parses one wire line:
//   {"patient":"p-001","kind":"heart_rate","ts_ms":1700000000000,"value":72.0,"seq":17}
// Rejects unknown kind tokens, non-finite values, missing fields and
// over-long lines. Never throws.
ParseResult parse_line(std::string_view line);

// One line, no trailing newline. parse_line(serialize(s)).sample == s.
std::string serialize(const model::VitalSample& s);

struct IngestStats {
  std::uint64_t lines_read = 0;
  std::uint64_t parse_failures = 0;
  std::uint64_t samples_accepted = 0;
  std::uint64_t seq_violations = 0;  // per-(patient,kind) seq went backwards
  std::map<std::string, std::uint64_t> per_patient;
};

using SampleSink = std::function<void(const model::VitalSample&)>;

// ---- Simulator ----

struct Baseline {
  double mean = 0;
  double sigma = 0;
};

enum class InjectionShape { Spike, Ramp, Plateau };
std::string_view shape_token(InjectionShape s);
std::optional<InjectionShape> shape_from_token(std::string_view t);

// A deviation episode added onto one patient's baseline signal. magnitude is
// expressed in normal-range widths; spike rises linearly to the peak at the
// midpoint and back, ramp rises linearly to the full magnitude, plateau holds
// it for the whole window.
struct Injection {
  std::string patient_id;
  model::VitalKind kind = model::VitalKind::HeartRate;
  double start_s = 0;
  double duration_s = 0;
  InjectionShape shape = InjectionShape::Spike;
  double magnitude = 0;
};

struct ScenarioSpec {
  int patient_count = 1;
  double duration_s = 600;
  double default_period_s = 30;
  std::map<model::VitalKind, double> period_overrides_s;
  std::map<model::VitalKind, Baseline> baseline_overrides;
  std::vector<Injection> injections;
  std::uint64_t rng_seed = 0;
  std::int64_t start_ms = 1'700'000'000'000;
  int default_age = 30;
  std::vector<int> ages;  // cycled over patients; empty -> default_age

  static ScenarioSpec from_json_file(const std::filesystem::path& file);
  static ScenarioSpec from_json_text(std::string_view text);
  std::string to_json_text() const;

  void validate() const;  // throws std::invalid_argument
  std::string patient_id(int index) const;  // "p-001", 1-based
  int age_of(int index) const;
  double period_s(model::VitalKind k) const;
  // Override if present, else mid normal range with sigma = 5% of width.
  Baseline baseline_for(model::VitalKind k, int age_years,
                        const model::NormalRanges& ranges) const;
};

// Deterministic for a fixed spec: per-(patient,kind) RNG streams, output
// ordered by (ts_ms, patient, kind), seq strictly increasing per stream.
std::vector<model::VitalSample> simulate(
    const ScenarioSpec& spec,
    const model::NormalRanges& ranges = model::NormalRanges::defaults());

void write_wire(std::span<const model::VitalSample> samples, std::ostream& out);

// ---- Sources ----

// TCP line server. Each connection carries newline-delimited records; valid
// samples are handed to the sink in per-connection arrival order. The sink
// is called under one lock, so downstream state sees one writer at a time.
class Server {
 public:
  Server(std::string host, std::uint16_t port, SampleSink sink);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();                 // throws std::runtime_error on bind failure
  std::uint16_t port() const;   // actual bound port (useful with port 0)
  void stop();                  // idempotent; joins all threads
  IngestStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Replays a wire-format file into the sink. speed_factor 0 runs flat out;
// 1 paces by record timestamps, 2 twice as fast, etc. A final line without
// a terminating newline counts as one parse failure.
IngestStats replay(const std::filesystem::path& file, double speed_factor,
                   const SampleSink& sink);

}  // namespace vf::ingest
