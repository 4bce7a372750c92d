#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vitalfuse/cli/config.hpp"
#include "vitalfuse/model.hpp"

// Command entry points. Exit codes: 0 success, 1 runtime failure (I/O,
// network), 2 validation failure (bad flags, bad config, missing patient).

namespace vf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

struct SimulateArgs {
  std::filesystem::path scenario;
  std::filesystem::path out;  // "-" = stdout
  std::optional<std::uint64_t> seed_override;
};
int cmd_simulate(const SimulateArgs& args);

int cmd_run(const RunConfig& cfg);

struct TrainArgs {
  RunConfig cfg;
  std::string patient;
  model::VitalKind kind = model::VitalKind::HeartRate;
};
int cmd_train(const TrainArgs& args);

enum class ReportFormat { Text, Json, Csv };
struct ReportArgs {
  RunConfig cfg;
  std::string patient;
  ReportFormat format = ReportFormat::Text;
};
int cmd_report(const ReportArgs& args);

}  // namespace vf::cli
