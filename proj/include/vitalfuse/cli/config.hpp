#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "vitalfuse/forecast.hpp"
#include "vitalfuse/model.hpp"

namespace vf::cli {

// Runtime knobs for the run/train/report commands. Loadable from a
// key=value file ('#' comments); command-line flags override file values.
struct RunConfig {
  std::filesystem::path data_dir = "data";
  double epoch_s = 60;
  double feature_timeout_s = 300;
  forecast::LstmConfig lstm;
  std::array<double, model::kVitalGroupCount> reliabilities{0.9, 0.9, 0.9,
                                                            0.9, 0.9};
  std::string listen;  // "host:port"; empty = no listener
  std::filesystem::path replay_file;
  double replay_speed = 0;  // 0 = flat out
  std::filesystem::path ranges_file;
  std::filesystem::path scenario_file;  // ages/ids for known patients
  std::uint64_t seed = 0;
  bool no_color = false;
  int default_age = 30;

  static RunConfig load(const std::filesystem::path& file);
  // Applies one key=value pair; throws std::invalid_argument on unknown
  // keys or bad values. Keys mirror the field names; nested ones use dots
  // (lstm.epochs, reliability.heart).
  void set(const std::string& key, const std::string& value);
};

}  // namespace vf::cli
