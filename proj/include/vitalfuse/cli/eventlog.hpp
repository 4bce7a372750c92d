#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace vf::cli {

// Append-only JSONL store, one file per patient under <dir>/patients.
// Every record is a single line with a self-describing "type" field.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path dir);

  void append(const std::string& patient_id, const std::string& json_line);
  void flush();

  std::filesystem::path patient_path(const std::string& patient_id) const;
  std::vector<std::string> patients() const;  // ids with a log file, sorted

  // All complete records of one file; a truncated final line (no trailing
  // newline) is skipped with a warning on stderr.
  static std::vector<nlohmann::ordered_json> load_file(
      const std::filesystem::path& file);

  static std::string sanitize_id(const std::string& patient_id);

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::ofstream> streams_;
};

}  // namespace vf::cli
