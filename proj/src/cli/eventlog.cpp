#include "vitalfuse/cli/eventlog.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace vf::cli {

EventLog::EventLog(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "patients");
}

std::string EventLog::sanitize_id(const std::string& patient_id) {
  std::string out = patient_id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out.empty() ? "_" : out;
}

std::filesystem::path EventLog::patient_path(
    const std::string& patient_id) const {
  return dir_ / "patients" / (sanitize_id(patient_id) + ".jsonl");
}

void EventLog::append(const std::string& patient_id,
                      const std::string& json_line) {
  auto it = streams_.find(patient_id);
  if (it == streams_.end()) {
    std::ofstream f(patient_path(patient_id), std::ios::app);
    if (!f)
      throw std::runtime_error("cannot open event log for " + patient_id);
    it = streams_.emplace(patient_id, std::move(f)).first;
  }
  it->second << json_line << '\n';
  if (!it->second)
    throw std::runtime_error("event log write failed for " + patient_id);
}

void EventLog::flush() {
  for (auto& [id, f] : streams_) f.flush();
}

std::vector<std::string> EventLog::patients() const {
  std::vector<std::string> out;
  const auto p = dir_ / "patients";
  if (!std::filesystem::exists(p)) return out;
  for (const auto& e : std::filesystem::directory_iterator(p))
    if (e.path().extension() == ".jsonl") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<nlohmann::ordered_json> EventLog::load_file(
    const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open event log: " + file.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  std::vector<nlohmann::ordered_json> out;
  std::size_t start = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string::npos) {
      std::cerr << "warning: skipping truncated final record in "
                << file.string() << "\n";
      break;
    }
    std::string_view line = std::string_view(content).substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    out.push_back(nlohmann::ordered_json::parse(line));
  }
  return out;
}

}  // namespace vf::cli
