#include "vitalfuse/cli/config.hpp"

#include <fstream>
#include <stdexcept>

namespace vf::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config file: " + file.string());
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": missing '='");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto as_double = [&] {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size())
      throw std::invalid_argument("bad number '" + value + "'");
    return v;
  };
  auto as_int = [&] {
    std::size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size())
      throw std::invalid_argument("bad integer '" + value + "'");
    return v;
  };

  if (key == "data_dir") data_dir = value;
  else if (key == "epoch_s") epoch_s = as_double();
  else if (key == "feature_timeout_s") feature_timeout_s = as_double();
  else if (key == "listen") listen = value;
  else if (key == "replay") replay_file = value;
  else if (key == "replay_speed") replay_speed = as_double();
  else if (key == "ranges") ranges_file = value;
  else if (key == "scenario") scenario_file = value;
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "no_color") no_color = parse_bool(value);
  else if (key == "default_age") default_age = static_cast<int>(as_int());
  else if (key == "lstm.hidden_units") lstm.hidden_units = static_cast<int>(as_int());
  else if (key == "lstm.epochs") lstm.epochs = static_cast<int>(as_int());
  else if (key == "lstm.learning_rate") lstm.learning_rate = as_double();
  else if (key == "lstm.grad_clip_norm") lstm.grad_clip_norm = as_double();
  else if (key == "lstm.lr_decay_factor") lstm.lr_decay_factor = as_double();
  else if (key == "lstm.lr_decay_epoch") lstm.lr_decay_epoch = static_cast<int>(as_int());
  else if (key.rfind("reliability.", 0) == 0) {
    auto g = model::group_from_token(key.substr(12));
    if (!g) throw std::invalid_argument("unknown vital group in '" + key + "'");
    double v = as_double();
    if (!(v >= 0 && v <= 1))
      throw std::invalid_argument("reliability must be in [0,1]");
    reliabilities[static_cast<int>(*g)] = v;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }

  if (!(epoch_s > 0)) throw std::invalid_argument("epoch_s must be > 0");
  if (!(feature_timeout_s > 0))
    throw std::invalid_argument("feature_timeout_s must be > 0");
  if (!(replay_speed >= 0))
    throw std::invalid_argument("replay_speed must be >= 0");
}

}  // namespace vf::cli
