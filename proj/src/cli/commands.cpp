#include "vitalfuse/cli/commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vitalfuse/anomaly.hpp"
#include "vitalfuse/cli/eventlog.hpp"
#include "vitalfuse/cli/pipeline.hpp"
#include "vitalfuse/forecast.hpp"
#include "vitalfuse/ingest.hpp"
#include "vitalfuse/triage.hpp"

namespace vf::cli {

namespace {

// Shared exception -> exit code policy: validation problems are
// std::invalid_argument (exit 2), everything else is a runtime failure.
template <typename Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::string iso_utc(std::int64_t ts_ms) {
  const std::time_t secs = ts_ms / 1000 - (ts_ms < 0 && ts_ms % 1000 != 0);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view band_abbrev(model::Band b) {
  switch (b) {
    case model::Band::Lowest: return "LL";
    case model::Band::Low: return "L";
    case model::Band::Normal: return "N";
    case model::Band::Medium: return "M";
    case model::Band::High: return "H";
    case model::Band::Highest: return "HH";
  }
  return "?";
}

std::string bands_cells(const model::BandedVitals& b) {
  std::ostringstream os;
  for (int g = 0; g < model::kVitalGroupCount; ++g) {
    os << std::left << std::setw(4)
       << band_abbrev(b[static_cast<model::VitalGroup>(g)]);
  }
  return os.str();
}

const char* color_code(triage::Color c) {
  switch (c) {
    case triage::Color::Red: return "\x1b[31m";
    case triage::Color::Yellow: return "\x1b[33m";
    case triage::Color::Green: return "\x1b[32m";
  }
  return "";
}

std::string risk_cell(model::RiskLevel risk, bool use_color, int width) {
  std::ostringstream os;
  os << std::left << std::setw(width) << model::risk_name(risk);
  if (!use_color) return os.str();
  return std::string(color_code(triage::color(risk))) + os.str() + "\x1b[0m";
}

// One row per patient: id, current and predicted risk, last banded vitals.
void print_table(const Pipeline& pipe, std::ostream& out, bool use_color) {
  const auto snap = pipe.snapshot();
  out << std::left << std::setw(12) << "patient" << std::setw(9) << "risk"
      << std::setw(4) << "rr" << std::setw(4) << "ph" << std::setw(4) << "hr"
      << std::setw(4) << "bp" << std::setw(4) << "t" << std::setw(9)
      << "next" << "last update\n";
  for (const auto& [id, last] : snap) {
    out << std::left << std::setw(12) << id
        << risk_cell(last.risk, use_color, 9) << bands_cells(last.bands)
        << std::setw(9)
        << (last.predicted_risk ? model::risk_name(*last.predicted_risk)
                                : std::string_view("-"))
        << iso_utc(last.ts_ms) << "\n";
  }
}

// Throttled full-screen redraw for interactive runs; inert when stdout is
// not a terminal so piped output and logs stay clean.
class LiveTable {
 public:
  explicit LiveTable(bool use_color)
      : enabled_(::isatty(1) == 1), use_color_(use_color) {}

  void maybe_draw(const Pipeline& pipe) {
    if (!enabled_) return;
    const auto now = std::chrono::steady_clock::now();
    if (now - last_draw_ < std::chrono::milliseconds(250)) return;
    last_draw_ = now;
    std::cout << "\x1b[2J\x1b[H";
    print_table(pipe, std::cout, use_color_);
    std::cout.flush();
  }

  bool enabled() const { return enabled_; }

 private:
  bool enabled_;
  bool use_color_;
  std::chrono::steady_clock::time_point last_draw_{};
};

std::atomic<bool> g_stop{false};
void on_stop_signal(int) { g_stop.store(true); }

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& ep) {
  const auto colon = ep.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == ep.size())
    throw std::invalid_argument("listen endpoint must be host:port, got '" +
                                ep + "'");
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(ep.substr(colon + 1), &used);
    if (used != ep.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in listen endpoint '" + ep + "'");
  }
  if (port < 0 || port > 65535)
    throw std::invalid_argument("port out of range in '" + ep + "'");
  return {ep.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::filesystem::path patient_log_path(const RunConfig& cfg,
                                       const std::string& patient) {
  return cfg.data_dir / "patients" / (EventLog::sanitize_id(patient) + ".jsonl");
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
  return guarded([&] {
    std::ifstream in(args.scenario);
    if (!in)
      throw std::invalid_argument("cannot open scenario file: " +
                                  args.scenario.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto spec = ingest::ScenarioSpec::from_json_text(buf.str());
    if (args.seed_override) spec.rng_seed = *args.seed_override;
    spec.validate();

    const auto samples = ingest::simulate(spec);
    if (args.out == "-") {
      ingest::write_wire(samples, std::cout);
    } else {
      std::ofstream out(args.out, std::ios::binary);
      if (!out)
        throw std::runtime_error("cannot write " + args.out.string());
      ingest::write_wire(samples, out);
      if (!out.flush())
        throw std::runtime_error("short write to " + args.out.string());
    }
    std::cerr << "simulated " << samples.size() << " samples for "
              << spec.patient_count << " patient(s) over " << spec.duration_s
              << "s (seed " << spec.rng_seed << ")\n";
    return kExitOk;
  });
}

int cmd_run(const RunConfig& cfg) {
  return guarded([&] {
    const bool listen = !cfg.listen.empty();
    const bool replay = !cfg.replay_file.empty();
    if (listen == replay)
      throw std::invalid_argument(
          "exactly one of --listen and --replay is required");

    const auto ranges = cfg.ranges_file.empty()
                            ? model::NormalRanges::defaults()
                            : model::NormalRanges::load(cfg.ranges_file);

    std::map<std::string, int> ages;
    if (!cfg.scenario_file.empty()) {
      const auto spec = ingest::ScenarioSpec::from_json_file(cfg.scenario_file);
      for (int i = 0; i < spec.patient_count; ++i)
        ages[spec.patient_id(i)] = spec.age_of(i);
    }

    const triage::Classifier classifier(cfg.reliabilities);
    EventLog log(cfg.data_dir);
    Pipeline pipe(cfg, ranges, std::move(ages), log, classifier);

    LiveTable live(!cfg.no_color);
    pipe.on_report = [&](const triage::TriageReport&) { live.maybe_draw(pipe); };

    ingest::IngestStats stats;
    if (replay) {
      stats = ingest::replay(cfg.replay_file, cfg.replay_speed,
                             [&](const model::VitalSample& s) { pipe.push(s); });
    } else {
      auto [host, port] = parse_endpoint(cfg.listen);
      ingest::Server server(host, port,
                            [&](const model::VitalSample& s) { pipe.push(s); });
      server.start();
      std::cerr << "listening on " << host << ":" << server.port()
                << " (interrupt to stop)\n";
      g_stop.store(false);
      std::signal(SIGINT, on_stop_signal);
      std::signal(SIGTERM, on_stop_signal);
      while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        live.maybe_draw(pipe);
      }
      std::signal(SIGINT, SIG_DFL);
      std::signal(SIGTERM, SIG_DFL);
      server.stop();
      stats = server.stats();
    }
    pipe.finish();

    const auto& t = pipe.totals();
    if (live.enabled()) std::cout << "\x1b[2J\x1b[H";
    print_table(pipe, std::cout, !cfg.no_color);
    std::cout << "\nrun summary\n"
              << "  lines read:        " << stats.lines_read << "\n"
              << "  parse failures:    " << stats.parse_failures << "\n"
              << "  seq violations:    " << stats.seq_violations << "\n"
              << "  samples ingested:  " << t.samples_in << "\n"
              << "  clean drops:       " << t.clean_drops << "\n"
              << "  samples accepted:  " << t.samples_accepted << "\n"
              << "  late samples:      " << t.late_samples << "\n"
              << "  epoch rows:        " << t.rows << "\n"
              << "  triage reports:    " << t.reports << " (" << t.red_reports
              << " red)\n"
              << "  emergency rows:    " << t.emergency_rows << "\n";
    const bool conserved = t.samples_accepted == t.samples_in - t.clean_drops;
    std::cout << "  conservation:      accepted " << t.samples_accepted
              << " == ingested " << t.samples_in << " - drops "
              << t.clean_drops << (conserved ? "  [ok]" : "  [MISMATCH]")
              << "\n";
    if (!conserved) {
      std::cerr << "error: pipeline conservation check failed\n";
      return kExitRuntime;
    }
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args) {
  return guarded([&] {
    const auto path = patient_log_path(args.cfg, args.patient);
    if (!std::filesystem::exists(path))
      throw std::invalid_argument("unknown patient '" + args.patient +
                                  "': no log at " + path.string());

    const auto token = std::string(model::kind_token(args.kind));
    std::vector<model::VitalSample> samples;
    for (const auto& rec : EventLog::load_file(path)) {
      if (rec.value("type", "") != "sample" || rec.value("kind", "") != token)
        continue;
      samples.push_back({rec.at("patient").get<std::string>(), args.kind,
                         rec.at("ts_ms").get<std::int64_t>(),
                         rec.at("value").get<double>(),
                         rec.at("seq").get<std::uint64_t>()});
    }
    std::stable_sort(samples.begin(), samples.end(),
                     [](const auto& a, const auto& b) { return a.ts_ms < b.ts_ms; });

    const auto grid = anomaly::align_epochs(samples, args.cfg.epoch_s);
    std::vector<double> series;
    for (const auto& row : grid.rows) {
      const auto& cell = row.cells[static_cast<int>(args.kind)];
      if (cell) series.push_back(*cell);
    }
    if (series.size() < 3)
      throw std::invalid_argument(
          "insufficient history for " + args.patient + "/" + token + ": " +
          std::to_string(series.size()) + " epoch value(s), need at least 3");

    auto lstm = args.cfg.lstm;
    if (args.cfg.seed != 0) lstm.rng_seed = args.cfg.seed;
    const auto result = forecast::train(series, lstm);

    const auto dir =
        args.cfg.data_dir / "models" / EventLog::sanitize_id(args.patient);
    std::filesystem::create_directories(dir);
    const auto ckpt = dir / (token + ".ckpt");
    const auto losses = dir / (token + "_loss.csv");
    forecast::save_checkpoint(result.model, result.standardizer, ckpt);
    forecast::write_loss_csv(result.rmse_curve, losses);

    std::cout << "trained " << args.patient << "/" << token << " on "
              << series.size() << " epoch values, " << lstm.epochs
              << " epochs: rmse " << result.rmse_curve.front() << " -> "
              << result.rmse_curve.back() << "\n"
              << "checkpoint: " << ckpt.string() << "\n"
              << "loss curve: " << losses.string() << "\n";
    return kExitOk;
  });
}

namespace {

void report_text(const std::string& patient,
                 const std::vector<triage::TriageReport>& reports,
                 bool use_color, std::ostream& out) {
  out << "risk history for " << patient << " (" << reports.size()
      << " epoch(s))\n";
  for (const auto& r : reports) {
    out << "  " << iso_utc(r.ts_ms) << "  " << risk_cell(r.risk, use_color, 8)
        << bands_cells(r.bands);
    if (r.matched_row) out << "rule " << std::setw(2) << *r.matched_row + 1;
    else out << "fused  ";
    if (r.escalated) out << "  escalated";
    out << "\n";
    if (r.display_color != triage::Color::Green) {
      for (const auto& rec : r.recommendations)
        out << "      " << std::left << std::setw(16)
            << model::group_token(rec.vital) << rec.text << "\n";
    }
  }
  if (!reports.empty() && reports.back().predicted_risk)
    out << "next epoch predicted risk: "
        << model::risk_name(*reports.back().predicted_risk) << "\n";
  else
    out << "next epoch predicted risk: n/a\n";
}

void report_json(const std::string& patient,
                 const std::vector<triage::TriageReport>& reports,
                 std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["patient"] = patient;
  doc["epochs"] = reports.size();
  doc["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports)
    doc["reports"].push_back(nlohmann::ordered_json::parse(r.to_json_line()));
  if (!reports.empty() && reports.back().predicted_risk)
    doc["predicted_next_risk"] =
        model::risk_name(*reports.back().predicted_risk);
  else
    doc["predicted_next_risk"] = nullptr;
  out << doc.dump(2) << "\n";
}

void report_csv(const std::vector<triage::TriageReport>& reports,
                std::ostream& out) {
  out << "ts_ms,risk,color,respiratory,blood_ph,heart,blood_pressure,"
         "temperature,path,matched_row,escalated,predicted_risk\n";
  for (const auto& r : reports) {
    out << r.ts_ms << ',' << model::risk_name(r.risk) << ','
        << triage::color_name(r.display_color);
    for (int g = 0; g < model::kVitalGroupCount; ++g)
      out << ',' << model::band_name(r.bands[static_cast<model::VitalGroup>(g)]);
    out << ',' << triage::path_name(r.path) << ',';
    if (r.matched_row) out << *r.matched_row;
    out << ',' << (r.escalated ? "true" : "false") << ',';
    if (r.predicted_risk) out << model::risk_name(*r.predicted_risk);
    out << "\n";
  }
}

}  // namespace

int cmd_report(const ReportArgs& args) {
  return guarded([&] {
    const auto path = patient_log_path(args.cfg, args.patient);
    if (!std::filesystem::exists(path))
      throw std::invalid_argument("unknown patient '" + args.patient +
                                  "': no log at " + path.string());

    std::vector<triage::TriageReport> reports;
    for (const auto& rec : EventLog::load_file(path))
      if (rec.value("type", "") == "triage")
        reports.push_back(triage::TriageReport::from_json_line(rec.dump()));

    const bool use_color = !args.cfg.no_color && ::isatty(1) == 1;
    switch (args.format) {
      case ReportFormat::Text:
        report_text(args.patient, reports, use_color, std::cout);
        break;
      case ReportFormat::Json:
        report_json(args.patient, reports, std::cout);
        break;
      case ReportFormat::Csv:
        report_csv(reports, std::cout);
        break;
    }
    return kExitOk;
  });
}

}  // namespace vf::cli
