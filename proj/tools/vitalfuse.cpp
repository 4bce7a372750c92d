// vitalfuse: seeded vital-signs simulator, stream ingestion, cleaning,
// anomaly labeling, per-patient forecasting, evidence fusion and triage.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vitalfuse/cli/commands.hpp"
#include "vitalfuse/cli/config.hpp"
#include "vitalfuse/model.hpp"

namespace {

struct GlobalFlags {
  std::string config_file;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  bool no_color = false;
};

// File first, flags second, so flags override file values.
vf::cli::RunConfig make_config(const GlobalFlags& g) {
  vf::cli::RunConfig cfg;
  if (!g.config_file.empty()) cfg = vf::cli::RunConfig::load(g.config_file);
  if (!g.data_dir.empty()) cfg.data_dir = g.data_dir;
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.lstm.rng_seed = *g.seed;
  }
  if (g.no_color) cfg.no_color = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming vital-signs fusion and triage engine"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config_file, "key=value config file");
  app.add_option("--data-dir", g.data_dir, "event log / model directory");
  app.add_option("--seed", g.seed, "RNG seed override");
  app.add_flag("--no-color", g.no_color, "disable ANSI colors");

  auto* sim = app.add_subcommand("simulate", "generate a wire-format replay file");
  std::string sim_scenario;
  std::string sim_out = "-";
  sim->add_option("scenario", sim_scenario, "scenario JSON file")->required();
  sim->add_option("-o,--out", sim_out, "output file ('-' = stdout)");

  auto* run = app.add_subcommand("run", "run the triage pipeline on a stream");
  std::string run_listen, run_replay, run_ranges, run_scenario;
  double run_speed = -1;
  double run_epoch = -1;
  run->add_option("--listen", run_listen, "accept TCP senders on host:port");
  run->add_option("--replay", run_replay, "replay a wire-format file");
  run->add_option("--speed", run_speed,
                  "replay pacing (0 = flat out, 1 = real time)");
  run->add_option("--epoch", run_epoch, "epoch length in seconds");
  run->add_option("--ranges", run_ranges, "normal-ranges config file");
  run->add_option("--scenario", run_scenario,
                  "scenario JSON for patient ages");

  auto* train = app.add_subcommand("train", "fit a forecaster on logged history");
  std::string train_patient, train_kind = "heart_rate";
  train->add_option("patient", train_patient, "patient id")->required();
  train->add_option("kind", train_kind, "vital kind token");

  auto* report = app.add_subcommand("report", "render a patient's risk history");
  std::string rep_patient, rep_format = "text";
  report->add_option("patient", rep_patient, "patient id")->required();
  report->add_option("--format", rep_format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : vf::cli::kExitValidation;
  }

  try {
    if (sim->parsed()) {
      vf::cli::SimulateArgs args;
      args.scenario = sim_scenario;
      args.out = sim_out;
      args.seed_override = g.seed;
      return vf::cli::cmd_simulate(args);
    }
    if (run->parsed()) {
      auto cfg = make_config(g);
      if (!run_listen.empty()) cfg.listen = run_listen;
      if (!run_replay.empty()) cfg.replay_file = run_replay;
      if (run_speed >= 0) cfg.replay_speed = run_speed;
      if (run_epoch > 0) cfg.epoch_s = run_epoch;
      if (!run_ranges.empty()) cfg.ranges_file = run_ranges;
      if (!run_scenario.empty()) cfg.scenario_file = run_scenario;
      return vf::cli::cmd_run(cfg);
    }
    if (train->parsed()) {
      vf::cli::TrainArgs args;
      args.cfg = make_config(g);
      args.patient = train_patient;
      const auto kind = vf::model::kind_from_token(train_kind);
      if (!kind) {
        std::cerr << "error: unknown vital kind '" << train_kind << "'\n";
        return vf::cli::kExitValidation;
      }
      args.kind = *kind;
      return vf::cli::cmd_train(args);
    }
    if (report->parsed()) {
      vf::cli::ReportArgs args;
      args.cfg = make_config(g);
      args.patient = rep_patient;
      args.format = rep_format == "json" ? vf::cli::ReportFormat::Json
                    : rep_format == "csv" ? vf::cli::ReportFormat::Csv
                                          : vf::cli::ReportFormat::Text;
      return vf::cli::cmd_report(args);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vf::cli::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vf::cli::kExitRuntime;
  }
  return vf::cli::kExitValidation;
}
