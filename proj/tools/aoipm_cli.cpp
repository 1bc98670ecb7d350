// Command-line front end: train, quantify, detect, rul, evaluate, export-plots, synth.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoipm/dataio.hpp"
#include "aoipm/error.hpp"
#include "aoipm/pipeline.hpp"
#include "aoipm/synthetic.hpp"
#include "aoipm/text.hpp"

namespace {

using namespace aoipm;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string subset = "FD001";
  std::string artifacts;  // defaults to <out-dir>/artifacts

  std::string artifact_dir() const { return artifacts.empty() ? out_dir + "/artifacts" : artifacts; }
  std::string data_file(const std::string& prefix) const { return data_dir + "/" + prefix + "_" + subset + ".txt"; }

  PipelineConfig config() const {
    PipelineConfig c;
    if (!config_path.empty()) c = PipelineConfig::from_json(text::read_file(config_path));
    if (seed) c.lstm.seed = *seed;
    return c;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_out(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  text::write_file(path, content);
  std::cerr << "wrote " << path << "\n";
}

int cmd_synth(const Globals& g, const SyntheticFleet& fleet) {
  std::filesystem::create_directories(g.data_dir);
  fleet.write(g.data_dir, g.subset);
  std::cerr << "wrote train/test/RUL files for " << g.subset << " into " << g.data_dir << "\n";
  return 0;
}

int cmd_train(const Globals& g, const std::string& input) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto config = g.config();
  const auto data = load_cmapss(input.empty() ? g.data_file("train") : input);
  const auto art = train_pipeline(data, config);
  art.save(g.artifact_dir());
  std::printf("attributes %zu\n", art.attribute_names.size());
  std::printf("clusters %zu\n", art.kb.cluster_count());
  std::printf("residual_rows %zu\n", art.residual_tuples);
  std::printf("holdout_rmse %.6f\n", art.holdout_rmse);
  std::printf("selected_rule %d\n", art.wer.rule.id);
  std::cout << format_wer_table(art.wer.table, art.wer.rule);
  std::fprintf(stderr, "train finished in %.1f s\n", seconds_since(t0));
  return 0;
}

std::string input_or_test(const Globals& g, const std::string& input) {
  return input.empty() ? g.data_file("test") : input;
}

int cmd_quantify(const Globals& g, const std::string& input) {
  const auto art = TrainedArtifacts::load(g.artifact_dir());
  for (const auto& s : quantify_dataset(load_cmapss(input_or_test(g, input)), art))
    write_out(g.out_dir + "/quantification/unit_" + std::to_string(s.simulation_id) + ".txt",
              format_quantification(s));
  return 0;
}

int cmd_detect(const Globals& g, const std::string& input) {
  const auto art = TrainedArtifacts::load(g.artifact_dir());
  std::ostringstream os;
  os << "unit length change_point baseline\n";
  for (const auto& s : quantify_dataset(load_cmapss(input_or_test(g, input)), art)) {
    const auto q = s.weights();
    const auto base = simulation_baseline(q, art.config, art.ewma);
    const auto cp = change_point(q, base, art.config);
    os << s.simulation_id << " " << q.size() << " " << (cp ? std::to_string(*cp + 1) : "-") << " "
       << (base.pooled ? "pooled" : "own") << "\n";
  }
  write_out(g.out_dir + "/change_points.txt", os.str());
  return 0;
}

int cmd_rul(const Globals& g, const std::string& input) {
  const auto art = TrainedArtifacts::load(g.artifact_dir());
  std::vector<RulReport> reports;
  for (const auto& s : quantify_dataset(load_cmapss(input_or_test(g, input)), art))
    reports.push_back(estimate_rul(s.simulation_id, s.weights(), art));
  write_out(g.out_dir + "/rul.txt", format_reports(reports));
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& input, const std::string& truth_path, const std::string& mode) {
  const auto t0 = std::chrono::steady_clock::now();
  auto art = TrainedArtifacts::load(g.artifact_dir());
  if (mode == "training-endpoints") art.config.truth = RulTruth::TrainingEndpoints;
  if (mode == "ground-truth") art.config.truth = RulTruth::GroundTruthFile;
  const bool endpoints = art.config.truth == RulTruth::TrainingEndpoints;
  const auto data = load_cmapss(input.empty() ? g.data_file(endpoints ? "train" : "test") : input);
  std::vector<int> truth;
  if (!endpoints)
    truth = load_rul_truth(truth_path.empty() ? g.data_file("RUL") : truth_path, data.simulations.size());
  const auto ev = evaluate(data, truth, art);
  const auto summary = format_summary(ev.summary, art.config.cycle_threshold);
  write_out(g.out_dir + "/evaluation.txt", format_reports(ev.reports) + "# summary\n" + summary);
  write_out(g.out_dir + "/wer_table.md", format_wer_table(ev.summary.wer_table, art.wer.rule));
  std::cout << summary;
  std::fprintf(stderr, "evaluate finished in %.1f s\n", seconds_since(t0));
  return 0;
}

int cmd_export_plots(const Globals& g, const std::string& input, const std::vector<int>& units) {
  const auto art = TrainedArtifacts::load(g.artifact_dir());
  for (const auto& s : quantify_dataset(load_cmapss(input_or_test(g, input)), art)) {
    if (!units.empty() && std::find(units.begin(), units.end(), s.simulation_id) == units.end()) continue;
    const auto q = s.weights();
    const auto base = simulation_baseline(q, art.config, art.ewma);
    const std::string stem = g.out_dir + "/plots/unit_" + std::to_string(s.simulation_id);
    write_out(stem + "_quantification.txt", format_quantification(s));
    write_out(stem + "_ewma.txt", format_ewma_chart(q, ewma_transform(q, base.params)));
    const auto rep = estimate_rul(s.simulation_id, q, art);
    std::ostringstream fc;
    fc << "cycle forecast\n";
    for (std::size_t i = 0; i < rep.forecast.size(); ++i)
      fc << q.size() + i + 1 << " " << text::format_double(rep.forecast[i]) << "\n";
    write_out(stem + "_forecast.txt", fc.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-oriented-induction predictive maintenance"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Overrides the forecaster seed");
  app.add_option("--data-dir", g.data_dir, "Directory holding train_/test_/RUL_<subset>.txt")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for reports and artifacts")->capture_default_str();
  app.add_option("--subset", g.subset, "Data file suffix")->capture_default_str();
  app.add_option("--artifacts", g.artifacts, "Artifact directory (default <out-dir>/artifacts)");

  std::string input, truth, mode;
  std::vector<int> units;
  SyntheticFleet fleet;

  auto* train = app.add_subcommand("train", "Build hierarchies, knowledge base, baselines, forecaster and rule");
  train->add_option("--input", input, "Training file (default <data-dir>/train_<subset>.txt)");
  auto* quantify = app.add_subcommand("quantify", "Write the quantification series of every unit");
  auto* detect = app.add_subcommand("detect", "Write the EWMA change point of every unit");
  auto* rul = app.add_subcommand("rul", "Estimate the remaining useful life of every unit");
  auto* evaluate = app.add_subcommand("evaluate", "Score RUL estimates against known failures");
  evaluate->add_option("--truth", truth, "RUL truth file (default <data-dir>/RUL_<subset>.txt)");
  evaluate->add_option("--mode", mode, "ground-truth or training-endpoints (default from config)")
      ->check(CLI::IsMember({"ground-truth", "training-endpoints"}));
  auto* plots = app.add_subcommand("export-plots", "Write quantification, EWMA chart and forecast data");
  plots->add_option("--unit", units, "Units to export (default all)");
  for (auto* sub : {quantify, detect, rul, evaluate, plots})
    sub->add_option("--input", input, "Input file (default <data-dir>/test_<subset>.txt)");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic run-to-failure fleet in C-MAPSS layout");
  synth->add_option("--train-units", fleet.train_units)->capture_default_str();
  synth->add_option("--test-units", fleet.test_units)->capture_default_str();
  synth->add_option("--fleet-seed", fleet.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*train) return cmd_train(g, input);
    if (*quantify) return cmd_quantify(g, input);
    if (*detect) return cmd_detect(g, input);
    if (*rul) return cmd_rul(g, input);
    if (*evaluate) return cmd_evaluate(g, input, truth, mode);
    if (*plots) return cmd_export_plots(g, input, units);
    if (*synth) return cmd_synth(g, fleet);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
