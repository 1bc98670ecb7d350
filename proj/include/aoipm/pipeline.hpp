#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aoipm/aoi.hpp"
#include "aoipm/dataio.hpp"
#include "aoipm/hierarchy.hpp"
#include "aoipm/predictor.hpp"
#include "aoipm/quantification.hpp"
#include "aoipm/spc.hpp"

namespace aoipm {

// Where the true RUL of an evaluated simulation comes from.
enum class RulTruth {
  GroundTruthFile,   // test units + RUL file; RUL counted from the last observed cycle
  TrainingEndpoints  // run-to-failure units cut at their change point
};

struct PipelineConfig {
  int num_levels = 4;   // raw, deciles, merged pairs, ANY
  int base_bins = 10;
  // A tuple cap of 200 pushes every row into near-ANY clusters on run-to-failure
  // data; a cap above the row count lets the attribute gate decide alone.
  AoiParams aoi{10, 20, 1000000};
  double constant_tolerance = 0.0;
  bool drop_unbinnable = true;  // drop attributes with fewer distinct values than base_bins
  std::string hierarchy_file;   // optional expert hierarchies; others are auto-built

  double lambda = 0.2;
  double L = 3.0;
  std::size_t n_baseline = 100;
  bool two_sided = false;

  TrainConfig lstm;
  std::size_t horizon_cap = 500;
  int cycle_threshold = 40;
  RulTruth truth = RulTruth::GroundTruthFile;

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct WerRow {
  int rule = 0;
  double mae = 0.0;
  double mse = 0.0;
  std::size_t non_triggers = 0;  // simulations charged the silent-rule penalty
  std::vector<long long> errors; // trigger - failure per simulation (penalty when silent)
};

struct WerSelection {
  WerRule rule;
  std::array<WerRow, 4> table;
};

struct TrainedArtifacts {
  PipelineConfig config;
  std::vector<std::size_t> retained;
  std::vector<std::string> attribute_names;
  std::vector<ConceptHierarchy> hierarchies;
  KnowledgeBase kb;
  std::size_t residual_tuples = 0;
  EwmaParams ewma;  // pooled baseline over training simulations
  LstmModel model;
  double holdout_rmse = 0.0;
  WerSelection wer;

  void save(const std::string& dir) const;
  static TrainedArtifacts load(const std::string& dir);
};

// Per-simulation baseline: its own first n_baseline points when there are more
// than that, otherwise the pooled training baseline (no ignored window).
struct SimulationBaseline {
  EwmaParams params;
  std::size_t window = 0;
  bool pooled = false;
};
SimulationBaseline simulation_baseline(std::span<const double> q, const PipelineConfig& config,
                                       const EwmaParams& pooled);

// Change point of a quantification series, or nullopt.
std::optional<std::size_t> change_point(std::span<const double> q, const SimulationBaseline& baseline,
                                        const PipelineConfig& config);

// Rules 1-4 on run-to-failure series (failure = last cycle). Each rule scans
// from the series' change point, or from the end of the baseline when none is
// found. A silent rule is charged (length - start). Lowest MAE wins, then
// lowest MSE, then the higher rule id.
WerSelection select_wer(std::span<const std::vector<double>> quantifications, const PipelineConfig& config,
                        const EwmaParams& pooled);

TrainedArtifacts train_pipeline(const Dataset& train, const PipelineConfig& config);

struct RulReport {
  int unit = 0;
  std::size_t length = 0;
  std::optional<std::size_t> change_point;
  std::optional<std::size_t> anomaly_at_real;
  std::optional<std::size_t> anomaly_at_forecast;
  bool capped = false;
  bool pooled_baseline = false;
  std::optional<long long> predicted_rul;        // from the last observed cycle
  std::optional<long long> rul_from_change_point;
  std::optional<long long> true_rul;
  std::optional<long long> abs_error;
  std::vector<double> forecast;
};

// `q` is the observed quantification; the anomaly index is in q's coordinates.
RulReport estimate_rul(int unit, std::span<const double> q, const TrainedArtifacts& artifacts);

struct EvaluationSummary {
  std::size_t simulations = 0;
  std::size_t predictions = 0;
  double mae = 0.0;
  double mse = 0.0;
  std::size_t filtered_count = 0;
  double filtered_mae = 0.0;  // change point after cycle_threshold
  double early_detection_rate = 0.0;
  std::size_t capped = 0;
  std::array<WerRow, 4> wer_table;
};

struct Evaluation {
  std::vector<RulReport> reports;
  EvaluationSummary summary;
};

// Ground-truth mode: `data` holds truncated units and `true_rul` their truth.
// Training-endpoint mode: `data` holds run-to-failure units, `true_rul` is ignored.
Evaluation evaluate(const Dataset& data, std::span<const int> true_rul, const TrainedArtifacts& artifacts);

EvaluationSummary summarize(std::span<const RulReport> reports, const TrainedArtifacts& artifacts);

std::vector<QuantificationSeries> quantify_dataset(const Dataset& data, const TrainedArtifacts& artifacts);

std::string format_reports(std::span<const RulReport> reports);
std::string format_summary(const EvaluationSummary& summary, int cycle_threshold);
std::string format_wer_table(const std::array<WerRow, 4>& table, const WerRule& selected);

}  // namespace aoipm
