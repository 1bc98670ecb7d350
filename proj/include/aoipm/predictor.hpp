#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aoipm {

// How multi-series training data is split into fit and holdout windows.
enum class SplitMode {
  Pooled,    // chronological over the concatenated series: early series fit, late ones are held out
  PerSeries  // chronological inside every series
};

struct TrainConfig {
  int hidden_size = 32;
  int window = 30;
  double learning_rate = 1e-2;
  int epochs = 200;
  int batch_size = 16;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
  double clip_norm = 5.0;
  SplitMode split = SplitMode::Pooled;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Sample {
  std::vector<double> input;  // `window` consecutive values
  double target = 0.0;        // the value that follows them
};

// Sliding windows with stride 1; length - window samples.
std::vector<Sample> make_windows(std::span<const double> series, int window);

// Single-layer LSTM with a scalar input and a linear head. Gate blocks are
// stacked input, forget, output, candidate; each row of `weights` holds the
// input weight followed by the recurrent weights.
class LstmModel {
 public:
  LstmModel() = default;
  LstmModel(int hidden_size, int window);  // all parameters zero

  // Uniform(-0.08, 0.08) weights, forget-gate bias 1.0.
  static LstmModel initialized(int hidden_size, int window, std::uint64_t seed);

  int hidden_size() const noexcept { return hidden_; }
  int window() const noexcept { return window_; }

  double forward(std::span<const double> window) const;

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  Eigen::MatrixXd weights;  // 4H x (1 + H)
  Eigen::VectorXd bias;     // 4H
  Eigen::VectorXd head;     // H
  double head_bias = 0.0;

  friend bool operator==(const LstmModel& a, const LstmModel& b);

 private:
  int hidden_ = 0;
  int window_ = 0;
};

struct Gradients {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Eigen::VectorXd head;
  double head_bias = 0.0;

  std::vector<double> flat() const;  // same order as LstmModel::parameters()
  double norm() const;
};

// Mean squared one-step error over `batch`; fills `grads` by backpropagation
// through time when non-null.
double loss_and_gradients(const LstmModel& model, std::span<const Sample> batch, Gradients* grads);

// Lets tests tamper with analytic gradients before they are compared.
using GradientHook = std::function<void(Gradients&)>;

// Max relative error between analytic gradients and central differences
// (step 1e-5) over every parameter. Terms use max(|a|, |n|, 1e-6) as the
// denominator so that 0-vs-0 entries compare as equal.
double gradient_check(const LstmModel& model, std::span<const Sample> batch, const GradientHook& tamper = {});

struct TrainResult {
  LstmModel model;
  double holdout_rmse = 0.0;
  std::vector<double> epoch_loss;  // mean training loss per epoch
  std::size_t train_samples = 0;
  std::size_t holdout_samples = 0;
};

// Chronological split at floor(train_fraction * n) targets, over the
// concatenation (Pooled) or inside each series (PerSeries); the two agree on a
// single series. Windows never span two series.
TrainResult train(std::span<const std::vector<double>> series, const TrainConfig& config);
TrainResult train(std::span<const double> series, const TrainConfig& config);

double rmse(const LstmModel& model, std::span<const Sample> samples);

struct Forecast {
  std::vector<double> values;  // predictions only
  bool capped = false;         // horizon reached without the stop condition
};

// Closed-loop roll-forward from the last `window` values of `seed`. `stop`
// sees the seed extended by every prediction made so far.
Forecast forecast(const LstmModel& model, std::span<const double> seed,
                  const std::function<bool(std::span<const double>)>& stop, std::size_t horizon_cap);

std::string serialize_model(const LstmModel& model, const TrainConfig& config);
LstmModel parse_model(std::string_view text, TrainConfig* config = nullptr);

}  // namespace aoipm
