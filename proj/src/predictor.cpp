#include "aoipm/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

namespace {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

MatrixXd sigmoid(const MatrixXd& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

struct Trace {
  std::vector<MatrixXd> h, c;           // T + 1 states, H x B
  std::vector<MatrixXd> i, f, o, g;     // T gate activations
  MatrixXd x;                           // T x B inputs
  Eigen::RowVectorXd y;                 // predictions
};

Trace run_forward(const LstmModel& m, std::span<const Sample> batch) {
  const int H = m.hidden_size();
  const int T = m.window();
  const auto B = static_cast<Eigen::Index>(batch.size());
  Trace tr;
  tr.x.resize(T, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& in = batch[static_cast<std::size_t>(b)].input;
    if (static_cast<int>(in.size()) != T)
      throw Error(ErrorCode::InvalidArgument, "input window length " + std::to_string(in.size()) +
                                                  " does not match model window " + std::to_string(T));
    for (int t = 0; t < T; ++t) tr.x(t, b) = in[static_cast<std::size_t>(t)];
  }
  tr.h.assign(static_cast<std::size_t>(T) + 1, MatrixXd::Zero(H, B));
  tr.c.assign(static_cast<std::size_t>(T) + 1, MatrixXd::Zero(H, B));
  MatrixXd stacked(1 + H, B);
  for (int t = 0; t < T; ++t) {
    const auto s = static_cast<std::size_t>(t);
    stacked.row(0) = tr.x.row(t);
    stacked.bottomRows(H) = tr.h[s];
    MatrixXd a = m.weights * stacked;
    a.colwise() += m.bias;
    tr.i.push_back(sigmoid(a.topRows(H)));
    tr.f.push_back(sigmoid(a.middleRows(H, H)));
    tr.o.push_back(sigmoid(a.middleRows(2 * H, H)));
    tr.g.push_back(a.bottomRows(H).array().tanh().matrix());
    tr.c[s + 1] = tr.f[s].cwiseProduct(tr.c[s]) + tr.i[s].cwiseProduct(tr.g[s]);
    tr.h[s + 1] = tr.o[s].cwiseProduct(tr.c[s + 1].array().tanh().matrix());
  }
  tr.y = m.head.transpose() * tr.h.back();
  tr.y.array() += m.head_bias;
  return tr;
}

}  // namespace

std::vector<Sample> make_windows(std::span<const double> series, int window) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  if (series.size() <= w)
    throw Error(ErrorCode::InsufficientData, "series of length " + std::to_string(series.size()) +
                                                 " is too short for window " + std::to_string(window));
  std::vector<Sample> out;
  out.reserve(series.size() - w);
  for (std::size_t t = w; t < series.size(); ++t)
    out.push_back({std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(t - w),
                                       series.begin() + static_cast<std::ptrdiff_t>(t)),
                   series[t]});
  return out;
}

LstmModel::LstmModel(int hidden_size, int window) : hidden_(hidden_size), window_(window) {
  if (hidden_size < 1 || window < 1) throw Error(ErrorCode::InvalidArgument, "hidden size and window must be >= 1");
  weights = MatrixXd::Zero(4 * hidden_size, 1 + hidden_size);
  bias = VectorXd::Zero(4 * hidden_size);
  head = VectorXd::Zero(hidden_size);
}

LstmModel LstmModel::initialized(int hidden_size, int window, std::uint64_t seed) {
  LstmModel m(hidden_size, window);
  std::mt19937_64 rng(seed);
  auto draw = [&] { return -0.08 + 0.16 * uniform01(rng); };
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) m.weights(r, c) = draw();
  for (Eigen::Index r = 0; r < m.bias.size(); ++r) m.bias(r) = draw();
  m.bias.segment(hidden_size, hidden_size).setOnes();
  for (Eigen::Index r = 0; r < m.head.size(); ++r) m.head(r) = draw();
  m.head_bias = draw();
  return m;
}

double LstmModel::forward(std::span<const double> window) const {
  Sample s{std::vector<double>(window.begin(), window.end()), 0.0};
  return run_forward(*this, std::span<const Sample>(&s, 1)).y(0);
}

std::size_t LstmModel::parameter_count() const {
  return static_cast<std::size_t>(weights.size() + bias.size() + head.size() + 1);
}

std::vector<double> LstmModel::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (Eigen::Index r = 0; r < weights.rows(); ++r)
    for (Eigen::Index c = 0; c < weights.cols(); ++c) out.push_back(weights(r, c));
  out.insert(out.end(), bias.data(), bias.data() + bias.size());
  out.insert(out.end(), head.data(), head.data() + head.size());
  out.push_back(head_bias);
  return out;
}

void LstmModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error(ErrorCode::InvalidArgument, "parameter count mismatch");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < weights.rows(); ++r)
    for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = flat[k++];
  for (Eigen::Index r = 0; r < bias.size(); ++r) bias(r) = flat[k++];
  for (Eigen::Index r = 0; r < head.size(); ++r) head(r) = flat[k++];
  head_bias = flat[k];
}

bool operator==(const LstmModel& a, const LstmModel& b) {
  return a.hidden_ == b.hidden_ && a.window_ == b.window_ && a.parameters() == b.parameters();
}

std::vector<double> Gradients::flat() const {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < weights.rows(); ++r)
    for (Eigen::Index c = 0; c < weights.cols(); ++c) out.push_back(weights(r, c));
  out.insert(out.end(), bias.data(), bias.data() + bias.size());
  out.insert(out.end(), head.data(), head.data() + head.size());
  out.push_back(head_bias);
  return out;
}

double Gradients::norm() const {
  return std::sqrt(weights.squaredNorm() + bias.squaredNorm() + head.squaredNorm() + head_bias * head_bias);
}

double loss_and_gradients(const LstmModel& model, std::span<const Sample> batch, Gradients* grads) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const int H = model.hidden_size();
  const int T = model.window();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Trace tr = run_forward(model, batch);

  Eigen::RowVectorXd target(B);
  for (Eigen::Index b = 0; b < B; ++b) target(b) = batch[static_cast<std::size_t>(b)].target;
  const Eigen::RowVectorXd err = tr.y - target;
  const double loss = err.squaredNorm() / static_cast<double>(B);
  if (!grads) return loss;

  const Eigen::RowVectorXd dy = 2.0 * err / static_cast<double>(B);
  grads->weights = MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  grads->bias = VectorXd::Zero(model.bias.size());
  grads->head = tr.h.back() * dy.transpose();
  grads->head_bias = dy.sum();

  MatrixXd dh = model.head * dy;  // H x B
  MatrixXd dc = MatrixXd::Zero(H, B);
  MatrixXd da(4 * H, B);
  MatrixXd stacked(1 + H, B);
  for (int t = T - 1; t >= 0; --t) {
    const auto s = static_cast<std::size_t>(t);
    const ArrayXXd tc = tr.c[s + 1].array().tanh();
    const ArrayXXd i = tr.i[s].array(), f = tr.f[s].array(), o = tr.o[s].array(), g = tr.g[s].array();
    const ArrayXXd dh_a = dh.array();
    ArrayXXd dc_a = dc.array() + dh_a * o * (1.0 - tc * tc);
    da.topRows(H) = (dc_a * g * i * (1.0 - i)).matrix();
    da.middleRows(H, H) = (dc_a * tr.c[s].array() * f * (1.0 - f)).matrix();
    da.middleRows(2 * H, H) = (dh_a * tc * o * (1.0 - o)).matrix();
    da.bottomRows(H) = (dc_a * i * (1.0 - g * g)).matrix();

    stacked.row(0) = tr.x.row(t);
    stacked.bottomRows(H) = tr.h[s];
    grads->weights.noalias() += da * stacked.transpose();
    grads->bias += da.rowwise().sum();
    dh = (model.weights.rightCols(H).transpose() * da);
    dc = (dc_a * f).matrix();
  }
  return loss;
}

double gradient_check(const LstmModel& model, std::span<const Sample> batch, const GradientHook& tamper) {
  Gradients g;
  loss_and_gradients(model, batch, &g);
  if (tamper) tamper(g);
  const auto analytic = g.flat();
  auto params = model.parameters();
  LstmModel probe = model;
  constexpr double h = 1e-5;
  constexpr double floor = 1e-6;
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    probe.set_parameters(params);
    const double up = loss_and_gradients(probe, batch, nullptr);
    params[k] = saved - h;
    probe.set_parameters(params);
    const double down = loss_and_gradients(probe, batch, nullptr);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  return worst;
}

double rmse(const LstmModel& model, std::span<const Sample> samples) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "no samples to score");
  double sse = 0.0;
  constexpr std::size_t chunk = 256;
  for (std::size_t at = 0; at < samples.size(); at += chunk) {
    const auto part = samples.subspan(at, std::min(chunk, samples.size() - at));
    sse += loss_and_gradients(model, part, nullptr) * static_cast<double>(part.size());
  }
  return std::sqrt(sse / static_cast<double>(samples.size()));
}

TrainResult train(std::span<const std::vector<double>> series, const TrainConfig& config) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train fraction must be in (0, 1)");
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0) || !(config.clip_norm > 0.0))
    throw Error(ErrorCode::InvalidArgument, "epochs, batch size, learning rate and clip norm must be positive");

  const auto w = static_cast<std::size_t>(config.window);
  std::size_t total = 0;
  for (const auto& s : series) total += s.size();
  const auto pooled_split = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(total)));
  std::vector<Sample> fit, holdout;
  std::size_t offset = 0;  // position of the series in the concatenation
  for (const auto& s : series) {
    const auto split = config.split == SplitMode::Pooled
                           ? (pooled_split > offset ? pooled_split - offset : 0)
                           : static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(s.size())));
    offset += s.size();
    for (std::size_t t = w; t < s.size(); ++t) {
      Sample sample{std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(t - w),
                                        s.begin() + static_cast<std::ptrdiff_t>(t)),
                    s[t]};
      (t < split ? fit : holdout).push_back(std::move(sample));
    }
  }
  if (fit.empty() || holdout.empty())
    throw Error(ErrorCode::InsufficientData, "need at least one training and one holdout window");

  TrainResult result;
  result.model = LstmModel::initialized(config.hidden_size, config.window, config.seed);
  result.train_samples = fit.size();
  result.holdout_samples = holdout.size();
  auto& model = result.model;

  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(fit.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sample> batch;
  Gradients g;
  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng() % k]);
    double total = 0.0;
    for (std::size_t at = 0; at < order.size(); at += bs) {
      batch.clear();
      for (std::size_t k = at; k < std::min(order.size(), at + bs); ++k) batch.push_back(fit[order[k]]);
      const double loss = loss_and_gradients(model, batch, &g);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::TrainingDiverged, "loss became non-finite in epoch " + std::to_string(epoch));
      total += loss * static_cast<double>(batch.size());
      const double norm = g.norm();
      const double scale = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
      const double step = config.learning_rate * scale;
      model.weights -= step * g.weights;
      model.bias -= step * g.bias;
      model.head -= step * g.head;
      model.head_bias -= step * g.head_bias;
    }
    result.epoch_loss.push_back(total / static_cast<double>(fit.size()));
  }
  result.holdout_rmse = rmse(model, holdout);
  if (!std::isfinite(result.holdout_rmse))
    throw Error(ErrorCode::TrainingDiverged, "holdout error is non-finite");
  return result;
}

TrainResult train(std::span<const double> series, const TrainConfig& config) {
  const std::vector<std::vector<double>> one{std::vector<double>(series.begin(), series.end())};
  return train(std::span<const std::vector<double>>(one), config);
}

Forecast forecast(const LstmModel& model, std::span<const double> seed,
                  const std::function<bool(std::span<const double>)>& stop, std::size_t horizon_cap) {
  const auto w = static_cast<std::size_t>(model.window());
  if (seed.size() < w)
    throw Error(ErrorCode::InsufficientData, "forecast seed shorter than the model window");
  std::vector<double> history(seed.begin(), seed.end());
  Forecast out;
  while (out.values.size() < horizon_cap) {
    const double next = model.forward(std::span<const double>(history).last(w));
    history.push_back(next);
    out.values.push_back(next);
    if (stop && stop(history)) return out;
  }
  out.capped = true;
  return out;
}

std::string serialize_model(const LstmModel& model, const TrainConfig& config) {
  std::ostringstream os;
  char buf[64];
  os << "aoipm-lstm 1\n";
  os << "hidden " << model.hidden_size() << "\n";
  os << "window " << model.window() << "\n";
  os << "seed " << config.seed << "\n";
  os << "train " << text::format_double(config.learning_rate) << " " << config.epochs << " " << config.batch_size
     << " " << text::format_double(config.train_fraction) << " " << text::format_double(config.clip_norm) << " "
     << (config.split == SplitMode::Pooled ? "pooled" : "per-series") << "\n";
  const auto params = model.parameters();
  os << "parameters " << params.size() << "\n";
  for (double p : params) {
    std::snprintf(buf, sizeof buf, "%a", p);
    os << buf << "\n";
  }
  return os.str();
}

LstmModel parse_model(std::string_view doc, TrainConfig* config) {
  const auto lines = text::split(doc, '\n');
  std::size_t ln = 0;
  auto next = [&]() {
    while (ln < lines.size()) {
      auto tok = text::split_ws(lines[ln++]);
      if (!tok.empty()) return tok;
    }
    throw ParseError(ErrorCode::Parse, ln, "unexpected end of model file");
  };
  auto fail = [&](const std::string& what) { return ParseError(ErrorCode::Parse, ln, what); };
  auto expect = [&](std::string_view key, std::size_t n) {
    auto tok = next();
    if (tok.size() != n + 1 || tok[0] != key) throw fail("expected '" + std::string(key) + "'");
    return tok;
  };
  auto integer = [&](std::string_view s) {
    const auto v = text::parse_int(s);
    if (!v) throw fail("bad integer '" + std::string(s) + "'");
    return *v;
  };
  auto real = [&](std::string_view s) {
    const auto v = text::parse_double(s);
    if (!v) throw fail("bad number '" + std::string(s) + "'");
    return *v;
  };

  auto tok = next();
  if (tok.size() != 2 || tok[0] != "aoipm-lstm" || tok[1] != "1") throw fail("not an aoipm-lstm v1 file");
  const auto hidden = static_cast<int>(integer(expect("hidden", 1)[1]));
  const auto window = static_cast<int>(integer(expect("window", 1)[1]));
  TrainConfig cfg;
  cfg.hidden_size = hidden;
  cfg.window = window;
  cfg.seed = static_cast<std::uint64_t>(integer(expect("seed", 1)[1]));
  tok = expect("train", 6);
  cfg.learning_rate = real(tok[1]);
  cfg.epochs = static_cast<int>(integer(tok[2]));
  cfg.batch_size = static_cast<int>(integer(tok[3]));
  cfg.train_fraction = real(tok[4]);
  cfg.clip_norm = real(tok[5]);
  if (tok[6] == "pooled")
    cfg.split = SplitMode::Pooled;
  else if (tok[6] == "per-series")
    cfg.split = SplitMode::PerSeries;
  else
    throw fail("unknown split mode '" + std::string(tok[6]) + "'");
  LstmModel model(hidden, window);
  const auto count = static_cast<std::size_t>(integer(expect("parameters", 1)[1]));
  if (count != model.parameter_count()) throw fail("parameter count does not match dimensions");
  std::vector<double> params;
  params.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    tok = next();
    if (tok.size() != 1) throw fail("expected one parameter per line");
    params.push_back(real(tok[0]));
  }
  model.set_parameters(params);
  if (config) *config = cfg;
  return model;
}

}  // namespace aoipm
