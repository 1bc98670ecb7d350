#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aoipm/error.hpp"
#include "aoipm/predictor.hpp"
#include "oracles/lstm_oracle.hpp"

using namespace aoipm;

namespace {

std::vector<Sample> random_batch(std::mt19937_64& rng, int window, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.input.resize(static_cast<std::size_t>(window));
    for (auto& v : s.input) v = u(rng);
    s.target = u(rng);
  }
  return out;
}

void split_batch(const std::vector<Sample>& batch, std::vector<std::vector<double>>& inputs,
                 std::vector<double>& targets) {
  for (const auto& s : batch) {
    inputs.push_back(s.input);
    targets.push_back(s.target);
  }
}

TrainConfig small_config() {
  TrainConfig c;
  c.hidden_size = 8;
  c.window = 10;
  c.epochs = 200;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("sliding windows") {
  CHECK(make_windows(std::vector<double>{1, 2, 3, 4, 5}, 3).size() == 2);
  const auto w = make_windows(std::vector<double>{1, 2, 3, 4}, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].input == std::vector<double>{1, 2});
  CHECK(w[0].target == 3);
  CHECK(w[1].input == std::vector<double>{2, 3});
  CHECK(w[1].target == 4);
  CHECK_THROWS_AS(make_windows(std::vector<double>{1, 2, 3}, 3), Error);
}

TEST_CASE("zero parameters predict zero") {
  const LstmModel m(4, 5);
  CHECK(m.forward(std::vector<double>{0.3, 0.9, -1.0, 2.0, 0.5}) == 0.0);
  CHECK(m.parameter_count() == 4u * 4 * 5 + 4 * 4 + 4 + 1);
}

TEST_CASE("one-unit cell matches a scalar evaluation") {
  LstmModel m(1, 1);
  m.set_parameters(std::vector<double>(m.parameter_count(), 0.1));
  // Hand evaluation of one step on x = 0.5 with every weight 0.1 and h0 = c0 = 0.
  const double a = 0.1 * 0.5 + 0.1;
  const double gate = 1.0 / (1.0 + std::exp(-a));
  const double c = gate * std::tanh(a);
  const double expected = 0.1 * gate * std::tanh(c) + 0.1;
  CHECK(std::abs(m.forward(std::vector<double>{0.5}) - expected) < 1e-15);
  CHECK(std::abs(m.forward(std::vector<double>{0.5}) - oracle::lstm_forward(m.parameters(), 1, {0.5})) < 1e-15);
}

TEST_CASE("forward agrees with the scalar oracle on random models") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = LstmModel::initialized(6, 12, 100 + static_cast<std::uint64_t>(trial));
    auto p = m.parameters();
    std::normal_distribution<double> n(0.0, 0.5);
    for (auto& v : p) v += n(rng);
    LstmModel big(6, 12);
    big.set_parameters(p);
    const auto batch = random_batch(rng, 12, 3);
    for (const auto& s : batch) CHECK(std::abs(big.forward(s.input) - oracle::lstm_forward(p, 6, s.input)) < 1e-12);
    double bound = std::abs(big.head_bias);
    for (Eigen::Index k = 0; k < big.head.size(); ++k) bound += std::abs(big.head(k));
    for (const auto& s : batch) CHECK(std::abs(big.forward(s.input)) <= bound);
  }
}

TEST_CASE("initialization is seeded and bounded") {
  const auto a = LstmModel::initialized(8, 10, 3);
  CHECK(a == LstmModel::initialized(8, 10, 3));
  CHECK(!(a == LstmModel::initialized(8, 10, 4)));
  for (Eigen::Index r = 0; r < a.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < a.weights.cols(); ++c) CHECK(std::abs(a.weights(r, c)) <= 0.08);
  for (Eigen::Index k = 0; k < 8; ++k) CHECK(a.bias(8 + k) == 1.0);
}

TEST_CASE("analytic gradients match independent central differences") {
  std::mt19937_64 rng(33);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = LstmModel::initialized(5, 6, seed);
    const auto batch = random_batch(rng, 6, 4);
    Gradients g;
    const double loss = loss_and_gradients(m, batch, &g);
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    split_batch(batch, inputs, targets);
    CHECK(std::abs(loss - oracle::lstm_loss(m.parameters(), 5, inputs, targets)) < 1e-12);
    const auto numeric = oracle::lstm_numeric_gradient(m.parameters(), 5, inputs, targets, 1e-6);
    const auto analytic = g.flat();
    REQUIRE(numeric.size() == analytic.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double denom = std::max({std::abs(numeric[k]), std::abs(analytic[k]), 1e-6});
      worst = std::max(worst, std::abs(numeric[k] - analytic[k]) / denom);
    }
    CHECK(worst < 1e-4);
    CHECK(gradient_check(m, batch) < 1e-4);
  }
}

TEST_CASE("gradient check notices corrupted gradients") {
  std::mt19937_64 rng(2);
  const auto m = LstmModel::initialized(4, 5, 9);
  const auto batch = random_batch(rng, 5, 3);
  CHECK(gradient_check(m, batch) < 1e-4);
  CHECK(gradient_check(m, batch, [](Gradients& g) { g.weights = -g.weights; }) > 1e-1);
  CHECK(gradient_check(LstmModel(3, 4), random_batch(rng, 4, 2)) < 1e-4);
}

TEST_CASE("training learns a constant series") {
  const std::vector<double> flat(200, 0.4);
  const auto r = train(flat, small_config());
  CHECK(r.holdout_rmse <= 1e-3);
  for (std::size_t e = 2; e < r.epoch_loss.size(); ++e) CHECK(r.epoch_loss[e] <= r.epoch_loss[e - 1] + 1e-9);
  CHECK(r.train_samples + r.holdout_samples == 190);
}

TEST_CASE("training follows a ramp") {
  std::vector<double> ramp(300);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 299.0;
  // Plain SGD needs far more than 200 epochs before the ramp stops bending
  // over in the holdout; pilot: 0.146 after 200 epochs, 0.033 after 1000.
  auto cfg = small_config();
  cfg.hidden_size = 32;
  cfg.epochs = 1000;
  const auto r = train(ramp, cfg);
  MESSAGE("ramp holdout rmse " << r.holdout_rmse);
  CHECK(r.holdout_rmse <= 0.05);
}

TEST_CASE("training is bit-reproducible and rejects short data") {
  std::vector<double> wave(150);
  for (std::size_t i = 0; i < wave.size(); ++i) wave[i] = 0.5 + 0.3 * std::sin(0.1 * static_cast<double>(i));
  auto cfg = small_config();
  cfg.epochs = 20;
  const auto a = train(wave, cfg);
  const auto b = train(wave, cfg);
  CHECK(a.model == b.model);
  CHECK(a.holdout_rmse == b.holdout_rmse);
  CHECK_THROWS_AS(train(std::vector<double>(10, 0.1), cfg), Error);
  cfg.learning_rate = 1e300;
  cfg.clip_norm = 1e300;
  CHECK_THROWS_AS(train(wave, cfg), Error);
}

TEST_CASE("pooled and per-series splits") {
  std::vector<std::vector<double>> series{std::vector<double>(50, 0.2), std::vector<double>(50, 0.3)};
  auto cfg = small_config();
  cfg.epochs = 1;
  const auto pooled = train(series, cfg);
  // 70 of 100 targets fit: all 40 windows of the first series, then targets before index 20 of the second.
  CHECK(pooled.train_samples == 40 + 10);
  CHECK(pooled.holdout_samples == 30);
  cfg.split = SplitMode::PerSeries;
  const auto per = train(series, cfg);
  CHECK(per.train_samples == 25 + 25);
  CHECK(per.holdout_samples == 15 + 15);
  const std::vector<double> one(100, 0.2);
  cfg.split = SplitMode::Pooled;
  const auto p1 = train(one, cfg);
  cfg.split = SplitMode::PerSeries;
  CHECK(train(one, cfg).model == p1.model);
}

TEST_CASE("forecast stops on the predicate or the cap") {
  LstmModel m(2, 3);
  m.head_bias = 0.7;
  const std::vector<double> seed{0.1, 0.2, 0.3};
  const auto first = forecast(m, seed, [](std::span<const double>) { return true; }, 500);
  CHECK(first.values == std::vector<double>{0.7});
  CHECK(!first.capped);
  const auto capped = forecast(m, seed, [](std::span<const double>) { return false; }, 500);
  CHECK(capped.values.size() == 500);
  CHECK(capped.capped);
  std::size_t seen = 0;
  forecast(m, seed, [&](std::span<const double> h) { return (seen = h.size()) == 6; }, 500);
  CHECK(seen == 6);
  CHECK_THROWS_AS(forecast(m, std::vector<double>{0.1}, {}, 5), Error);
}

TEST_CASE("model files round-trip exactly") {
  auto cfg = small_config();
  cfg.split = SplitMode::PerSeries;
  const auto m = LstmModel::initialized(8, 10, 77);
  const auto text = serialize_model(m, cfg);
  TrainConfig back_cfg;
  const auto back = parse_model(text, &back_cfg);
  CHECK(back == m);
  CHECK(back_cfg.split == SplitMode::PerSeries);
  CHECK(back_cfg.seed == cfg.seed);
  CHECK(back_cfg.epochs == cfg.epochs);
  CHECK(serialize_model(back, back_cfg) == text);
  const std::vector<double> seed(10, 0.25);
  CHECK(forecast(back, seed, {}, 40).values == forecast(m, seed, {}, 40).values);
  CHECK_THROWS_AS(parse_model("aoipm-lstm 2\n"), Error);
}
