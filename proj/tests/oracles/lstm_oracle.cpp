#include "oracles/lstm_oracle.hpp"

#include <cmath>
#include <cstddef>

namespace oracle {

namespace {

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace

double lstm_forward(const std::vector<double>& params, int hidden, const std::vector<double>& window) {
  const auto H = static_cast<std::size_t>(hidden);
  const std::size_t cols = 1 + H;
  const std::size_t bias_at = 4 * H * cols;
  const std::size_t head_at = bias_at + 4 * H;
  std::vector<double> h(H, 0.0), c(H, 0.0), pre(4 * H);
  for (double x : window) {
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double a = params[bias_at + r] + params[r * cols] * x;
      for (std::size_t k = 0; k < H; ++k) a += params[r * cols + 1 + k] * h[k];
      pre[r] = a;
    }
    for (std::size_t k = 0; k < H; ++k) {
      const double in = logistic(pre[k]);
      const double forget = logistic(pre[H + k]);
      const double out = logistic(pre[2 * H + k]);
      const double cand = std::tanh(pre[3 * H + k]);
      c[k] = forget * c[k] + in * cand;
      h[k] = out * std::tanh(c[k]);
    }
  }
  double y = params[head_at + H];
  for (std::size_t k = 0; k < H; ++k) y += params[head_at + k] * h[k];
  return y;
}

double lstm_loss(const std::vector<double>& params, int hidden, const std::vector<std::vector<double>>& inputs,
                 const std::vector<double>& targets) {
  double sum = 0.0;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const double e = lstm_forward(params, hidden, inputs[b]) - targets[b];
    sum += e * e;
  }
  return sum / static_cast<double>(inputs.size());
}

std::vector<double> lstm_numeric_gradient(const std::vector<double>& params, int hidden,
                                          const std::vector<std::vector<double>>& inputs,
                                          const std::vector<double>& targets, double step) {
  std::vector<double> grad(params.size());
  std::vector<double> p = params;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + step;
    const double up = lstm_loss(p, hidden, inputs, targets);
    p[k] = keep - step;
    const double down = lstm_loss(p, hidden, inputs, targets);
    p[k] = keep;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace oracle
