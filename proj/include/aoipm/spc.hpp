#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aoipm {

struct EwmaParams {
  double lambda = 0.2;  // weight of the newest observation
  double L = 3.0;       // width of the limits in standard errors
  int n = 1;            // rational subgroup size
  double mu0 = 0.0;
  double sigma = 0.0;

  // Throws InvalidArgument unless 0 < lambda <= 1, L > 0, n >= 1, sigma >= 0.
  void validate() const;

  friend bool operator==(const EwmaParams&, const EwmaParams&) = default;
};

struct Baseline {
  double mu0 = 0.0;
  double sigma = 0.0;  // sample standard deviation (N - 1)
};

struct EwmaSeries {
  std::vector<double> z;
  EwmaParams params;
};

struct ControlLimits {
  double lcl = 0.0;
  double ucl = 0.0;
};

enum class Side { Upper, Lower, Both };

struct WerRule {
  int id = 4;  // 1..4
  Side side = Side::Upper;

  friend bool operator==(const WerRule&, const WerRule&) = default;
};

// Mean and sample deviation of the first n_baseline points.
Baseline fit_baseline(std::span<const double> series, std::size_t n_baseline);

// z_i = lambda x_i + (1 - lambda) z_{i-1}, seeded with z_0 = mu0.
EwmaSeries ewma_transform(std::span<const double> x, const EwmaParams& params);

// Limits for the i-th EWMA statistic (i >= 1, so z[p] uses i = p + 1).
ControlLimits control_limits(const EwmaParams& params, std::size_t i);

// Replaces a zero deviation by a floor scaled to the centre line so that
// "beyond the limit" still means "any deviation".
double effective_sigma(double sigma, double mu0);

// First position p >= baseline_window whose z[p] leaves the limits.
std::optional<std::size_t> detect_change_point(const EwmaSeries& ewma, std::size_t baseline_window,
                                               Side side = Side::Upper);

// Zones are mu0 +/- k sigma on the raw series. Returns the first index >= start
// at which the rule completes, considering only points at or after start:
//   1: one point beyond 3 sigma
//   2: two consecutive points beyond 2 sigma, same side
//   3: three of four consecutive points beyond 1 sigma, same side
//   4: eight consecutive points on the same side of mu0
std::optional<std::size_t> evaluate_wer(const WerRule& rule, std::span<const double> x, double mu0, double sigma,
                                        std::size_t start);

// Columnar chart: "cycle x z ucl lcl centre".
std::string format_ewma_chart(std::span<const double> x, const EwmaSeries& ewma, int first_cycle = 1);

}  // namespace aoipm
