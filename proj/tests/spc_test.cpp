#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aoipm/error.hpp"
#include "aoipm/spc.hpp"

using namespace aoipm;

TEST_CASE("baseline is mean and sample deviation of the leading points") {
  const auto b = fit_baseline(std::vector<double>{0.0, 1.0}, 2);
  CHECK(b.mu0 == 0.5);
  CHECK(b.sigma == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  const auto flat = fit_baseline(std::vector<double>(120, 0.3), 100);
  CHECK(flat.mu0 == 0.3);
  CHECK(flat.sigma == 0.0);
  CHECK_THROWS_AS(fit_baseline(std::vector<double>(5, 1.0), 6), Error);
  CHECK_THROWS_AS(fit_baseline(std::vector<double>(5, 1.0), 1), Error);
}

TEST_CASE("ewma recursion") {
  const std::vector<double> x{0.1, 0.7, 0.3};
  EwmaParams p;
  p.lambda = 1.0;
  CHECK(ewma_transform(x, p).z == x);
  p.lambda = 0.2;
  CHECK(ewma_transform(std::vector<double>{1.0}, p).z == std::vector<double>{0.2});
  p.mu0 = 0.4;
  for (double z : ewma_transform(std::vector<double>(50, 0.4), p).z) CHECK(z == doctest::Approx(0.4).epsilon(1e-15));
  p.lambda = 0.0;
  CHECK_THROWS_AS(ewma_transform(x, p), Error);
}

TEST_CASE("ewma stays within the hull of the data and the seed") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200);
    for (auto& v : x) v = u(rng);
    EwmaParams p;
    p.lambda = 0.05 + 0.9 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    p.mu0 = u(rng);
    const double lo = std::min(*std::min_element(x.begin(), x.end()), p.mu0);
    const double hi = std::max(*std::max_element(x.begin(), x.end()), p.mu0);
    for (double z : ewma_transform(x, p).z) {
      CHECK(z >= lo - 1e-12);
      CHECK(z <= hi + 1e-12);
    }
  }
}

TEST_CASE("control limits converge to the asymptote") {
  EwmaParams p{0.2, 3.0, 1, 0.5, 0.1};
  const double asymptote = p.mu0 + p.L * p.sigma * std::sqrt(p.lambda / (2.0 - p.lambda));
  CHECK(std::abs(control_limits(p, 10000).ucl - asymptote) < 1e-9);
  double prev = 0.0;
  for (std::size_t i = 1; i < 200; ++i) {
    const auto lim = control_limits(p, i);
    CHECK(lim.ucl >= prev);
    CHECK(lim.ucl - p.mu0 == doctest::Approx(p.mu0 - lim.lcl).epsilon(1e-12));
    prev = lim.ucl;
  }
  p.lambda = 1.0;
  for (std::size_t i : {1u, 2u, 50u}) CHECK(control_limits(p, i).ucl == p.mu0 + p.L * p.sigma);
  p.sigma = 0.0;
  CHECK(control_limits(p, 3).ucl == p.mu0);
  CHECK(control_limits(p, 3).lcl == p.mu0);
  CHECK_THROWS_AS(control_limits(p, 0), Error);
}

TEST_CASE("change point is the first crossing after the baseline") {
  EwmaParams p{0.2, 3.0, 1, 0.0, 1.0};
  std::vector<double> x(200, 0.0);
  CHECK(!detect_change_point(ewma_transform(x, p), 100));
  // Step to 1.5 at 120: z = 1.5 (1 - 0.8^(k+1)) first exceeds ~1.0 a few steps later.
  for (std::size_t i = 120; i < x.size(); ++i) x[i] = 1.5;
  const auto e = ewma_transform(x, p);
  std::size_t expected = 0;
  for (std::size_t i = 100; i < e.z.size(); ++i)
    if (e.z[i] > control_limits(p, i + 1).ucl) {
      expected = i;
      break;
    }
  CHECK(detect_change_point(e, 100) == expected);

  std::vector<double> spike(200, 0.0);
  spike[10] = 50.0;
  spike[120] = 50.0;
  const auto s = detect_change_point(ewma_transform(spike, p), 100);
  CHECK(s == 120);
  CHECK(detect_change_point(ewma_transform(spike, p), 5) == 10);
  auto altered = spike;
  for (std::size_t i = 121; i < altered.size(); ++i) altered[i] = -7.0;
  CHECK(detect_change_point(ewma_transform(altered, p), 100) == 120);
}

TEST_CASE("lower and two-sided detection") {
  EwmaParams p{0.2, 3.0, 1, 0.0, 1.0};
  std::vector<double> x(50, 0.0);
  x[20] = -40.0;
  const auto e = ewma_transform(x, p);
  CHECK(!detect_change_point(e, 10, Side::Upper));
  CHECK(detect_change_point(e, 10, Side::Lower) == 20);
  CHECK(detect_change_point(e, 10, Side::Both) == 20);
}

TEST_CASE("zero deviation baselines flag any rise") {
  EwmaParams p{0.2, 3.0, 1, 0.6, 0.0};
  std::vector<double> x(30, 0.6);
  CHECK(!detect_change_point(ewma_transform(x, p), 10));
  x[15] = 0.6000001;
  CHECK(detect_change_point(ewma_transform(x, p), 10) == 15);
  CHECK(effective_sigma(0.0, 0.6) > 0.0);
  CHECK(effective_sigma(0.2, 0.6) == 0.2);
}

TEST_CASE("western electric rules") {
  const double mu = 0.5, sd = 0.1;
  std::vector<double> x(40, mu);
  const std::size_t k = 10;
  SUBCASE("rule 4 completes on the eighth point") {
    for (std::size_t i = k; i < x.size(); ++i) x[i] = mu + 1e-3;
    CHECK(evaluate_wer({4, Side::Upper}, x, mu, sd, 0) == k + 7);
    CHECK(evaluate_wer({4, Side::Upper}, x, mu, sd, k + 5) == k + 12);
    CHECK(!evaluate_wer({4, Side::Lower}, x, mu, sd, 0));
  }
  SUBCASE("rule 1 fires on a spike") {
    x[k] = mu + 4 * sd;
    CHECK(evaluate_wer({1, Side::Upper}, x, mu, sd, 0) == k);
    CHECK(!evaluate_wer({1, Side::Upper}, x, mu, sd, k + 1));
    x[k] = mu - 4 * sd;
    CHECK(!evaluate_wer({1, Side::Upper}, x, mu, sd, 0));
    CHECK(evaluate_wer({1, Side::Both}, x, mu, sd, 0) == k);
  }
  SUBCASE("rule 2 needs two consecutive points") {
    x[k] = mu + 2.5 * sd;
    x[k + 2] = mu + 2.5 * sd;
    CHECK(!evaluate_wer({2, Side::Upper}, x, mu, sd, 0));
    x[k + 3] = mu + 2.5 * sd;
    CHECK(evaluate_wer({2, Side::Upper}, x, mu, sd, 0) == k + 3);
  }
  SUBCASE("rule 3 counts three of four") {
    const double hi = mu + 1.5 * sd, lo = mu;
    x[k] = hi;
    x[k + 1] = hi;
    x[k + 2] = lo;
    x[k + 3] = hi;
    CHECK(evaluate_wer({3, Side::Upper}, x, mu, sd, 0) == k + 3);
    CHECK(!evaluate_wer({3, Side::Upper}, x, mu, sd, k + 1));
  }
  CHECK_THROWS_AS(evaluate_wer({5, Side::Upper}, x, mu, sd, 0), Error);
  CHECK_THROWS_AS(evaluate_wer({1, Side::Upper}, x, mu, -1.0, 0), Error);
}

TEST_CASE("chart export has one row per point") {
  EwmaParams p{0.2, 3.0, 1, 0.0, 1.0};
  const std::vector<double> x{0.0, 1.0};
  const auto text = format_ewma_chart(x, ewma_transform(x, p));
  CHECK(text.rfind("cycle x z ucl lcl centre\n1 0 0 ", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
