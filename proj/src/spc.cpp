#include "aoipm/spc.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

void EwmaParams::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be in (0, 1]");
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be positive");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "subgroup size must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(mu0)) throw Error(ErrorCode::InvalidArgument, "bad mu0/sigma");
}

Baseline fit_baseline(std::span<const double> series, std::size_t n_baseline) {
  if (n_baseline < 2) throw Error(ErrorCode::InvalidArgument, "baseline needs at least 2 points");
  if (series.size() < n_baseline)
    throw Error(ErrorCode::InsufficientBaseline, "series has " + std::to_string(series.size()) +
                                                     " points, baseline needs " + std::to_string(n_baseline));
  // Shifting by the first point keeps a constant baseline exact.
  const double shift = series[0];
  double offset = 0.0;
  for (std::size_t i = 0; i < n_baseline; ++i) offset += series[i] - shift;
  const double mean = shift + offset / static_cast<double>(n_baseline);
  double ss = 0.0;
  for (std::size_t i = 0; i < n_baseline; ++i) ss += (series[i] - mean) * (series[i] - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n_baseline - 1))};
}

EwmaSeries ewma_transform(std::span<const double> x, const EwmaParams& params) {
  params.validate();
  EwmaSeries out{{}, params};
  out.z.reserve(x.size());
  double prev = params.mu0;
  for (double v : x) {
    prev = params.lambda * v + (1.0 - params.lambda) * prev;
    out.z.push_back(prev);
  }
  return out;
}

ControlLimits control_limits(const EwmaParams& params, std::size_t i) {
  params.validate();
  if (i < 1) throw Error(ErrorCode::InvalidArgument, "control limit index starts at 1");
  const double lam = params.lambda;
  const double decay = 1.0 - std::pow(1.0 - lam, 2.0 * static_cast<double>(i));
  const double half = params.L * params.sigma / std::sqrt(static_cast<double>(params.n)) *
                      std::sqrt(lam / (2.0 - lam) * decay);
  return {params.mu0 - half, params.mu0 + half};
}

double effective_sigma(double sigma, double mu0) {
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mu0));
  return std::max(sigma, floor);
}

std::optional<std::size_t> detect_change_point(const EwmaSeries& ewma, std::size_t baseline_window, Side side) {
  EwmaParams p = ewma.params;
  p.sigma = effective_sigma(p.sigma, p.mu0);
  for (std::size_t pos = baseline_window; pos < ewma.z.size(); ++pos) {
    const auto lim = control_limits(p, pos + 1);
    const double z = ewma.z[pos];
    if ((side != Side::Lower && z > lim.ucl) || (side != Side::Upper && z < lim.lcl)) return pos;
  }
  return std::nullopt;
}

namespace {

// Scans one side; `sign` = +1 for above the centre line, -1 for below.
std::optional<std::size_t> scan_side(int rule, std::span<const double> x, double mu0, double sigma,
                                     std::size_t start, double sign) {
  auto beyond = [&](std::size_t i, double k) { return sign * (x[i] - mu0) > k * sigma; };
  std::size_t run = 0;
  for (std::size_t i = start; i < x.size(); ++i) {
    switch (rule) {
      case 1:
        if (beyond(i, 3.0)) return i;
        break;
      case 2:
        run = beyond(i, 2.0) ? run + 1 : 0;
        if (run >= 2) return i;
        break;
      case 3: {
        const std::size_t from = i >= start + 3 ? i - 3 : start;
        std::size_t count = 0;
        for (std::size_t k = from; k <= i; ++k) count += beyond(k, 1.0) ? 1 : 0;
        if (count >= 3) return i;
        break;
      }
      case 4:
        run = beyond(i, 0.0) ? run + 1 : 0;
        if (run >= 8) return i;
        break;
      default:
        throw Error(ErrorCode::InvalidArgument, "unknown Western Electric rule " + std::to_string(rule));
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> evaluate_wer(const WerRule& rule, std::span<const double> x, double mu0, double sigma,
                                        std::size_t start) {
  if (rule.id < 1 || rule.id > 4)
    throw Error(ErrorCode::InvalidArgument, "unknown Western Electric rule " + std::to_string(rule.id));
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  const double s = effective_sigma(sigma, mu0);
  std::optional<std::size_t> up, down;
  if (rule.side != Side::Lower) up = scan_side(rule.id, x, mu0, s, start, 1.0);
  if (rule.side != Side::Upper) down = scan_side(rule.id, x, mu0, s, start, -1.0);
  if (up && down) return std::min(*up, *down);
  return up ? up : down;
}

std::string format_ewma_chart(std::span<const double> x, const EwmaSeries& ewma, int first_cycle) {
  std::ostringstream os;
  os << "cycle x z ucl lcl centre\n";
  for (std::size_t i = 0; i < ewma.z.size(); ++i) {
    const auto lim = control_limits(ewma.params, i + 1);
    os << first_cycle + static_cast<int>(i) << " " << text::format_double(i < x.size() ? x[i] : NAN) << " "
       << text::format_double(ewma.z[i]) << " " << text::format_double(lim.ucl) << " "
       << text::format_double(lim.lcl) << " " << text::format_double(ewma.params.mu0) << "\n";
  }
  return os.str();
}

}  // namespace aoipm
