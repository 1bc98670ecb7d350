#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// Sample quantile by rank: the value at fractional rank (n - 1) p, found with
// nth_element on a fresh copy rather than a full sort.
inline double quantile(std::vector<double> v, double p) {
  const double rank = static_cast<double>(v.size() - 1) * p;
  double whole = 0.0;
  const double frac = std::modf(rank, &whole);
  const auto k = static_cast<std::size_t>(whole);
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  const double lo = v[k];
  if (frac == 0.0 || k + 1 >= v.size()) return lo;
  const double hi = *std::min_element(v.begin() + static_cast<long>(k) + 1, v.end());
  return lo + frac * (hi - lo);
}

}  // namespace oracle
