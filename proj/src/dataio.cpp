#include "aoipm/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

const std::vector<std::string>& measurement_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (std::size_t i = 1; i <= kSettings; ++i) n.push_back("setting" + std::to_string(i));
    for (std::size_t i = 1; i <= kSensors; ++i) n.push_back("s" + std::to_string(i));
    return n;
  }();
  return names;
}

std::vector<std::string> Dataset::attribute_names() const {
  std::vector<std::string> out;
  for (auto idx : retained) out.push_back(measurement_names()[idx]);
  return out;
}

std::vector<std::vector<double>> Dataset::features(const Simulation& sim) const {
  std::vector<std::vector<double>> out;
  out.reserve(sim.length());
  for (const auto& row : sim.measurements) {
    std::vector<double> f;
    f.reserve(retained.size());
    for (auto idx : retained) f.push_back(row[idx]);
    out.push_back(std::move(f));
  }
  return out;
}

std::size_t Dataset::total_cycles() const {
  std::size_t n = 0;
  for (const auto& s : simulations) n += s.length();
  return n;
}

Dataset parse_cmapss(std::string_view doc, std::string source) {
  struct Row {
    int cycle;
    std::size_t line;
    std::vector<double> values;
  };
  std::map<int, std::vector<Row>> units;
  std::size_t line_no = 0;
  for (auto line : text::split(doc, '\n')) {
    ++line_no;
    const auto tok = text::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != kColumns)
      throw ParseError(ErrorCode::Load, line_no,
                       "expected " + std::to_string(kColumns) + " columns, found " + std::to_string(tok.size()));
    std::vector<double> nums;
    nums.reserve(kColumns);
    for (auto t : tok) {
      const auto v = text::parse_double(t);
      if (!v || !std::isfinite(*v)) throw ParseError(ErrorCode::Load, line_no, "non-numeric field '" + std::string(t) + "'");
      nums.push_back(*v);
    }
    const double unit = nums[0], cycle = nums[1];
    if (unit != std::floor(unit) || cycle != std::floor(cycle) || cycle < 1 ||
        std::abs(unit) > std::numeric_limits<int>::max() || cycle > std::numeric_limits<int>::max())
      throw ParseError(ErrorCode::Load, line_no, "unit and cycle must be positive integers");
    units[static_cast<int>(unit)].push_back(
        {static_cast<int>(cycle), line_no, std::vector<double>(nums.begin() + 2, nums.end())});
  }
  if (units.empty()) throw Error(ErrorCode::Load, source + ": no records");

  Dataset ds;
  ds.source = std::move(source);
  ds.checksum = text::fnv1a64(doc);
  for (auto& [unit, rows] : units) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.cycle < b.cycle; });
    Simulation sim;
    sim.unit = unit;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].cycle != static_cast<int>(i) + 1)
        throw ParseError(ErrorCode::Load, rows[i].line,
                         "unit " + std::to_string(unit) + ": cycles are not contiguous from 1 (expected " +
                             std::to_string(i + 1) + ", found " + std::to_string(rows[i].cycle) + ")");
      sim.measurements.push_back(std::move(rows[i].values));
    }
    ds.simulations.push_back(std::move(sim));
  }
  ds.retained.resize(kMeasurements);
  for (std::size_t i = 0; i < kMeasurements; ++i) ds.retained[i] = i;
  return ds;
}

Dataset load_cmapss(const std::string& path) { return parse_cmapss(text::read_file(path), path); }

Dataset drop_operational_settings(Dataset ds) {
  std::erase_if(ds.retained, [](std::size_t idx) { return idx < kSettings; });
  return ds;
}

std::vector<std::size_t> constant_attributes(const Dataset& ds, double tolerance) {
  std::vector<std::size_t> out;
  for (auto idx : ds.retained) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& sim : ds.simulations)
      for (const auto& row : sim.measurements) {
        lo = std::min(lo, row[idx]);
        hi = std::max(hi, row[idx]);
      }
    if (hi - lo <= tolerance) out.push_back(idx);
  }
  return out;
}

Dataset drop_attributes(Dataset ds, const std::vector<std::size_t>& measurement_indexes) {
  const std::set<std::size_t> drop(measurement_indexes.begin(), measurement_indexes.end());
  std::erase_if(ds.retained, [&](std::size_t idx) { return drop.count(idx) > 0; });
  if (ds.retained.empty()) throw Error(ErrorCode::EmptyFeatures, "every attribute was dropped");
  return ds;
}

Dataset drop_constant_attributes(Dataset ds, double tolerance) {
  const auto constant = constant_attributes(ds, tolerance);
  return drop_attributes(std::move(ds), constant);
}

std::vector<std::size_t> low_cardinality_attributes(const Dataset& ds, std::size_t min_distinct) {
  std::vector<std::size_t> out;
  for (auto idx : ds.retained) {
    std::set<double> seen;
    for (const auto& sim : ds.simulations) {
      for (const auto& row : sim.measurements) {
        seen.insert(row[idx]);
        if (seen.size() >= min_distinct) break;
      }
      if (seen.size() >= min_distinct) break;
    }
    if (seen.size() < min_distinct) out.push_back(idx);
  }
  return out;
}

Dataset with_retained(Dataset ds, const std::vector<std::size_t>& retained) {
  for (auto idx : retained)
    if (idx >= kMeasurements) throw Error(ErrorCode::InvalidArgument, "retained index out of range");
  if (retained.empty()) throw Error(ErrorCode::EmptyFeatures, "empty retained attribute set");
  ds.retained = retained;
  return ds;
}

std::vector<int> parse_rul_truth(std::string_view doc, std::size_t expected_units) {
  std::vector<int> out;
  std::size_t line_no = 0;
  for (auto line : text::split(doc, '\n')) {
    ++line_no;
    const auto tok = text::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 1) throw ParseError(ErrorCode::Load, line_no, "expected a single RUL value");
    const auto v = text::parse_int(tok[0]);
    if (!v) throw ParseError(ErrorCode::Load, line_no, "RUL must be an integer");
    if (*v < 0) throw ParseError(ErrorCode::Load, line_no, "RUL must be non-negative");
    out.push_back(static_cast<int>(*v));
  }
  if (out.size() != expected_units)
    throw Error(ErrorCode::Alignment, "truth file has " + std::to_string(out.size()) + " values for " +
                                          std::to_string(expected_units) + " units");
  return out;
}

std::vector<int> load_rul_truth(const std::string& path, std::size_t expected_units) {
  return parse_rul_truth(text::read_file(path), expected_units);
}

}  // namespace aoipm
