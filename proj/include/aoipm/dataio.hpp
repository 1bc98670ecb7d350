#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aoipm {

// C-MAPSS record layout: unit, cycle, 3 operational settings, 21 sensors.
inline constexpr std::size_t kSettings = 3;
inline constexpr std::size_t kSensors = 21;
inline constexpr std::size_t kMeasurements = kSettings + kSensors;
inline constexpr std::size_t kColumns = 2 + kMeasurements;

// Measurement names in column order: setting1..3, s1..s21.
const std::vector<std::string>& measurement_names();

struct Simulation {
  int unit = 0;
  std::vector<std::vector<double>> measurements;  // one row of kMeasurements per cycle, cycle 1 first

  std::size_t length() const { return measurements.size(); }
};

struct Dataset {
  std::vector<Simulation> simulations;  // ascending unit id
  std::vector<std::size_t> retained;    // indexes into a measurement row
  std::string source;
  std::uint64_t checksum = 0;           // FNV-1a of the file contents

  std::vector<std::string> attribute_names() const;
  // Retained columns of every cycle of `sim`.
  std::vector<std::vector<double>> features(const Simulation& sim) const;
  std::size_t total_cycles() const;
};

Dataset parse_cmapss(std::string_view text, std::string source = "<memory>");
Dataset load_cmapss(const std::string& path);

Dataset drop_operational_settings(Dataset ds);

// Retained measurements whose range over the whole dataset is <= tolerance.
std::vector<std::size_t> constant_attributes(const Dataset& ds, double tolerance);
Dataset drop_constant_attributes(Dataset ds, double tolerance);

// Retained measurements with fewer than `min_distinct` distinct values.
std::vector<std::size_t> low_cardinality_attributes(const Dataset& ds, std::size_t min_distinct);
Dataset drop_attributes(Dataset ds, const std::vector<std::size_t>& measurement_indexes);

// Applies a training retained set to another dataset.
Dataset with_retained(Dataset ds, const std::vector<std::size_t>& retained);

std::vector<int> parse_rul_truth(std::string_view text, std::size_t expected_units);
std::vector<int> load_rul_truth(const std::string& path, std::size_t expected_units);

}  // namespace aoipm
