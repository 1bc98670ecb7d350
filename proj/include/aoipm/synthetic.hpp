#pragma once

#include <cstdint>
#include <string>

namespace aoipm {

// Run-to-failure fleet in the C-MAPSS text layout. Each unit starts at a
// random initial wear, degrades along an exponential health curve and fails
// at its last training cycle; test units are cut short and ship a truth file.
struct SyntheticFleet {
  int train_units = 100;
  int test_units = 100;
  std::uint64_t seed = 2024;
  int min_life = 128;
  int max_life = 362;
  int min_observed = 31;  // shortest test prefix
  int max_rul = 145;

  struct Files {
    std::string train;
    std::string test;
    std::string truth;
  };
  Files generate() const;

  // Writes train_<tag>.txt, test_<tag>.txt and RUL_<tag>.txt into `dir`.
  void write(const std::string& dir, const std::string& tag) const;
};

}  // namespace aoipm
