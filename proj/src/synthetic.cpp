#include "aoipm/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "aoipm/text.hpp"

namespace aoipm {

namespace {

struct SensorModel {
  double base;
  double noise;      // measurement noise sd
  double drift;      // signed shift at failure
  double unit_sd;    // per-unit offset sd
  int decimals;
};

// Roughly the healthy levels and end-of-life shifts of the single-fault
// turbofan fleet. Zero noise and drift make a sensor constant.
constexpr std::array<SensorModel, 21> kSensors = {{
    {518.67, 0.0, 0.0, 0.0, 2},     // s1
    {642.20, 0.35, 1.6, 0.0, 2},    // s2
    {1585.0, 5.0, 22.0, 0.0, 2},    // s3
    {1400.0, 6.0, 35.0, 0.0, 2},    // s4
    {14.62, 0.0, 0.0, 0.0, 2},      // s5
    {21.61, 0.0, 0.0, 0.0, 2},      // s6, see quasi_constant below
    {554.0, 0.6, -3.0, 0.0, 2},     // s7
    {2388.04, 0.05, 0.25, 0.0, 2},  // s8
    {9050.0, 10.0, 40.0, 15.0, 2},  // s9
    {1.30, 0.0, 0.0, 0.0, 2},       // s10
    {47.30, 0.18, 1.0, 0.0, 2},     // s11
    {521.90, 0.5, -2.6, 0.0, 2},    // s12
    {2388.04, 0.05, 0.25, 0.0, 2},  // s13
    {8135.0, 8.0, 30.0, 12.0, 2},   // s14
    {8.41, 0.025, 0.14, 0.0, 4},    // s15
    {0.03, 0.0, 0.0, 0.0, 2},       // s16
    {392.0, 1.2, 6.0, 0.0, 0},      // s17
    {2388.0, 0.0, 0.0, 0.0, 0},     // s18
    {100.0, 0.0, 0.0, 0.0, 2},      // s19
    {38.95, 0.13, -0.6, 0.0, 2},    // s20
    {23.37, 0.08, -0.35, 0.0, 4},   // s21
}};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller; avoids the implementation-defined std::normal_distribution.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

void put(std::string& out, double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f ", decimals, v);
  out += buf;
}

// Appends `cycles` rows of one unit whose full life is `life` cycles.
void emit_unit(std::string& out, Rng& rng, int unit, int life, int cycles) {
  const double initial_wear = rng.uniform(0.0, 0.12);
  const double sharpness = rng.uniform(3.5, 6.5);
  std::array<double, 21> offset{};
  for (std::size_t s = 0; s < kSensors.size(); ++s) offset[s] = kSensors[s].unit_sd * rng.normal();
  const double denom = std::exp(sharpness) - 1.0;
  for (int t = 1; t <= cycles; ++t) {
    const double wear =
        initial_wear + (1.0 - initial_wear) * (std::exp(sharpness * t / life) - 1.0) / denom;
    out += std::to_string(unit) + " " + std::to_string(t) + " ";
    put(out, 0.0022 * rng.normal(), 4);
    put(out, 0.0003 * rng.normal(), 4);
    put(out, 100.0, 1);
    for (std::size_t s = 0; s < kSensors.size(); ++s) {
      const auto& m = kSensors[s];
      double v = m.base + offset[s] + m.drift * wear + m.noise * rng.normal();
      if (s == 5 && rng.uniform() < 0.02) v = 21.60;  // quasi-constant: two levels only
      put(out, v, m.decimals);
    }
    out.back() = '\n';
  }
}

int draw_life(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(std::floor((hi - lo) * std::pow(rng.uniform(), 1.8)));
}

}  // namespace

SyntheticFleet::Files SyntheticFleet::generate() const {
  Files files;
  Rng train_rng(seed);
  for (int u = 1; u <= train_units; ++u) {
    const int life = draw_life(train_rng, min_life, max_life);
    emit_unit(files.train, train_rng, u, life, life);
  }
  Rng test_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int u = 1; u <= test_units; ++u) {
    const int life = draw_life(test_rng, min_life, max_life);
    int rul = 7 + static_cast<int>(std::floor(test_rng.uniform() * (max_rul - 6)));
    if (life - rul < min_observed) rul = life - min_observed;
    emit_unit(files.test, test_rng, u, life, life - rul);
    files.truth += std::to_string(rul) + "\n";
  }
  return files;
}

void SyntheticFleet::write(const std::string& dir, const std::string& tag) const {
  const auto files = generate();
  text::write_file(dir + "/train_" + tag + ".txt", files.train);
  text::write_file(dir + "/test_" + tag + ".txt", files.test);
  text::write_file(dir + "/RUL_" + tag + ".txt", files.truth);
}

}  // namespace aoipm
