#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "aoipm/error.hpp"
#include "aoipm/hierarchy.hpp"
#include "oracles/quantile_oracle.hpp"

using namespace aoipm;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

const char* kTwoLevel = R"(# minimal document
attribute temp
  index 0
  weight 2.5
  level 1
    interval 0 5 low
    interval 5 10 high
    parent low ANY
    parent high ANY
  level 2
    interval 0 10 ANY
end
)";

}  // namespace

TEST_CASE("deciles of 1..100 use linear interpolation between order statistics") {
  const auto h = build_percentile_hierarchy(one_to(100), 4, 10, "s2");
  CHECK(h.max_level() == 3);
  const auto& l1 = h.level(1).intervals;
  REQUIRE(l1.size() == 10);
  CHECK(l1.front().lo == 1.0);
  CHECK(l1.back().hi == 100.0);
  for (int k = 1; k < 10; ++k) {
    // h = 99 k / 10, so the k-th decile sits 0.9 k past k * 10.
    CHECK(l1[static_cast<std::size_t>(k)].lo == doctest::Approx(10.0 * k + 1.0 - 0.1 * k).epsilon(1e-12));
  }
  CHECK(l1[3].label == "P30-P40");
  CHECK(h.level(2).intervals.size() == 5);
  CHECK(h.level(2).intervals[1].label == "P20-P40");
  REQUIRE(h.level(3).intervals.size() == 1);
  CHECK(h.level(3).intervals[0].label == "ANY");
}

TEST_CASE("decile edges agree with the rank-based oracle on random samples") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(20 + rng() % 300);
    for (auto& x : v) x = static_cast<double>(rng() % 100000) / 97.0;
    const auto h = build_percentile_hierarchy(v, 4, 10);
    const auto& l1 = h.level(1).intervals;
    for (int k = 1; k < 10; ++k)
      CHECK(l1[static_cast<std::size_t>(k)].lo == doctest::Approx(oracle::quantile(v, k / 10.0)).epsilon(1e-12));
  }
}

TEST_CASE("three-level ladder on two points splits at the median") {
  const auto h = build_percentile_hierarchy(std::vector<double>{0.0, 1.0}, 3, 2);
  const auto& l1 = h.level(1).intervals;
  REQUIRE(l1.size() == 2);
  CHECK(l1[0].lo == 0.0);
  CHECK(l1[0].hi == 0.5);
  CHECK(l1[1].hi == 1.0);
  CHECK(h.level(2).intervals[0].label == "ANY");
  CHECK(h.locate(0.5) == 1);
  CHECK(h.locate(1.0) == 1);  // last interval is closed
  CHECK(h.locate(0.49) == 0);
}

TEST_CASE("constant values cannot be binned") {
  const std::vector<double> flat(50, 5.0);
  CHECK(code_of([&] { build_percentile_hierarchy(flat, 4, 10, "s1"); }) == ErrorCode::DegenerateBins);
  CHECK(code_of([&] { build_percentile_hierarchy(one_to(9), 4, 10); }) == ErrorCode::DegenerateBins);
}

TEST_CASE("ladder shape is validated") {
  CHECK(code_of([&] { build_percentile_hierarchy(one_to(100), 2, 10); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_percentile_hierarchy(one_to(100), 5, 10); }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(build_percentile_hierarchy(one_to(100), 5, 12));
}

TEST_CASE("generalize walks the tree") {
  std::vector<double> u(1001);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i) / 1000.0;
  const auto h = build_percentile_hierarchy(u, 4, 10, "u");
  const LevelValue raw{0, 0, 0.42, 0};
  const auto l1 = h.generalize(raw, 1);
  CHECK(h.describe(l1) == "P40-P50");
  CHECK(h.describe(h.generalize(raw, 2)) == "P40-P60");
  CHECK(h.describe(h.generalize(raw, 3)) == "ANY");
  CHECK(h.generalize(l1, 1) == l1);
  CHECK(h.generalize(raw, 0) == raw);
  CHECK(h.describe(raw) == "0.41999999999999998");
  CHECK_THROWS_AS(h.generalize(l1, 0), Error);
}

TEST_CASE("ancestor consistency over every observed value") {
  std::mt19937_64 rng(11);
  std::vector<double> v(400);
  for (auto& x : v) x = static_cast<double>(rng() % 5000) / 13.0;
  const auto h = build_percentile_hierarchy(v, 5, 12, "x");
  for (double x : v) {
    const LevelValue raw{0, 0, x, 0};
    for (int j = 0; j <= h.max_level(); ++j)
      for (int k = j; k <= h.max_level(); ++k)
        CHECK(h.generalize(h.generalize(raw, j), k) == h.generalize(raw, k));
  }
}

TEST_CASE("each decile bin of distinct values holds about a tenth of them") {
  std::mt19937_64 rng(5);
  std::vector<double> v(997);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) + 0.5 * static_cast<double>(rng() % 2);
  const auto h = build_percentile_hierarchy(v, 4, 10);
  std::vector<int> counts(10, 0);
  for (double x : v) ++counts[h.locate(x)];
  for (int c : counts) {
    CHECK(c >= static_cast<int>(v.size() / 10) - 1);
    CHECK(c <= static_cast<int>((v.size() + 9) / 10) + 1);
  }
}

TEST_CASE("values outside the training span clamp or throw") {
  const auto h = build_percentile_hierarchy(one_to(100), 4, 10);
  CHECK(h.locate(-50.0) == 0);
  CHECK(h.locate(1e9) == 9);
  CHECK(code_of([&] { h.locate(1e9, RangeMode::Strict); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { h.locate(0.0, RangeMode::Strict); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { h.locate(std::nan("")); }) == ErrorCode::OutOfRange);
}

TEST_CASE("config document with one attribute and two levels") {
  const auto hs = parse_hierarchy_config(kTwoLevel);
  REQUIRE(hs.size() == 1);
  CHECK(hs[0].name() == "temp");
  CHECK(hs[0].max_level() == 2);
  CHECK(hs[0].schema().weight == 2.5);
  CHECK(hs[0].label_name(1, hs[0].locate(7.0)) == "high");
  CHECK(parse_hierarchy_config("").empty());
  CHECK(parse_hierarchy_config("# only a comment\n\n").empty());
}

TEST_CASE("config errors carry the offending line") {
  auto line_of = [](const std::string& doc) -> std::size_t {
    try {
      parse_hierarchy_config(doc);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("attribute a\n index 0\n level 1\n  interval 0 5 x\n  interval 3 8 y\nend\n") == 5);
  CHECK(line_of("attribute a\n index 0\n weight -1\nend\n") == 3);
  CHECK(line_of("attribute a\n index 0\n level 1\n interval 0 5 x\n parent x up\n level 2\n interval 0 5 ANY\nend\n") ==
        5);
  CHECK(line_of("attribute a\n index 0\n level 1\n interval 0 5 x\n interval 6 8 y\nend\n") == 5);
  CHECK(line_of("attribute a\n index 0\n colour red\nend\n") == 3);
  CHECK(line_of("attribute a\n index 0\n level 1\n interval 0 5 x\n") == 1);
  CHECK(line_of("attribute a\n index 0\n level 1\n interval 0 5 x\n level 2\n interval 0 5 ANY\nend\n") == 3);
  CHECK(line_of("attribute a\n index 0\nend\nattribute a\n index 1\nend\n") == 4);
}

TEST_CASE("serialization round-trips percentile and expert hierarchies") {
  std::vector<ConceptHierarchy> hs = parse_hierarchy_config(kTwoLevel);
  std::vector<double> v = one_to(60);
  v.push_back(60.0);
  v.push_back(60.0);
  hs.push_back(build_percentile_hierarchy(v, 4, 10, "s3", 1, 0.5));
  const auto text = serialize_hierarchies(hs);
  const auto back = parse_hierarchy_config(text);
  CHECK(back == hs);
  CHECK(serialize_hierarchies(back) == text);
  CHECK(hierarchy_checksum(back) == hierarchy_checksum(hs));
}

TEST_CASE("zero-width bins from repeated values survive a round-trip") {
  std::vector<double> v(30, 1.0);
  for (int i = 0; i < 12; ++i) v.push_back(2.0 + i);
  const auto h = build_percentile_hierarchy(v, 4, 10, "rep");
  CHECK(h.level(1).intervals[1].lo == h.level(1).intervals[1].hi);
  const std::vector<ConceptHierarchy> one{h};
  CHECK(parse_hierarchy_config(serialize_hierarchies(one)) == one);
  CHECK(h.locate(1.0) == h.locate(1.0, RangeMode::Strict));
}

TEST_CASE("constructor rejects a child outside its parent") {
  HierarchyLevel l1{{{0, 5, "a"}, {5, 10, "b"}}, {0, 0}};
  HierarchyLevel l2{{{0, 4, "lo"}, {4, 10, "hi"}}, {0, 0}};
  HierarchyLevel top{{{0, 10, "ANY"}}, {}};
  CHECK_THROWS_AS(ConceptHierarchy({"x", 0, 1.0, 0}, {l1, l2, top}), Error);
  l2.intervals = {{0, 5, "lo"}, {5, 10, "hi"}};
  l1.parent = {0, 1};
  CHECK(ConceptHierarchy({"x", 0, 1.0, 0}, {l1, l2, top}).max_level() == 3);
}
