#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aoipm {

// What to do with a raw value outside the span a hierarchy was built on.
enum class RangeMode { Clamp, Strict };

struct AttributeSchema {
  std::string name;
  std::size_t index = 0;  // column in the retained relation
  double weight = 1.0;    // expert relevance; breaks ties in attribute selection
  int max_level = 0;

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;
};

// Half-open [lo, hi); the last interval of a level is closed on the right.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  std::string label;

  friend bool operator==(const Interval&, const Interval&) = default;
};

using LabelId = std::uint32_t;

struct HierarchyLevel {
  std::vector<Interval> intervals;  // sorted and contiguous
  std::vector<LabelId> parent;      // parent label per interval; empty on the top level

  friend bool operator==(const HierarchyLevel&, const HierarchyLevel&) = default;
};

// A value of one attribute at some generalization level. Level 0 carries the
// raw reading, higher levels carry a label id into that level's intervals.
struct LevelValue {
  std::size_t attribute = 0;
  int level = 0;
  double raw = 0.0;
  LabelId label = 0;

  friend bool operator==(const LevelValue&, const LevelValue&) = default;
};

// Hash/equality code: raw bit pattern at level 0 (with -0.0 folded into 0.0),
// the label id otherwise.
std::uint64_t raw_code(double raw);
std::uint64_t value_code(const LevelValue& v);

class ConceptHierarchy {
 public:
  // levels[k - 1] describes generalization level k. Throws Error(InvalidArgument)
  // when the tree or interval invariants do not hold.
  ConceptHierarchy(AttributeSchema schema, std::vector<HierarchyLevel> levels);

  const AttributeSchema& schema() const noexcept { return schema_; }
  const std::string& name() const noexcept { return schema_.name; }
  int max_level() const noexcept { return schema_.max_level; }

  const HierarchyLevel& level(int k) const;

  // Level-1 label containing a raw value.
  LabelId locate(double raw, RangeMode mode = RangeMode::Clamp) const;
  // Parent of `label` (at level k) on level k + 1.
  LabelId ascend(int k, LabelId label) const;
  // Label of a raw value at `target` >= 1.
  LabelId label_at(double raw, int target, RangeMode mode = RangeMode::Clamp) const;

  LevelValue generalize(const LevelValue& v, int target, RangeMode mode = RangeMode::Clamp) const;

  const std::string& label_name(int k, LabelId label) const;
  std::optional<LabelId> find_label(int k, std::string_view name) const;

  // Label text, or the raw value in round-trippable form at level 0.
  std::string describe(const LevelValue& v) const;

  friend bool operator==(const ConceptHierarchy&, const ConceptHierarchy&) = default;

 private:
  AttributeSchema schema_;
  std::vector<HierarchyLevel> levels_;
};

// Percentile concept tree: raw -> base_bins quantile intervals -> pairwise merges
// -> "ANY". num_levels counts every level including raw and "ANY", so
// num_levels = 4 with base_bins = 10 gives raw -> 10 -> 5 -> ANY.
// Quantiles use linear interpolation between order statistics.
ConceptHierarchy build_percentile_hierarchy(std::span<const double> values, int num_levels,
                                            int base_bins, std::string name = "attr",
                                            std::size_t index = 0, double weight = 1.0);

// Empirical quantile, linear interpolation between order statistics of an
// ascending-sorted sample (h = (n - 1) p).
double sorted_quantile(std::span<const double> sorted, double p);

// Declarative configuration (grammar in docs/hierarchy-format.md).
std::vector<ConceptHierarchy> parse_hierarchy_config(std::string_view text);
std::string serialize_hierarchies(std::span<const ConceptHierarchy> hierarchies);

// Checksum over the canonical serialization; recorded in knowledge-base headers.
std::uint64_t hierarchy_checksum(std::span<const ConceptHierarchy> hierarchies);

}  // namespace aoipm
