#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aoipm/aoi.hpp"
#include "aoipm/hierarchy.hpp"

namespace aoipm {

struct Match {
  std::optional<std::size_t> cluster;  // knowledge-base cluster id
  double weight = 0.0;                 // 0 exactly when nothing matched
};

struct QuantificationPoint {
  int cycle = 0;
  std::optional<std::size_t> cluster;
  double weight = 0.0;
};

struct QuantificationSeries {
  int simulation_id = 0;
  std::vector<QuantificationPoint> points;

  std::vector<double> weights() const;
  std::size_t size() const { return points.size(); }
};

// Per-group hash indexes over a knowledge base. Holds copies of everything it
// needs, so it may outlive the knowledge base. Read-only after construction.
class Quantifier {
 public:
  Quantifier(const KnowledgeBase& kb, std::span<const ConceptHierarchy> hierarchies,
             RangeMode mode = RangeMode::Clamp);

  // Walks relation groups from the highest level weight down and returns the
  // first exact signature match.
  Match match(std::span<const double> instance) const;

  // `first_cycle` numbers the first row; C-MAPSS cycles start at 1.
  QuantificationSeries quantify(int simulation_id, std::span<const std::vector<double>> rows,
                                int first_cycle = 1) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept;
  };
  struct Group {
    Descriptor descriptor;
    std::unordered_map<std::vector<std::uint64_t>, std::size_t, KeyHash> index;
  };

  std::vector<ConceptHierarchy> hierarchies_;
  std::vector<Group> groups_;
  std::vector<double> weights_;
  RangeMode mode_;
};

Match match_instance(const KnowledgeBase& kb, std::span<const double> instance,
                     std::span<const ConceptHierarchy> hierarchies, RangeMode mode = RangeMode::Clamp);

// Columnar export: "cycle cluster weight", cluster "-" when unmatched.
std::string format_quantification(const QuantificationSeries& series);

}  // namespace aoipm
