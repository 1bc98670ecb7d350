#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aoipm/hierarchy.hpp"

namespace aoipm {

struct AoiParams {
  int min_cluster_size = 10;
  std::size_t attr_threshold = 20;   // max distinct values per attribute in an emitted relation
  std::size_t tuple_threshold = 200; // max distinct tuples in an emitted relation

  friend bool operator==(const AoiParams&, const AoiParams&) = default;
};

// Level of an attribute in a relation descriptor once it has been dropped.
inline constexpr int kRemoved = -1;

using Descriptor = std::vector<int>;

struct Tuple {
  std::vector<std::uint64_t> codes;  // value_code per attribute; 0 for removed attributes
  std::uint64_t votes = 1;
  std::vector<std::uint32_t> rows;   // source rows merged into this tuple
};

struct GeneralizedRelation {
  std::vector<Tuple> tuples;
  std::vector<int> current_level;
  std::vector<bool> removed;
  double level_weight = 1.0;
  double prev_level_weight = 1.0;
  std::uint64_t outliers = 0;  // votes present when the relation was formed

  std::size_t num_attributes() const { return current_level.size(); }
  std::size_t num_active() const;
  std::uint64_t total_votes() const;
  Descriptor descriptor() const;
  // Distinct values per attribute among current tuples (0 for removed ones).
  std::vector<std::size_t> distinct_counts() const;
};

struct Cluster {
  Descriptor descriptor;
  std::vector<std::uint64_t> signature;  // codes, 0 at removed attributes
  std::uint64_t instances = 0;
  std::uint64_t outliers = 0;
  double level_weight = 0.0;
  double prev_level_weight = 0.0;
  double weight = 0.0;
  std::vector<std::uint32_t> rows;  // training rows absorbed (not persisted)
};

// Signature as level values, skipping removed attributes.
std::vector<LevelValue> signature_values(const Cluster& c);

// Mean over active attributes of 2^-level. Throws EmptyRelation on no attributes.
double generalized_level_weight(std::span<const int> levels);

// level weight + (inst / outl) * diffw.
double cluster_weight(double gen_lv_w, std::uint64_t inst, std::uint64_t outl, double diffw);

struct AttributeStatus {
  std::size_t distinct = 0;
  double weight = 1.0;
  bool eligible = false;  // can still be ascended or removed
};

// Most distinct eligible attribute; ties go to the higher weight, then the
// lower index. Attributes with a single distinct value are never chosen.
std::optional<std::size_t> select_attribute(std::span<const AttributeStatus> attrs);

std::vector<AttributeStatus> attribute_status(const GeneralizedRelation& rel,
                                              std::span<const ConceptHierarchy> hierarchies,
                                              const AoiParams& params);

std::optional<std::size_t> select_attribute_to_generalize(const GeneralizedRelation& rel,
                                                          std::span<const ConceptHierarchy> hierarchies,
                                                          const AoiParams& params);

// Level-0 relation over the given rows of `table`, identical rows merged.
GeneralizedRelation initial_relation(std::span<const std::vector<double>> table,
                                     std::span<const std::uint32_t> rows);

GeneralizedRelation ascend_concept_tree(const GeneralizedRelation& rel, std::size_t attr,
                                        std::span<const ConceptHierarchy> hierarchies);

GeneralizedRelation remove_attribute(const GeneralizedRelation& rel, std::size_t attr);

// Tuples with votes >= min_cluster_size become clusters and leave the relation.
std::pair<std::vector<Cluster>, GeneralizedRelation> extract_clusters(const GeneralizedRelation& rel,
                                                                      int min_cluster_size);

bool within_thresholds(const GeneralizedRelation& rel, const AoiParams& params);

struct ClusterGroup {
  Descriptor descriptor;
  double level_weight = 0.0;
  std::vector<Cluster> clusters;  // ordered by signature
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(AoiParams params, std::uint64_t checksum, std::vector<std::string> attribute_names,
                std::vector<Cluster> clusters);

  const AoiParams& params() const noexcept { return params_; }
  std::uint64_t hierarchy_checksum() const noexcept { return checksum_; }
  const std::vector<std::string>& attribute_names() const noexcept { return names_; }
  // Descending level weight; equal weights ordered by descriptor.
  const std::vector<ClusterGroup>& groups() const noexcept { return groups_; }
  std::size_t cluster_count() const;
  // Cluster by id (ids run in group order, then signature order).
  const Cluster& cluster(std::size_t id) const;

  std::string serialize(std::span<const ConceptHierarchy> hierarchies) const;
  static KnowledgeBase parse(std::string_view text, std::span<const ConceptHierarchy> hierarchies);

 private:
  AoiParams params_;
  std::uint64_t checksum_ = 0;
  std::vector<std::string> names_;
  std::vector<ClusterGroup> groups_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;  // id -> (group, position)
};

struct AoiStep {
  int min_cluster_size = 0;
  const GeneralizedRelation* relation = nullptr;
  std::uint64_t clustered_votes = 0;  // instances in all clusters emitted so far
};

struct AoiResult {
  KnowledgeBase kb;
  std::vector<std::uint32_t> residual_rows;  // never clustered
  std::string residual_reason;
};

// Decreasing-minimum-size AOI. Each pass restarts from the raw form of the rows
// not yet clustered. `observer` sees every relation as it is formed.
AoiResult run_aoi(std::span<const std::vector<double>> table, std::span<const ConceptHierarchy> hierarchies,
                  const AoiParams& params, const std::function<void(const AoiStep&)>& observer = {});

}  // namespace aoipm
