#include "aoipm/quantification.hpp"

#include <sstream>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

std::vector<double> QuantificationSeries::weights() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.weight);
  return out;
}

std::size_t Quantifier::KeyHash::operator()(const std::vector<std::uint64_t>& key) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto v : key) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

Quantifier::Quantifier(const KnowledgeBase& kb, std::span<const ConceptHierarchy> hierarchies, RangeMode mode)
    : hierarchies_(hierarchies.begin(), hierarchies.end()), mode_(mode) {
  if (kb.attribute_names().size() != hierarchies_.size())
    throw Error(ErrorCode::InvalidArgument, "knowledge base and hierarchies disagree on attribute count");
  std::size_t id = 0;
  for (const auto& g : kb.groups()) {
    Group group;
    group.descriptor = g.descriptor;
    for (const auto& c : g.clusters) {
      group.index.emplace(c.signature, id++);
      weights_.push_back(c.weight);
    }
    groups_.push_back(std::move(group));
  }
}

Match Quantifier::match(std::span<const double> instance) const {
  const std::size_t width = hierarchies_.size();
  if (instance.size() != width)
    throw Error(ErrorCode::InvalidArgument, "instance has " + std::to_string(instance.size()) +
                                                " values, expected " + std::to_string(width));
  // Codes of every attribute at every level, computed once per instance.
  std::vector<std::vector<std::uint64_t>> ladder(width);
  for (std::size_t j = 0; j < width; ++j) {
    const auto& h = hierarchies_[j];
    auto& codes = ladder[j];
    codes.resize(static_cast<std::size_t>(h.max_level()) + 1);
    codes[0] = raw_code(instance[j]);
    if (h.max_level() >= 1) {
      LabelId label = h.locate(instance[j], mode_);
      codes[1] = label;
      for (int k = 1; k < h.max_level(); ++k) {
        label = h.ascend(k, label);
        codes[static_cast<std::size_t>(k) + 1] = label;
      }
    }
  }
  std::vector<std::uint64_t> key(width);
  for (const auto& g : groups_) {
    for (std::size_t j = 0; j < width; ++j) {
      const int level = g.descriptor[j];
      key[j] = level == kRemoved ? 0 : ladder[j][static_cast<std::size_t>(level)];
    }
    if (auto it = g.index.find(key); it != g.index.end()) return {it->second, weights_[it->second]};
  }
  return {std::nullopt, 0.0};
}

QuantificationSeries Quantifier::quantify(int simulation_id, std::span<const std::vector<double>> rows,
                                          int first_cycle) const {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "simulation " + std::to_string(simulation_id) + " is empty");
  QuantificationSeries out;
  out.simulation_id = simulation_id;
  out.points.reserve(rows.size());
  int cycle = first_cycle;
  for (const auto& row : rows) {
    const auto m = match(row);
    out.points.push_back({cycle++, m.cluster, m.weight});
  }
  return out;
}

Match match_instance(const KnowledgeBase& kb, std::span<const double> instance,
                     std::span<const ConceptHierarchy> hierarchies, RangeMode mode) {
  return Quantifier(kb, hierarchies, mode).match(instance);
}

std::string format_quantification(const QuantificationSeries& series) {
  std::ostringstream os;
  os << "# simulation " << series.simulation_id << "\n";
  os << "cycle cluster weight\n";
  for (const auto& p : series.points) {
    os << p.cycle << " ";
    if (p.cluster)
      os << *p.cluster;
    else
      os << "-";
    os << " " << text::format_double(p.weight) << "\n";
  }
  return os.str();
}

}  // namespace aoipm
