#include "aoipm/aoi.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

namespace {

double raw_of(std::uint64_t code) { return std::bit_cast<double>(code); }

// Sort tuples by code vector and fold equal neighbours, summing votes.
void merge_identical(std::vector<Tuple>& tuples) {
  std::sort(tuples.begin(), tuples.end(), [](const Tuple& a, const Tuple& b) { return a.codes < b.codes; });
  std::vector<Tuple> merged;
  merged.reserve(tuples.size());
  for (auto& t : tuples) {
    if (!merged.empty() && merged.back().codes == t.codes) {
      auto& m = merged.back();
      m.votes += t.votes;
      m.rows.insert(m.rows.end(), t.rows.begin(), t.rows.end());
    } else {
      merged.push_back(std::move(t));
    }
  }
  tuples = std::move(merged);
}

std::vector<int> active_levels(const GeneralizedRelation& rel) {
  std::vector<int> out;
  for (std::size_t j = 0; j < rel.current_level.size(); ++j)
    if (!rel.removed[j]) out.push_back(rel.current_level[j]);
  return out;
}

// Numeric order at raw level, label order elsewhere.
bool signature_less(const Cluster& a, const Cluster& b) {
  for (std::size_t j = 0; j < a.signature.size(); ++j) {
    if (a.signature[j] == b.signature[j]) continue;
    if (a.descriptor[j] == 0) return raw_of(a.signature[j]) < raw_of(b.signature[j]);
    return a.signature[j] < b.signature[j];
  }
  return false;
}

std::string descriptor_text(const Descriptor& d) {
  std::string out;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j) out += ',';
    out += d[j] == kRemoved ? std::string("R") : std::to_string(d[j]);
  }
  return out;
}

}  // namespace

std::size_t GeneralizedRelation::num_active() const {
  return static_cast<std::size_t>(std::count(removed.begin(), removed.end(), false));
}

std::uint64_t GeneralizedRelation::total_votes() const {
  std::uint64_t n = 0;
  for (const auto& t : tuples) n += t.votes;
  return n;
}

Descriptor GeneralizedRelation::descriptor() const {
  Descriptor d(current_level);
  for (std::size_t j = 0; j < d.size(); ++j)
    if (removed[j]) d[j] = kRemoved;
  return d;
}

std::vector<std::size_t> GeneralizedRelation::distinct_counts() const {
  std::vector<std::size_t> out(num_attributes(), 0);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (removed[j]) continue;
    seen.clear();
    for (const auto& t : tuples) seen.insert(t.codes[j]);
    out[j] = seen.size();
  }
  return out;
}

std::vector<LevelValue> signature_values(const Cluster& c) {
  std::vector<LevelValue> out;
  for (std::size_t j = 0; j < c.descriptor.size(); ++j) {
    if (c.descriptor[j] == kRemoved) continue;
    LevelValue v{j, c.descriptor[j], 0.0, 0};
    if (v.level == 0)
      v.raw = raw_of(c.signature[j]);
    else
      v.label = static_cast<LabelId>(c.signature[j]);
    out.push_back(v);
  }
  return out;
}

double generalized_level_weight(std::span<const int> levels) {
  if (levels.empty()) throw Error(ErrorCode::EmptyRelation, "no attributes left in relation");
  double sum = 0.0;
  for (int level : levels) {
    if (level < 0) throw Error(ErrorCode::InvalidArgument, "negative generalization level");
    sum += std::ldexp(1.0, -level);
  }
  return sum / static_cast<double>(levels.size());
}

double cluster_weight(double gen_lv_w, std::uint64_t inst, std::uint64_t outl, double diffw) {
  if (outl == 0) throw Error(ErrorCode::InvalidArgument, "cluster weight with zero outliers");
  if (inst == 0 || inst > outl || diffw < 0.0)
    throw Error(ErrorCode::InvalidArgument, "cluster weight needs 1 <= inst <= outl and diffw >= 0");
  return gen_lv_w + static_cast<double>(inst) / static_cast<double>(outl) * diffw;
}

std::optional<std::size_t> select_attribute(std::span<const AttributeStatus> attrs) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < attrs.size(); ++j) {
    const auto& a = attrs[j];
    if (!a.eligible || a.distinct <= 1) continue;
    if (!best) {
      best = j;
      continue;
    }
    const auto& b = attrs[*best];
    if (a.distinct > b.distinct || (a.distinct == b.distinct && a.weight > b.weight)) best = j;
  }
  return best;
}

std::vector<AttributeStatus> attribute_status(const GeneralizedRelation& rel,
                                              std::span<const ConceptHierarchy> hierarchies,
                                              const AoiParams& params) {
  const auto distinct = rel.distinct_counts();
  const bool can_remove = rel.num_active() > 1;
  std::vector<AttributeStatus> out(rel.num_attributes());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].distinct = distinct[j];
    out[j].weight = hierarchies[j].schema().weight;
    if (rel.removed[j]) continue;
    const bool can_ascend = rel.current_level[j] < hierarchies[j].max_level();
    out[j].eligible = can_ascend || (can_remove && distinct[j] > params.attr_threshold);
  }
  return out;
}

std::optional<std::size_t> select_attribute_to_generalize(const GeneralizedRelation& rel,
                                                          std::span<const ConceptHierarchy> hierarchies,
                                                          const AoiParams& params) {
  const auto status = attribute_status(rel, hierarchies, params);
  return select_attribute(status);
}

GeneralizedRelation initial_relation(std::span<const std::vector<double>> table,
                                     std::span<const std::uint32_t> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "relation without rows");
  const std::size_t width = table[rows.front()].size();
  if (width == 0) throw Error(ErrorCode::EmptyRelation, "rows have no attributes");
  GeneralizedRelation rel;
  rel.current_level.assign(width, 0);
  rel.removed.assign(width, false);
  rel.tuples.reserve(rows.size());
  for (auto r : rows) {
    const auto& src = table[r];
    if (src.size() != width) throw Error(ErrorCode::InvalidArgument, "ragged input table");
    Tuple t;
    t.codes.resize(width);
    for (std::size_t j = 0; j < width; ++j) t.codes[j] = raw_code(src[j]);
    t.rows = {r};
    rel.tuples.push_back(std::move(t));
  }
  merge_identical(rel.tuples);
  rel.level_weight = rel.prev_level_weight = 1.0;
  rel.outliers = rel.total_votes();
  return rel;
}

GeneralizedRelation ascend_concept_tree(const GeneralizedRelation& rel, std::size_t attr,
                                        std::span<const ConceptHierarchy> hierarchies) {
  if (attr >= rel.num_attributes() || rel.removed[attr])
    throw Error(ErrorCode::InvalidArgument, "cannot ascend a removed or unknown attribute");
  const auto& h = hierarchies[attr];
  const int from = rel.current_level[attr];
  if (from >= h.max_level())
    throw Error(ErrorCode::InvalidArgument, "attribute '" + h.name() + "' is already at its top level");

  GeneralizedRelation out;
  out.current_level = rel.current_level;
  out.removed = rel.removed;
  out.current_level[attr] = from + 1;
  out.tuples = rel.tuples;
  for (auto& t : out.tuples) {
    const auto next = from == 0 ? h.label_at(raw_of(t.codes[attr]), 1)
                                : h.ascend(from, static_cast<LabelId>(t.codes[attr]));
    t.codes[attr] = next;
  }
  merge_identical(out.tuples);
  out.prev_level_weight = rel.level_weight;
  out.level_weight = generalized_level_weight(active_levels(out));
  out.outliers = out.total_votes();
  return out;
}

GeneralizedRelation remove_attribute(const GeneralizedRelation& rel, std::size_t attr) {
  if (attr >= rel.num_attributes() || rel.removed[attr])
    throw Error(ErrorCode::InvalidArgument, "attribute already removed");
  if (rel.num_active() <= 1) throw Error(ErrorCode::EmptyRelation, "cannot remove the last attribute");
  GeneralizedRelation out;
  out.current_level = rel.current_level;
  out.removed = rel.removed;
  out.removed[attr] = true;
  out.tuples = rel.tuples;
  for (auto& t : out.tuples) t.codes[attr] = 0;
  merge_identical(out.tuples);
  out.prev_level_weight = rel.level_weight;
  out.level_weight = generalized_level_weight(active_levels(out));
  out.outliers = out.total_votes();
  return out;
}

std::pair<std::vector<Cluster>, GeneralizedRelation> extract_clusters(const GeneralizedRelation& rel,
                                                                      int min_cluster_size) {
  if (min_cluster_size < 2) throw Error(ErrorCode::InvalidArgument, "minimum cluster size must be >= 2");
  std::vector<Cluster> clusters;
  GeneralizedRelation rest;
  rest.current_level = rel.current_level;
  rest.removed = rel.removed;
  rest.level_weight = rel.level_weight;
  rest.prev_level_weight = rel.prev_level_weight;
  rest.outliers = rel.outliers;
  // Removal can raise the level weight; the bonus term then collapses to zero.
  const double diffw = std::max(0.0, rel.prev_level_weight - rel.level_weight);
  const auto descriptor = rel.descriptor();
  for (const auto& t : rel.tuples) {
    if (t.votes >= static_cast<std::uint64_t>(min_cluster_size)) {
      Cluster c;
      c.descriptor = descriptor;
      c.signature = t.codes;
      c.instances = t.votes;
      c.outliers = rel.outliers;
      c.level_weight = rel.level_weight;
      c.prev_level_weight = rel.prev_level_weight;
      c.weight = cluster_weight(rel.level_weight, t.votes, rel.outliers, diffw);
      c.rows = t.rows;
      clusters.push_back(std::move(c));
    } else {
      rest.tuples.push_back(t);
    }
  }
  return {std::move(clusters), std::move(rest)};
}

bool within_thresholds(const GeneralizedRelation& rel, const AoiParams& params) {
  if (rel.tuples.size() > params.tuple_threshold) return false;
  const auto distinct = rel.distinct_counts();
  return std::all_of(distinct.begin(), distinct.end(),
                     [&](std::size_t d) { return d <= params.attr_threshold; });
}

// ---------------------------------------------------------------------------

KnowledgeBase::KnowledgeBase(AoiParams params, std::uint64_t checksum, std::vector<std::string> attribute_names,
                             std::vector<Cluster> clusters)
    : params_(params), checksum_(checksum), names_(std::move(attribute_names)) {
  std::map<Descriptor, std::vector<Cluster>> by_descriptor;
  for (auto& c : clusters) {
    if (c.descriptor.size() != names_.size() || c.signature.size() != names_.size())
      throw Error(ErrorCode::InvalidArgument, "cluster arity does not match the attribute list");
    by_descriptor[c.descriptor].push_back(std::move(c));
  }
  for (auto& [descriptor, members] : by_descriptor) {
    std::sort(members.begin(), members.end(), signature_less);
    for (std::size_t i = 1; i < members.size(); ++i)
      if (members[i].signature == members[i - 1].signature)
        throw Error(ErrorCode::InvalidArgument, "duplicate signature in relation " + descriptor_text(descriptor));
    ClusterGroup g;
    g.descriptor = descriptor;
    g.level_weight = members.front().level_weight;
    g.clusters = std::move(members);
    groups_.push_back(std::move(g));
  }
  std::stable_sort(groups_.begin(), groups_.end(), [](const ClusterGroup& a, const ClusterGroup& b) {
    return a.level_weight > b.level_weight;
  });
  for (std::size_t g = 0; g < groups_.size(); ++g)
    for (std::size_t i = 0; i < groups_[g].clusters.size(); ++i) index_.emplace_back(g, i);
}

std::size_t KnowledgeBase::cluster_count() const { return index_.size(); }

const Cluster& KnowledgeBase::cluster(std::size_t id) const {
  if (id >= index_.size()) throw Error(ErrorCode::OutOfRange, "no cluster " + std::to_string(id));
  const auto [g, i] = index_[id];
  return groups_[g].clusters[i];
}

std::string KnowledgeBase::serialize(std::span<const ConceptHierarchy> hierarchies) const {
  if (hierarchies.size() != names_.size())
    throw Error(ErrorCode::InvalidArgument, "hierarchy count does not match knowledge base");
  std::ostringstream os;
  os << "aoipm-knowledge-base 1\n";
  os << "params " << params_.min_cluster_size << " " << params_.attr_threshold << " " << params_.tuple_threshold
     << "\n";
  os << "hierarchy-checksum " << text::hex64(checksum_) << "\n";
  os << "attributes " << names_.size() << " ";
  for (std::size_t j = 0; j < names_.size(); ++j) os << (j ? "," : "") << names_[j];
  os << "\n";
  os << "clusters " << cluster_count() << "\n";
  std::size_t id = 0;
  for (const auto& g : groups_) {
    for (const auto& c : g.clusters) {
      os << "cluster " << id++ << " " << descriptor_text(c.descriptor) << " ";
      for (std::size_t j = 0; j < c.signature.size(); ++j) {
        if (j) os << ',';
        const int level = c.descriptor[j];
        if (level == kRemoved)
          os << '*';
        else if (level == 0)
          os << text::format_double(raw_of(c.signature[j]));
        else
          os << hierarchies[j].label_name(level, static_cast<LabelId>(c.signature[j]));
      }
      os << " " << c.instances << " " << c.outliers << " " << text::format_double(c.level_weight) << " "
         << text::format_double(c.prev_level_weight) << " " << text::format_double(c.weight) << "\n";
    }
  }
  return os.str();
}

KnowledgeBase KnowledgeBase::parse(std::string_view doc, std::span<const ConceptHierarchy> hierarchies) {
  const auto lines = text::split(doc, '\n');
  std::size_t ln = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    while (ln < lines.size()) {
      auto tok = text::split_ws(lines[ln++]);
      if (!tok.empty()) return tok;
    }
    throw ParseError(ErrorCode::Parse, ln, "unexpected end of knowledge base");
  };
  auto fail = [&](const std::string& what) { return ParseError(ErrorCode::Parse, ln, what); };
  auto as_u64 = [&](std::string_view s) {
    const auto v = text::parse_int(s);
    if (!v || *v < 0) throw fail("expected a non-negative integer, got '" + std::string(s) + "'");
    return static_cast<std::uint64_t>(*v);
  };
  auto as_real = [&](std::string_view s) {
    const auto v = text::parse_double(s);
    if (!v) throw fail("expected a real number, got '" + std::string(s) + "'");
    return *v;
  };

  auto tok = next();
  if (tok.size() != 2 || tok[0] != "aoipm-knowledge-base" || tok[1] != "1") throw fail("not a knowledge base v1");
  tok = next();
  if (tok.size() != 4 || tok[0] != "params") throw fail("expected params line");
  AoiParams params;
  params.min_cluster_size = static_cast<int>(as_u64(tok[1]));
  params.attr_threshold = as_u64(tok[2]);
  params.tuple_threshold = as_u64(tok[3]);
  tok = next();
  if (tok.size() != 2 || tok[0] != "hierarchy-checksum") throw fail("expected hierarchy-checksum line");
  const std::string checksum_text(tok[1]);
  const auto expected = aoipm::hierarchy_checksum(hierarchies);
  if (checksum_text != text::hex64(expected))
    throw Error(ErrorCode::Checksum, "knowledge base was built with different hierarchies");
  tok = next();
  if (tok.size() != 3 || tok[0] != "attributes") throw fail("expected attributes line");
  const auto n_attr = as_u64(tok[1]);
  std::vector<std::string> names;
  for (auto n : text::split(tok[2], ',')) names.emplace_back(n);
  if (names.size() != n_attr || names.size() != hierarchies.size()) throw fail("attribute count mismatch");
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] != hierarchies[j].name()) throw fail("attribute '" + names[j] + "' does not match hierarchy");
  tok = next();
  if (tok.size() != 2 || tok[0] != "clusters") throw fail("expected clusters line");
  const auto n_clusters = as_u64(tok[1]);

  std::vector<Cluster> clusters;
  for (std::uint64_t id = 0; id < n_clusters; ++id) {
    tok = next();
    if (tok.size() != 9 || tok[0] != "cluster") throw fail("malformed cluster record");
    if (as_u64(tok[1]) != id) throw fail("cluster ids must be sequential");
    Cluster c;
    const auto levels = text::split(tok[2], ',');
    const auto labels = text::split(tok[3], ',');
    if (levels.size() != names.size() || labels.size() != names.size()) throw fail("cluster arity mismatch");
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (levels[j] == "R") {
        if (labels[j] != "*") throw fail("removed attribute must carry '*'");
        c.descriptor.push_back(kRemoved);
        c.signature.push_back(0);
        continue;
      }
      const auto level = static_cast<int>(as_u64(levels[j]));
      if (level > hierarchies[j].max_level()) throw fail("level beyond hierarchy");
      c.descriptor.push_back(level);
      if (level == 0) {
        c.signature.push_back(raw_code(as_real(labels[j])));
      } else {
        const auto id_opt = hierarchies[j].find_label(level, labels[j]);
        if (!id_opt) throw fail("unknown label '" + std::string(labels[j]) + "'");
        c.signature.push_back(*id_opt);
      }
    }
    c.instances = as_u64(tok[4]);
    c.outliers = as_u64(tok[5]);
    c.level_weight = as_real(tok[6]);
    c.prev_level_weight = as_real(tok[7]);
    c.weight = as_real(tok[8]);
    clusters.push_back(std::move(c));
  }
  KnowledgeBase kb(params, expected, std::move(names), std::move(clusters));
  // Ids are positional, so records must already be in canonical order.
  const auto canonical = kb.serialize(hierarchies);
  auto body = doc;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r' || body.back() == ' ')) body.remove_suffix(1);
  if (std::string_view(canonical).substr(0, canonical.size() - 1) != body)
    throw ParseError(ErrorCode::Parse, 0, "cluster records are not in canonical form");
  return kb;
}

// ---------------------------------------------------------------------------

AoiResult run_aoi(std::span<const std::vector<double>> table, std::span<const ConceptHierarchy> hierarchies,
                  const AoiParams& params, const std::function<void(const AoiStep&)>& observer) {
  if (table.empty()) throw Error(ErrorCode::EmptyInput, "AOI needs at least one tuple");
  if (params.min_cluster_size < 2) throw Error(ErrorCode::InvalidArgument, "minimum cluster size must be >= 2");
  for (const auto& row : table)
    if (row.size() != hierarchies.size())
      throw Error(ErrorCode::InvalidArgument, "tuple arity does not match the hierarchy list");
  for (std::size_t j = 0; j < hierarchies.size(); ++j)
    if (hierarchies[j].schema().index != j)
      throw Error(ErrorCode::InvalidArgument, "hierarchies must be ordered by attribute index");

  std::vector<std::uint32_t> residual(table.size());
  std::iota(residual.begin(), residual.end(), 0u);
  std::vector<Cluster> clusters;
  std::uint64_t clustered = 0;
  std::string reason = "all tuples clustered";

  // A later pass can reach a signature an earlier pass already turned into a
  // cluster; those rows already match it, so the tuple stays in play instead.
  std::set<std::pair<Descriptor, std::vector<std::uint64_t>>> known;
  auto emit = [&](GeneralizedRelation& rel, int m, bool final_form) {
    if (observer) observer(AoiStep{m, &rel, clustered});
    if (!final_form && !within_thresholds(rel, params)) return;
    auto [found, rest] = extract_clusters(rel, m);
    bool returned = false;
    for (auto& c : found) {
      if (!known.emplace(c.descriptor, c.signature).second) {
        rest.tuples.push_back(Tuple{std::move(c.signature), c.instances, std::move(c.rows)});
        returned = true;
        continue;
      }
      clustered += c.instances;
      clusters.push_back(std::move(c));
    }
    if (returned) merge_identical(rest.tuples);
    rel = std::move(rest);
  };

  for (int m = params.min_cluster_size; m >= 2; --m) {
    if (residual.size() < static_cast<std::size_t>(m)) continue;
    auto rel = initial_relation(table, residual);
    emit(rel, m, !select_attribute_to_generalize(rel, hierarchies, params).has_value());
    while (!rel.tuples.empty() && rel.total_votes() >= static_cast<std::uint64_t>(m)) {
      const auto attr = select_attribute_to_generalize(rel, hierarchies, params);
      if (!attr) break;
      rel = rel.current_level[*attr] < hierarchies[*attr].max_level() ? ascend_concept_tree(rel, *attr, hierarchies)
                                                                       : remove_attribute(rel, *attr);
      emit(rel, m, !select_attribute_to_generalize(rel, hierarchies, params).has_value());
    }
    residual.clear();
    for (const auto& t : rel.tuples) residual.insert(residual.end(), t.rows.begin(), t.rows.end());
    std::sort(residual.begin(), residual.end());
    if (!residual.empty())
      reason = rel.tuples.empty() || rel.total_votes() < static_cast<std::uint64_t>(m)
                   ? "too few tuples left to reach the minimum cluster size"
                   : "no attribute left to generalize";
  }
  if (!residual.empty() && residual.size() < 2) reason = "a single tuple cannot form a cluster";

  std::vector<std::string> names;
  for (const auto& h : hierarchies) names.push_back(h.name());
  AoiResult result{KnowledgeBase(params, hierarchy_checksum(hierarchies), std::move(names), std::move(clusters)),
                   std::move(residual), std::move(reason)};
  if (result.residual_rows.empty()) result.residual_reason.clear();
  return result;
}

}  // namespace aoipm
