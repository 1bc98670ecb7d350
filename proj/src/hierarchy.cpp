#include "aoipm/hierarchy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

namespace {

bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  return std::none_of(label.begin(), label.end(), [](char c) {
    return c == ' ' || c == '\t' || c == ',' || c == '#' || c == '\n' || c == '\r';
  });
}

void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

std::string percent_text(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", pct);
  return buf;
}

}  // namespace

std::uint64_t raw_code(double raw) {
  if (raw == 0.0) raw = 0.0;  // folds -0.0
  return std::bit_cast<std::uint64_t>(raw);
}

std::uint64_t value_code(const LevelValue& v) {
  return v.level == 0 ? raw_code(v.raw) : static_cast<std::uint64_t>(v.label);
}

ConceptHierarchy::ConceptHierarchy(AttributeSchema schema, std::vector<HierarchyLevel> levels)
    : schema_(std::move(schema)), levels_(std::move(levels)) {
  const std::string who = "attribute '" + schema_.name + "': ";
  require(!schema_.name.empty() && valid_label(schema_.name), who + "invalid attribute name");
  require(std::isfinite(schema_.weight) && schema_.weight >= 0.0, who + "weight must be >= 0");
  schema_.max_level = static_cast<int>(levels_.size());

  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const auto& lvl = levels_[k];
    const std::string at = who + "level " + std::to_string(k + 1) + ": ";
    require(!lvl.intervals.empty(), at + "no intervals");
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < lvl.intervals.size(); ++i) {
      const auto& iv = lvl.intervals[i];
      require(!std::isnan(iv.lo) && !std::isnan(iv.hi) && iv.lo <= iv.hi,
              at + "interval bounds out of order");
      require(valid_label(iv.label), at + "invalid label '" + iv.label + "'");
      require(seen.insert(iv.label).second, at + "duplicate label '" + iv.label + "'");
      if (i > 0) {
        const auto& prev = lvl.intervals[i - 1];
        require(iv.lo >= prev.hi, at + "intervals overlap at '" + iv.label + "'");
        require(iv.lo == prev.hi, at + "gap before '" + iv.label + "'");
      }
    }
    const auto& first = levels_.front().intervals;
    require(lvl.intervals.front().lo == first.front().lo && lvl.intervals.back().hi == first.back().hi,
            at + "does not cover the same range as level 1");

    const bool top = k + 1 == levels_.size();
    if (top) {
      require(lvl.parent.empty(), at + "top level cannot have parents");
      continue;
    }
    require(lvl.parent.size() == lvl.intervals.size(), at + "every label needs a parent");
    const auto& up = levels_[k + 1].intervals;
    for (std::size_t i = 0; i < lvl.intervals.size(); ++i) {
      require(lvl.parent[i] < up.size(), at + "parent out of range for '" + lvl.intervals[i].label + "'");
      const auto& child = lvl.intervals[i];
      const auto& par = up[lvl.parent[i]];
      require(child.lo >= par.lo && child.hi <= par.hi,
              at + "'" + child.label + "' is not contained in parent '" + par.label + "'");
    }
  }
}

const HierarchyLevel& ConceptHierarchy::level(int k) const {
  if (k < 1 || k > max_level())
    throw Error(ErrorCode::OutOfRange, schema_.name + ": no level " + std::to_string(k));
  return levels_[static_cast<std::size_t>(k - 1)];
}

LabelId ConceptHierarchy::locate(double raw, RangeMode mode) const {
  const auto& ivs = level(1).intervals;
  if (std::isnan(raw)) throw Error(ErrorCode::OutOfRange, schema_.name + ": NaN value");
  if (raw < ivs.front().lo || raw > ivs.back().hi) {
    if (mode == RangeMode::Strict)
      throw Error(ErrorCode::OutOfRange,
                  schema_.name + ": value " + text::format_double(raw) + " outside hierarchy range");
    return raw < ivs.front().lo ? 0 : static_cast<LabelId>(ivs.size() - 1);
  }
  // Last interval whose lower bound is <= raw.
  auto it = std::upper_bound(ivs.begin(), ivs.end(), raw,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  return static_cast<LabelId>(std::distance(ivs.begin(), it) - 1);
}

LabelId ConceptHierarchy::ascend(int k, LabelId label) const {
  const auto& lvl = level(k);
  if (k >= max_level() || label >= lvl.parent.size())
    throw Error(ErrorCode::OutOfRange, schema_.name + ": cannot ascend from level " + std::to_string(k));
  return lvl.parent[label];
}

LabelId ConceptHierarchy::label_at(double raw, int target, RangeMode mode) const {
  LabelId label = locate(raw, mode);
  for (int k = 1; k < target; ++k) label = ascend(k, label);
  return label;
}

LevelValue ConceptHierarchy::generalize(const LevelValue& v, int target, RangeMode mode) const {
  if (v.level < 0 || target < v.level || target > max_level())
    throw Error(ErrorCode::OutOfRange, schema_.name + ": cannot generalize level " +
                                           std::to_string(v.level) + " to " + std::to_string(target));
  if (target == v.level) return v;
  LevelValue out = v;
  out.level = target;
  if (v.level == 0) {
    out.label = label_at(v.raw, target, mode);
  } else {
    LabelId label = v.label;
    for (int k = v.level; k < target; ++k) label = ascend(k, label);
    out.label = label;
  }
  return out;
}

const std::string& ConceptHierarchy::label_name(int k, LabelId label) const {
  const auto& ivs = level(k).intervals;
  if (label >= ivs.size())
    throw Error(ErrorCode::OutOfRange, schema_.name + ": label id out of range");
  return ivs[label].label;
}

std::optional<LabelId> ConceptHierarchy::find_label(int k, std::string_view name) const {
  const auto& ivs = level(k).intervals;
  for (std::size_t i = 0; i < ivs.size(); ++i)
    if (ivs[i].label == name) return static_cast<LabelId>(i);
  return std::nullopt;
}

std::string ConceptHierarchy::describe(const LevelValue& v) const {
  return v.level == 0 ? text::format_double(v.raw) : label_name(v.level, v.label);
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

ConceptHierarchy build_percentile_hierarchy(std::span<const double> values, int num_levels,
                                            int base_bins, std::string name, std::size_t index,
                                            double weight) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, name + ": no values");
  if (num_levels < 3 || base_bins < 2)
    throw Error(ErrorCode::InvalidArgument, name + ": need num_levels >= 3 and base_bins >= 2");
  const int binned_levels = num_levels - 2;
  if (base_bins % (1 << (binned_levels - 1)) != 0)
    throw Error(ErrorCode::InvalidArgument,
                name + ": base_bins must halve evenly across " + std::to_string(binned_levels) + " levels");

  std::vector<double> sorted(values.begin(), values.end());
  if (std::any_of(sorted.begin(), sorted.end(), [](double v) { return !std::isfinite(v); }))
    throw Error(ErrorCode::InvalidArgument, name + ": non-finite value");
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<std::size_t>(
      std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()
          ? sorted.size()
          : std::set<double>(sorted.begin(), sorted.end()).size());
  if (distinct < static_cast<std::size_t>(base_bins))
    throw Error(ErrorCode::DegenerateBins, "attribute '" + name + "' has " + std::to_string(distinct) +
                                               " distinct values, fewer than " + std::to_string(base_bins) +
                                               " bins");

  std::vector<double> edges(static_cast<std::size_t>(base_bins) + 1);
  edges.front() = sorted.front();
  edges.back() = sorted.back();
  for (int i = 1; i < base_bins; ++i)
    edges[static_cast<std::size_t>(i)] = sorted_quantile(sorted, static_cast<double>(i) / base_bins);

  std::vector<HierarchyLevel> levels;
  int bins = base_bins;
  int stride = 1;  // level-1 bins per interval on the current level
  for (int lvl = 1; lvl <= binned_levels; ++lvl) {
    HierarchyLevel level;
    for (int i = 0; i < bins; ++i) {
      const int a = i * stride;
      const int b = (i + 1) * stride;
      level.intervals.push_back({edges[static_cast<std::size_t>(a)], edges[static_cast<std::size_t>(b)],
                                 "P" + percent_text(100.0 * a / base_bins) + "-P" +
                                     percent_text(100.0 * b / base_bins)});
      level.parent.push_back(lvl == binned_levels ? 0 : static_cast<LabelId>(i / 2));
    }
    levels.push_back(std::move(level));
    bins /= 2;
    stride *= 2;
  }
  levels.push_back({{{edges.front(), edges.back(), "ANY"}}, {}});

  AttributeSchema schema{std::move(name), index, weight, 0};
  return ConceptHierarchy(std::move(schema), std::move(levels));
}

// ---------------------------------------------------------------------------
// Config format

namespace {

struct PendingLevel {
  std::vector<Interval> intervals;
  std::vector<std::size_t> interval_lines;
  std::vector<std::pair<std::string, std::string>> parents;  // child -> parent label
  std::vector<std::size_t> parent_lines;
  std::size_t line = 0;
};

struct PendingAttribute {
  std::string name;
  std::optional<std::size_t> index;
  double weight = 1.0;
  std::vector<PendingLevel> levels;
  std::size_t line = 0;
};

ConceptHierarchy finish(PendingAttribute& pa, std::size_t end_line) {
  auto fail = [](std::size_t line, const std::string& what) -> ParseError {
    return ParseError(ErrorCode::Parse, line, what);
  };
  if (!pa.index) throw fail(end_line, "attribute '" + pa.name + "' has no index");

  std::vector<HierarchyLevel> levels;
  for (auto& pl : pa.levels) {
    if (pl.intervals.empty()) throw fail(pl.line, "level without intervals");
    std::vector<std::size_t> order(pl.intervals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = pl.intervals[a];
      const auto& y = pl.intervals[b];
      return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
    });
    HierarchyLevel lvl;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& iv = pl.intervals[order[i]];
      if (i > 0 && iv.lo != lvl.intervals.back().hi)
        throw fail(pl.interval_lines[order[i]], "gap between '" + lvl.intervals.back().label + "' and '" +
                                                    iv.label + "'");
      lvl.intervals.push_back(iv);
    }
    levels.push_back(std::move(lvl));
  }

  for (std::size_t k = 0; k < levels.size(); ++k) {
    auto& pl = pa.levels[k];
    const bool top = k + 1 == levels.size();
    if (top) {
      if (!pl.parents.empty()) throw fail(pl.parent_lines.front(), "top level cannot declare parents");
      continue;
    }
    auto& lvl = levels[k];
    lvl.parent.assign(lvl.intervals.size(), 0);
    std::vector<bool> assigned(lvl.intervals.size(), false);
    const auto& up = levels[k + 1].intervals;
    for (std::size_t p = 0; p < pl.parents.size(); ++p) {
      const auto& [child, parent] = pl.parents[p];
      auto ci = std::find_if(lvl.intervals.begin(), lvl.intervals.end(),
                             [&](const Interval& iv) { return iv.label == child; });
      if (ci == lvl.intervals.end()) throw fail(pl.parent_lines[p], "unknown child label '" + child + "'");
      auto pi = std::find_if(up.begin(), up.end(), [&](const Interval& iv) { return iv.label == parent; });
      if (pi == up.end()) throw fail(pl.parent_lines[p], "missing parent label '" + parent + "'");
      const auto c = static_cast<std::size_t>(ci - lvl.intervals.begin());
      if (assigned[c]) throw fail(pl.parent_lines[p], "label '" + child + "' has two parents");
      assigned[c] = true;
      lvl.parent[c] = static_cast<LabelId>(pi - up.begin());
    }
    for (std::size_t c = 0; c < assigned.size(); ++c)
      if (!assigned[c]) throw fail(pl.line, "missing parent label for '" + lvl.intervals[c].label + "'");
  }

  try {
    return ConceptHierarchy(AttributeSchema{pa.name, *pa.index, pa.weight, 0}, std::move(levels));
  } catch (const Error& e) {
    throw fail(pa.line, e.what());
  }
}

}  // namespace

std::vector<ConceptHierarchy> parse_hierarchy_config(std::string_view doc) {
  std::vector<ConceptHierarchy> out;
  std::optional<PendingAttribute> cur;
  std::set<std::string> names;
  std::set<std::size_t> indexes;

  std::size_t line_no = 0;
  for (auto raw_line : text::split(doc, '\n')) {
    ++line_no;
    const auto line = text::strip_comment(raw_line);
    if (line.empty()) continue;
    const auto tok = text::split_ws(line);
    const auto& kw = tok[0];
    auto fail = [&](const std::string& what) { return ParseError(ErrorCode::Parse, line_no, what); };
    auto arity = [&](std::size_t n) {
      if (tok.size() != n) throw fail("'" + std::string(kw) + "' expects " + std::to_string(n - 1) + " argument(s)");
    };

    if (kw == "attribute") {
      arity(2);
      if (cur) throw fail("'attribute' inside an open block (missing 'end')");
      if (!valid_label(tok[1])) throw fail("invalid attribute name");
      if (!names.insert(std::string(tok[1])).second) throw fail("duplicate attribute '" + std::string(tok[1]) + "'");
      cur.emplace();
      cur->name = std::string(tok[1]);
      cur->line = line_no;
      continue;
    }
    if (!cur) throw fail("'" + std::string(kw) + "' outside an attribute block");

    if (kw == "index") {
      arity(2);
      const auto v = text::parse_int(tok[1]);
      if (!v || *v < 0) throw fail("index must be a non-negative integer");
      if (!indexes.insert(static_cast<std::size_t>(*v)).second) throw fail("duplicate index " + std::string(tok[1]));
      cur->index = static_cast<std::size_t>(*v);
    } else if (kw == "weight") {
      arity(2);
      const auto v = text::parse_double(tok[1]);
      if (!v || !std::isfinite(*v)) throw fail("weight must be a real number");
      if (*v < 0.0) throw fail("negative weight");
      cur->weight = *v;
    } else if (kw == "level") {
      arity(2);
      const auto v = text::parse_int(tok[1]);
      if (!v || *v != static_cast<long long>(cur->levels.size()) + 1)
        throw fail("levels must be declared in order starting at 1");
      cur->levels.emplace_back().line = line_no;
    } else if (kw == "interval") {
      arity(4);
      if (cur->levels.empty()) throw fail("'interval' before any 'level'");
      const auto lo = text::parse_double(tok[1]);
      const auto hi = text::parse_double(tok[2]);
      if (!lo || !hi || std::isnan(*lo) || std::isnan(*hi) || *lo > *hi) throw fail("bad interval bounds");
      if (!valid_label(tok[3])) throw fail("invalid label");
      auto& pl = cur->levels.back();
      for (const auto& iv : pl.intervals) {
        if (iv.label == tok[3]) throw fail("duplicate label '" + iv.label + "'");
        const bool disjoint = *hi <= iv.lo || *lo >= iv.hi;
        const bool both_empty = *lo == *hi || iv.lo == iv.hi;
        if (!disjoint && !both_empty) throw fail("interval overlaps '" + iv.label + "'");
      }
      pl.intervals.push_back({*lo, *hi, std::string(tok[3])});
      pl.interval_lines.push_back(line_no);
    } else if (kw == "parent") {
      arity(3);
      if (cur->levels.empty()) throw fail("'parent' before any 'level'");
      auto& pl = cur->levels.back();
      pl.parents.emplace_back(std::string(tok[1]), std::string(tok[2]));
      pl.parent_lines.push_back(line_no);
    } else if (kw == "end") {
      arity(1);
      out.push_back(finish(*cur, line_no));
      cur.reset();
    } else {
      throw fail("unknown keyword '" + std::string(kw) + "'");
    }
  }
  if (cur) throw ParseError(ErrorCode::Parse, cur->line, "attribute '" + cur->name + "' is never closed with 'end'");
  return out;
}

std::string serialize_hierarchies(std::span<const ConceptHierarchy> hierarchies) {
  std::ostringstream os;
  for (const auto& h : hierarchies) {
    os << "attribute " << h.name() << "\n";
    os << "  index " << h.schema().index << "\n";
    os << "  weight " << text::format_double(h.schema().weight) << "\n";
    for (int k = 1; k <= h.max_level(); ++k) {
      const auto& lvl = h.level(k);
      os << "  level " << k << "\n";
      for (const auto& iv : lvl.intervals)
        os << "    interval " << text::format_double(iv.lo) << " " << text::format_double(iv.hi) << " "
           << iv.label << "\n";
      for (std::size_t i = 0; i < lvl.parent.size(); ++i)
        os << "    parent " << lvl.intervals[i].label << " " << h.label_name(k + 1, lvl.parent[i]) << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

std::uint64_t hierarchy_checksum(std::span<const ConceptHierarchy> hierarchies) {
  return text::fnv1a64(serialize_hierarchies(hierarchies));
}

}  // namespace aoipm
