#include "oracles/aoi_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace oracle {

namespace {

std::string raw_text(double x) {
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Label whose interval holds x at level k; the last interval is closed and
// values beyond either end clamp to the nearest interval.
const std::string& containing_label(const aoipm::ConceptHierarchy& h, int k, double x) {
  const auto& ivs = h.level(k).intervals;
  if (x < ivs.front().lo) return ivs.front().label;
  if (x >= ivs.back().hi) return ivs.back().label;
  for (const auto& iv : ivs)
    if (iv.lo <= x && x < iv.hi) return iv.label;
  return ivs.back().label;
}

struct State {
  std::vector<int> level;
  std::vector<bool> removed;
  double level_weight = 1.0;
  double prev_level_weight = 1.0;
  std::uint64_t outliers = 0;
};

std::string value_text(const aoipm::ConceptHierarchy& h, const State& s, std::size_t j, double x) {
  if (s.removed[j]) return "*";
  if (s.level[j] == 0) return raw_text(x);
  return containing_label(h, s.level[j], x);
}

std::string key_of(const std::vector<double>& row, const std::vector<aoipm::ConceptHierarchy>& hs, const State& s) {
  std::string key;
  for (std::size_t j = 0; j < row.size(); ++j) key += (j ? "," : "") + value_text(hs[j], s, j, row[j]);
  return key;
}

std::string descriptor_of(const State& s) {
  std::string out;
  for (std::size_t j = 0; j < s.level.size(); ++j)
    out += (j ? "," : "") + (s.removed[j] ? std::string("R") : std::to_string(s.level[j]));
  return out;
}

double mean_level_weight(const State& s) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t j = 0; j < s.level.size(); ++j) {
    if (s.removed[j]) continue;
    sum += std::pow(0.5, s.level[j]);
    ++n;
  }
  return sum / n;
}

}  // namespace

bool ClusterRecord::operator<(const ClusterRecord& o) const {
  return std::tie(descriptor, signature, instances, outliers, rows) <
         std::tie(o.descriptor, o.signature, o.instances, o.outliers, o.rows);
}

AoiOutcome brute_force_aoi(const std::vector<std::vector<double>>& table,
                           const std::vector<aoipm::ConceptHierarchy>& hs, const aoipm::AoiParams& params) {
  const std::size_t width = hs.size();
  std::vector<std::uint32_t> live(table.size());
  for (std::uint32_t r = 0; r < live.size(); ++r) live[r] = r;
  AoiOutcome out;
  std::set<std::string> known;

  auto groups = [&](const State& s) {
    std::map<std::string, std::vector<std::uint32_t>> g;
    for (auto r : live) g[key_of(table[r], hs, s)].push_back(r);
    return g;
  };
  auto distinct = [&](const State& s, std::size_t j) {
    std::set<std::string> seen;
    for (auto r : live) seen.insert(value_text(hs[j], s, j, table[r][j]));
    return seen.size();
  };
  auto pick = [&](const State& s) -> int {
    const auto active = std::count(s.removed.begin(), s.removed.end(), false);
    int best = -1;
    std::size_t best_d = 0;
    double best_w = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      if (s.removed[j]) continue;
      const auto d = distinct(s, j);
      const bool ascend = s.level[j] < hs[j].max_level();
      const bool drop = active > 1 && d > params.attr_threshold;
      if (!(ascend || drop) || d <= 1) continue;
      const double w = hs[j].schema().weight;
      if (best < 0 || d > best_d || (d == best_d && w > best_w)) {
        best = static_cast<int>(j);
        best_d = d;
        best_w = w;
      }
    }
    return best;
  };
  auto emit = [&](const State& s, int m, bool final_form) {
    const auto g = groups(s);
    if (!final_form) {
      if (g.size() > params.tuple_threshold) return;
      for (std::size_t j = 0; j < width; ++j)
        if (!s.removed[j] && distinct(s, j) > params.attr_threshold) return;
    }
    const std::string desc = descriptor_of(s);
    const double bonus = std::max(0.0, s.prev_level_weight - s.level_weight);
    std::set<std::uint32_t> taken;
    for (const auto& [key, rows] : g) {
      if (rows.size() < static_cast<std::size_t>(m)) continue;
      if (!known.insert(desc + "|" + key).second) continue;
      ClusterRecord c;
      c.descriptor = desc;
      c.signature = key;
      c.instances = rows.size();
      c.outliers = s.outliers;
      c.level_weight = s.level_weight;
      c.prev_level_weight = s.prev_level_weight;
      c.weight = s.level_weight + static_cast<double>(rows.size()) / static_cast<double>(s.outliers) * bonus;
      c.rows = rows;
      out.clusters.push_back(c);
      taken.insert(rows.begin(), rows.end());
    }
    std::erase_if(live, [&](std::uint32_t r) { return taken.count(r) > 0; });
  };

  for (int m = params.min_cluster_size; m >= 2; --m) {
    if (live.size() < static_cast<std::size_t>(m)) continue;
    State s{std::vector<int>(width, 0), std::vector<bool>(width, false), 1.0, 1.0, live.size()};
    emit(s, m, pick(s) < 0);
    while (live.size() >= static_cast<std::size_t>(m)) {
      const int j = pick(s);
      if (j < 0) break;
      s.prev_level_weight = s.level_weight;
      if (s.level[static_cast<std::size_t>(j)] < hs[static_cast<std::size_t>(j)].max_level())
        ++s.level[static_cast<std::size_t>(j)];
      else
        s.removed[static_cast<std::size_t>(j)] = true;
      s.level_weight = mean_level_weight(s);
      s.outliers = live.size();
      emit(s, m, pick(s) < 0);
    }
  }
  std::sort(out.clusters.begin(), out.clusters.end());
  out.residual = live;
  std::sort(out.residual.begin(), out.residual.end());
  return out;
}

std::vector<ClusterRecord> records_of(const aoipm::KnowledgeBase& kb,
                                      const std::vector<aoipm::ConceptHierarchy>& hs) {
  std::vector<ClusterRecord> out;
  for (std::size_t id = 0; id < kb.cluster_count(); ++id) {
    const auto& c = kb.cluster(id);
    ClusterRecord r;
    for (std::size_t j = 0; j < c.descriptor.size(); ++j) {
      const int level = c.descriptor[j];
      r.descriptor += (j ? "," : "") + (level == aoipm::kRemoved ? std::string("R") : std::to_string(level));
      std::string v = "*";
      if (level == 0)
        v = raw_text(std::bit_cast<double>(c.signature[j]));
      else if (level > 0)
        v = hs[j].label_name(level, static_cast<aoipm::LabelId>(c.signature[j]));
      r.signature += (j ? "," : "") + v;
    }
    r.instances = c.instances;
    r.outliers = c.outliers;
    r.level_weight = c.level_weight;
    r.prev_level_weight = c.prev_level_weight;
    r.weight = c.weight;
    r.rows = c.rows;
    std::sort(r.rows.begin(), r.rows.end());
    out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
