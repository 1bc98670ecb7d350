#include "aoipm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aoipm/error.hpp"
#include "aoipm/text.hpp"

namespace aoipm {

using nlohmann::json;

namespace {

// Same error with `context` in front of its message.
Error relabel(const Error& e, const std::string& context) {
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  return Error(e.code(), context + ": " + msg);
}

// Re-raises a module error with the pipeline stage that produced it.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw relabel(e, std::string(name) + " stage");
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& field) {
  if (auto it = obj.find(key); it != obj.end()) field = it->template get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidArgument, where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + where + "." + it.key() + "'");
  }
}

const char* truth_name(RulTruth t) {
  return t == RulTruth::GroundTruthFile ? "ground-truth" : "training-endpoints";
}

Side rule_side(const PipelineConfig& c) { return c.two_sided ? Side::Both : Side::Upper; }

std::string opt_cycle(const std::optional<std::size_t>& idx) {
  return idx ? std::to_string(*idx + 1) : "-";
}

std::string opt_int(const std::optional<long long>& v) { return v ? std::to_string(*v) : "-"; }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

EwmaParams pooled_baseline(std::span<const std::vector<double>> series, const PipelineConfig& config) {
  std::vector<double> pool;
  for (const auto& s : series)
    if (s.size() > config.n_baseline) pool.insert(pool.end(), s.begin(), s.begin() + config.n_baseline);
  if (pool.empty())
    for (const auto& s : series) pool.insert(pool.end(), s.begin(), s.end());
  if (pool.size() < 2) throw Error(ErrorCode::InsufficientBaseline, "not enough points for a pooled baseline");
  const auto b = fit_baseline(pool, pool.size());
  EwmaParams p;
  p.lambda = config.lambda;
  p.L = config.L;
  p.mu0 = b.mu0;
  p.sigma = b.sigma;
  p.validate();
  return p;
}

}  // namespace

std::string PipelineConfig::to_json() const {
  json j;
  j["hierarchy"] = {{"num_levels", num_levels}, {"base_bins", base_bins}, {"file", hierarchy_file}};
  j["preprocess"] = {{"constant_tolerance", constant_tolerance}, {"drop_unbinnable", drop_unbinnable}};
  j["aoi"] = {{"min_cluster_size", aoi.min_cluster_size},
              {"attr_threshold", aoi.attr_threshold},
              {"tuple_threshold", aoi.tuple_threshold}};
  j["ewma"] = {{"lambda", lambda}, {"L", L}, {"n_baseline", n_baseline}, {"two_sided", two_sided}};
  j["lstm"] = {{"hidden_size", lstm.hidden_size},     {"window", lstm.window},
               {"learning_rate", lstm.learning_rate}, {"epochs", lstm.epochs},
               {"batch_size", lstm.batch_size},       {"train_fraction", lstm.train_fraction},
               {"seed", lstm.seed},                   {"clip_norm", lstm.clip_norm},
               {"split", lstm.split == SplitMode::Pooled ? "pooled" : "per-series"}};
  j["rul"] = {{"horizon_cap", horizon_cap}, {"cycle_threshold", cycle_threshold}, {"truth", truth_name(truth)}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  try {
    reject_unknown(j, {"hierarchy", "preprocess", "aoi", "ewma", "lstm", "rul"}, "config");
    if (j.contains("hierarchy")) {
      const auto& h = j["hierarchy"];
      reject_unknown(h, {"num_levels", "base_bins", "file"}, "hierarchy");
      read_key(h, "num_levels", c.num_levels);
      read_key(h, "base_bins", c.base_bins);
      read_key(h, "file", c.hierarchy_file);
    }
    if (j.contains("preprocess")) {
      const auto& p = j["preprocess"];
      reject_unknown(p, {"constant_tolerance", "drop_unbinnable"}, "preprocess");
      read_key(p, "constant_tolerance", c.constant_tolerance);
      read_key(p, "drop_unbinnable", c.drop_unbinnable);
    }
    if (j.contains("aoi")) {
      const auto& a = j["aoi"];
      reject_unknown(a, {"min_cluster_size", "attr_threshold", "tuple_threshold"}, "aoi");
      read_key(a, "min_cluster_size", c.aoi.min_cluster_size);
      read_key(a, "attr_threshold", c.aoi.attr_threshold);
      read_key(a, "tuple_threshold", c.aoi.tuple_threshold);
    }
    if (j.contains("ewma")) {
      const auto& e = j["ewma"];
      reject_unknown(e, {"lambda", "L", "n_baseline", "two_sided"}, "ewma");
      read_key(e, "lambda", c.lambda);
      read_key(e, "L", c.L);
      read_key(e, "n_baseline", c.n_baseline);
      read_key(e, "two_sided", c.two_sided);
    }
    if (j.contains("lstm")) {
      const auto& l = j["lstm"];
      reject_unknown(l, {"hidden_size", "window", "learning_rate", "epochs", "batch_size", "train_fraction", "seed",
                         "clip_norm", "split"},
                     "lstm");
      read_key(l, "hidden_size", c.lstm.hidden_size);
      read_key(l, "window", c.lstm.window);
      read_key(l, "learning_rate", c.lstm.learning_rate);
      read_key(l, "epochs", c.lstm.epochs);
      read_key(l, "batch_size", c.lstm.batch_size);
      read_key(l, "train_fraction", c.lstm.train_fraction);
      read_key(l, "seed", c.lstm.seed);
      read_key(l, "clip_norm", c.lstm.clip_norm);
      std::string split = c.lstm.split == SplitMode::Pooled ? "pooled" : "per-series";
      read_key(l, "split", split);
      if (split == "pooled")
        c.lstm.split = SplitMode::Pooled;
      else if (split == "per-series")
        c.lstm.split = SplitMode::PerSeries;
      else
        throw Error(ErrorCode::InvalidArgument, "lstm.split must be pooled or per-series");
    }
    if (j.contains("rul")) {
      const auto& r = j["rul"];
      reject_unknown(r, {"horizon_cap", "cycle_threshold", "truth"}, "rul");
      read_key(r, "horizon_cap", c.horizon_cap);
      read_key(r, "cycle_threshold", c.cycle_threshold);
      std::string truth = truth_name(c.truth);
      read_key(r, "truth", truth);
      if (truth == "ground-truth")
        c.truth = RulTruth::GroundTruthFile;
      else if (truth == "training-endpoints")
        c.truth = RulTruth::TrainingEndpoints;
      else
        throw Error(ErrorCode::InvalidArgument, "rul.truth must be ground-truth or training-endpoints");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  if (c.n_baseline < 2) throw Error(ErrorCode::InvalidArgument, "ewma.n_baseline must be >= 2");
  if (c.aoi.min_cluster_size < 1) throw Error(ErrorCode::InvalidArgument, "aoi.min_cluster_size must be >= 1");
  return c;
}

SimulationBaseline simulation_baseline(std::span<const double> q, const PipelineConfig& config,
                                       const EwmaParams& pooled) {
  SimulationBaseline b;
  b.params = pooled;
  b.params.lambda = config.lambda;
  b.params.L = config.L;
  if (q.size() > config.n_baseline) {
    const auto fit = fit_baseline(q, config.n_baseline);
    b.params.mu0 = fit.mu0;
    b.params.sigma = fit.sigma;
    b.window = config.n_baseline;
  } else {
    b.pooled = true;
  }
  return b;
}

std::optional<std::size_t> change_point(std::span<const double> q, const SimulationBaseline& baseline,
                                        const PipelineConfig& config) {
  return detect_change_point(ewma_transform(q, baseline.params), baseline.window, rule_side(config));
}

WerSelection select_wer(std::span<const std::vector<double>> quantifications, const PipelineConfig& config,
                        const EwmaParams& pooled) {
  if (quantifications.empty()) throw Error(ErrorCode::EmptyInput, "no validation simulations");
  WerSelection sel;
  for (int r = 0; r < 4; ++r) sel.table[r].rule = r + 1;
  for (const auto& q : quantifications) {
    if (q.empty()) throw Error(ErrorCode::EmptyInput, "empty validation simulation");
    const auto base = simulation_baseline(q, config, pooled);
    const auto cp = change_point(q, base, config);
    const std::size_t start = cp ? *cp : std::min(base.window, q.size() - 1);
    const auto failure = static_cast<long long>(q.size()) - 1;
    for (auto& row : sel.table) {
      const auto hit = evaluate_wer({row.rule, rule_side(config)}, q, base.params.mu0, base.params.sigma, start);
      long long err;
      if (hit) {
        err = static_cast<long long>(*hit) - failure;
      } else {
        err = static_cast<long long>(q.size() - start);
        ++row.non_triggers;
      }
      row.errors.push_back(err);
    }
  }
  // Errors are integers, so these sums are exact and order-independent.
  const auto n = static_cast<double>(quantifications.size());
  for (auto& row : sel.table) {
    long long abs_sum = 0, sq_sum = 0;
    for (auto e : row.errors) {
      abs_sum += e < 0 ? -e : e;
      sq_sum += e * e;
    }
    row.mae = static_cast<double>(abs_sum) / n;
    row.mse = static_cast<double>(sq_sum) / n;
  }
  const WerRow* best = &sel.table[0];
  for (const auto& row : sel.table) {
    if (row.mae < best->mae || (row.mae == best->mae && row.mse < best->mse) ||
        (row.mae == best->mae && row.mse == best->mse && row.rule > best->rule))
      best = &row;
  }
  sel.rule = {best->rule, rule_side(config)};
  return sel;
}

TrainedArtifacts train_pipeline(const Dataset& train_data, const PipelineConfig& config) {
  TrainedArtifacts art;
  art.config = config;

  Dataset ds = stage("preprocess", [&] {
    Dataset d = drop_constant_attributes(drop_operational_settings(train_data), config.constant_tolerance);
    if (config.drop_unbinnable && config.base_bins > 0)
      d = drop_attributes(std::move(d), low_cardinality_attributes(d, static_cast<std::size_t>(config.base_bins)));
    return d;
  });
  art.retained = ds.retained;
  art.attribute_names = ds.attribute_names();

  std::vector<std::vector<double>> table;
  table.reserve(ds.total_cycles());
  for (const auto& sim : ds.simulations) {
    auto rows = ds.features(sim);
    std::move(rows.begin(), rows.end(), std::back_inserter(table));
  }

  art.hierarchies = stage("hierarchy", [&] {
    std::map<std::string, ConceptHierarchy> expert;
    if (!config.hierarchy_file.empty())
      for (auto& h : parse_hierarchy_config(text::read_file(config.hierarchy_file))) expert.emplace(h.name(), h);
    std::vector<ConceptHierarchy> hs;
    for (std::size_t a = 0; a < art.attribute_names.size(); ++a) {
      const auto& name = art.attribute_names[a];
      if (auto it = expert.find(name); it != expert.end()) {
        if (it->second.schema().index != a)
          throw Error(ErrorCode::InvalidArgument, "hierarchy '" + name + "' has index " +
                                                      std::to_string(it->second.schema().index) + ", expected " +
                                                      std::to_string(a));
        hs.push_back(it->second);
        expert.erase(it);
        continue;
      }
      std::vector<double> col;
      col.reserve(table.size());
      for (const auto& row : table) col.push_back(row[a]);
      hs.push_back(build_percentile_hierarchy(col, config.num_levels, config.base_bins, name, a));
    }
    if (!expert.empty())
      throw Error(ErrorCode::InvalidArgument, "hierarchy for unknown attribute '" + expert.begin()->first + "'");
    return hs;
  });

  auto aoi = stage("aoi", [&] { return run_aoi(table, art.hierarchies, config.aoi); });
  art.kb = std::move(aoi.kb);
  art.residual_tuples = aoi.residual_rows.size();

  std::vector<std::vector<double>> series = stage("quantify", [&] {
    const Quantifier quantifier(art.kb, art.hierarchies);
    std::vector<std::vector<double>> out;
    for (const auto& sim : ds.simulations) out.push_back(quantifier.quantify(sim.unit, ds.features(sim)).weights());
    return out;
  });

  art.ewma = stage("baseline", [&] { return pooled_baseline(series, config); });

  auto trained = stage("forecaster", [&] { return train(std::span<const std::vector<double>>(series), config.lstm); });
  art.model = std::move(trained.model);
  art.holdout_rmse = trained.holdout_rmse;

  art.wer = stage("rule-selection", [&] { return select_wer(series, config, art.ewma); });
  return art;
}

RulReport estimate_rul(int unit, std::span<const double> q, const TrainedArtifacts& artifacts) {
  const auto& config = artifacts.config;
  if (q.empty()) throw Error(ErrorCode::EmptyInput, "unit " + std::to_string(unit) + ": empty simulation");
  RulReport rep;
  rep.unit = unit;
  rep.length = q.size();
  const auto base = simulation_baseline(q, config, artifacts.ewma);
  rep.pooled_baseline = base.pooled;
  rep.change_point = change_point(q, base, config);
  if (!rep.change_point) return rep;

  const std::size_t cp = *rep.change_point;
  const auto last = static_cast<long long>(q.size()) - 1;
  const WerRule rule = artifacts.wer.rule;
  const double mu0 = base.params.mu0, sigma = base.params.sigma;

  rep.anomaly_at_real = evaluate_wer(rule, q, mu0, sigma, cp);
  if (rep.anomaly_at_real) {
    rep.predicted_rul = 0;
    rep.rul_from_change_point = static_cast<long long>(*rep.anomaly_at_real - cp);
    return rep;
  }
  if (q.size() < static_cast<std::size_t>(artifacts.model.window())) return rep;

  std::optional<std::size_t> hit;
  auto stop = [&](std::span<const double> extended) {
    hit = evaluate_wer(rule, extended, mu0, sigma, cp);
    return hit.has_value();
  };
  auto fc = forecast(artifacts.model, q, stop, config.horizon_cap);
  rep.forecast = std::move(fc.values);
  if (fc.capped) {
    rep.capped = true;
    rep.predicted_rul = static_cast<long long>(config.horizon_cap);
    rep.rul_from_change_point = last - static_cast<long long>(cp) + rep.predicted_rul.value();
    return rep;
  }
  rep.anomaly_at_forecast = hit;
  rep.predicted_rul = static_cast<long long>(*hit) - last;
  rep.rul_from_change_point = static_cast<long long>(*hit - cp);
  return rep;
}

std::vector<QuantificationSeries> quantify_dataset(const Dataset& data, const TrainedArtifacts& artifacts) {
  const Dataset ds = with_retained(data, artifacts.retained);
  const Quantifier quantifier(artifacts.kb, artifacts.hierarchies);
  std::vector<QuantificationSeries> out;
  out.reserve(ds.simulations.size());
  for (const auto& sim : ds.simulations) out.push_back(quantifier.quantify(sim.unit, ds.features(sim)));
  return out;
}

EvaluationSummary summarize(std::span<const RulReport> reports, const TrainedArtifacts& artifacts) {
  EvaluationSummary s;
  s.simulations = reports.size();
  s.wer_table = artifacts.wer.table;
  double abs_sum = 0.0, sq_sum = 0.0, filtered_sum = 0.0;
  std::size_t early = 0;
  for (const auto& r : reports) {
    if (r.change_point && r.true_rul) {
      const auto failure = static_cast<long long>(r.length) - 1 + *r.true_rul;
      if (static_cast<long long>(*r.change_point) < failure) ++early;
    }
    if (!r.abs_error) continue;
    ++s.predictions;
    if (r.capped) ++s.capped;
    const auto e = static_cast<double>(*r.abs_error);
    abs_sum += e;
    sq_sum += e * e;
    if (static_cast<long long>(*r.change_point) + 1 > artifacts.config.cycle_threshold) {
      ++s.filtered_count;
      filtered_sum += e;
    }
  }
  if (s.predictions > 0) {
    s.mae = abs_sum / static_cast<double>(s.predictions);
    s.mse = sq_sum / static_cast<double>(s.predictions);
  }
  if (s.filtered_count > 0) s.filtered_mae = filtered_sum / static_cast<double>(s.filtered_count);
  if (s.simulations > 0) s.early_detection_rate = static_cast<double>(early) / static_cast<double>(s.simulations);
  return s;
}

Evaluation evaluate(const Dataset& data, std::span<const int> true_rul, const TrainedArtifacts& artifacts) {
  const auto series = quantify_dataset(data, artifacts);
  const bool endpoints = artifacts.config.truth == RulTruth::TrainingEndpoints;
  if (!endpoints && true_rul.size() != series.size())
    throw Error(ErrorCode::Alignment, std::to_string(true_rul.size()) + " truth values for " +
                                          std::to_string(series.size()) + " simulations");
  Evaluation ev;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto q = series[i].weights();
    RulReport rep;
    if (endpoints) {
      // Cut the run-to-failure unit at its change point and predict the rest.
      const auto base = simulation_baseline(q, artifacts.config, artifacts.ewma);
      const auto cp = change_point(q, base, artifacts.config);
      if (cp) {
        rep = estimate_rul(series[i].simulation_id, std::span(q).first(*cp + 1), artifacts);
        rep.true_rul = static_cast<long long>(q.size() - 1 - *cp);
      } else {
        rep = estimate_rul(series[i].simulation_id, q, artifacts);
        rep.true_rul = 0;
      }
    } else {
      rep = estimate_rul(series[i].simulation_id, q, artifacts);
      rep.true_rul = true_rul[i];
    }
    if (rep.predicted_rul) rep.abs_error = std::llabs(*rep.predicted_rul - *rep.true_rul);
    ev.reports.push_back(std::move(rep));
  }
  ev.summary = summarize(ev.reports, artifacts);
  return ev;
}

std::string format_reports(std::span<const RulReport> reports) {
  std::ostringstream os;
  os << "unit length change_point anomaly_real anomaly_forecast predicted_rul rul_from_change_point true_rul "
        "abs_error flags\n";
  for (const auto& r : reports) {
    std::string flags;
    if (!r.change_point) flags += "no-change-point,";
    if (r.capped) flags += "capped,";
    if (r.pooled_baseline) flags += "pooled-baseline,";
    if (r.change_point && !r.predicted_rul) flags += "too-short,";
    if (flags.empty())
      flags = "-";
    else
      flags.pop_back();
    os << r.unit << " " << r.length << " " << opt_cycle(r.change_point) << " " << opt_cycle(r.anomaly_at_real) << " "
       << opt_cycle(r.anomaly_at_forecast) << " " << opt_int(r.predicted_rul) << " "
       << opt_int(r.rul_from_change_point) << " " << opt_int(r.true_rul) << " " << opt_int(r.abs_error) << " "
       << flags << "\n";
  }
  return os.str();
}

std::string format_summary(const EvaluationSummary& s, int cycle_threshold) {
  std::ostringstream os;
  os << "simulations " << s.simulations << "\n"
     << "predictions " << s.predictions << "\n"
     << "capped " << s.capped << "\n"
     << "mae " << text::format_double(s.mae) << "\n"
     << "mse " << text::format_double(s.mse) << "\n"
     << "filtered_threshold_cycle " << cycle_threshold << "\n"
     << "filtered_count " << s.filtered_count << "\n"
     << "filtered_mae " << text::format_double(s.filtered_mae) << "\n"
     << "early_detection_rate " << text::format_double(s.early_detection_rate) << "\n";
  return os.str();
}

std::string format_wer_table(const std::array<WerRow, 4>& table, const WerRule& selected) {
  std::ostringstream os;
  os << "| WER    | Mean Absolute Error | Mean Squared Error | Silent |\n"
     << "|--------|---------------------|--------------------|--------|\n";
  for (const auto& row : table) {
    std::string mae = fixed(row.mae, 2), mse = fixed(row.mse, 2);
    os << "| WER " << row.rule << (row.rule == selected.id ? "*" : " ") << " | " << std::string(19 - mae.size(), ' ')
       << mae << " | " << std::string(18 - std::min<std::size_t>(18, mse.size()), ' ') << mse << " | "
       << std::string(6 - std::min<std::size_t>(6, std::to_string(row.non_triggers).size()), ' ') << row.non_triggers
       << " |\n";
  }
  return os.str();
}

void TrainedArtifacts::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  text::write_file(dir + "/config.json", config.to_json());
  text::write_file(dir + "/hierarchies.txt", serialize_hierarchies(hierarchies));
  text::write_file(dir + "/knowledge_base.txt", kb.serialize(hierarchies));
  text::write_file(dir + "/model.txt", serialize_model(model, config.lstm));
  json j;
  j["format"] = "aoipm-artifacts 1";
  j["retained"] = retained;
  j["attributes"] = attribute_names;
  j["residual_tuples"] = residual_tuples;
  j["ewma"] = {{"lambda", ewma.lambda}, {"L", ewma.L}, {"n", ewma.n}, {"mu0", ewma.mu0}, {"sigma", ewma.sigma}};
  j["holdout_rmse"] = holdout_rmse;
  j["wer_rule"] = wer.rule.id;
  j["wer_two_sided"] = wer.rule.side == Side::Both;
  json rows = json::array();
  for (const auto& row : wer.table)
    rows.push_back({{"rule", row.rule},
                    {"mae", row.mae},
                    {"mse", row.mse},
                    {"non_triggers", row.non_triggers},
                    {"errors", row.errors}});
  j["wer_table"] = rows;
  text::write_file(dir + "/artifacts.json", j.dump(2) + "\n");
  text::write_file(dir + "/wer_table.md", format_wer_table(wer.table, wer.rule));
}

TrainedArtifacts TrainedArtifacts::load(const std::string& dir) {
  TrainedArtifacts art;
  // Names the offending file in any parse error.
  auto from = [&](const char* file, auto&& parse) {
    try {
      parse(text::read_file(dir + "/" + file));
    } catch (const Error& e) {
      throw relabel(e, file);
    }
  };
  from("config.json", [&](const std::string& t) { art.config = PipelineConfig::from_json(t); });
  from("hierarchies.txt", [&](const std::string& t) { art.hierarchies = parse_hierarchy_config(t); });
  from("knowledge_base.txt", [&](const std::string& t) { art.kb = KnowledgeBase::parse(t, art.hierarchies); });
  from("model.txt", [&](const std::string& t) { art.model = parse_model(t); });
  try {
    const auto j = json::parse(text::read_file(dir + "/artifacts.json"));
    if (j.at("format") != "aoipm-artifacts 1") throw Error(ErrorCode::Load, "unsupported artifact format");
    art.retained = j.at("retained").get<std::vector<std::size_t>>();
    art.attribute_names = j.at("attributes").get<std::vector<std::string>>();
    art.residual_tuples = j.at("residual_tuples").get<std::size_t>();
    const auto& e = j.at("ewma");
    art.ewma.lambda = e.at("lambda").get<double>();
    art.ewma.L = e.at("L").get<double>();
    art.ewma.n = e.at("n").get<int>();
    art.ewma.mu0 = e.at("mu0").get<double>();
    art.ewma.sigma = e.at("sigma").get<double>();
    art.holdout_rmse = j.at("holdout_rmse").get<double>();
    art.wer.rule.id = j.at("wer_rule").get<int>();
    art.wer.rule.side = j.at("wer_two_sided").get<bool>() ? Side::Both : Side::Upper;
    const auto& rows = j.at("wer_table");
    if (!rows.is_array() || rows.size() != 4) throw Error(ErrorCode::Load, "wer_table must have 4 rows");
    for (std::size_t r = 0; r < 4; ++r) {
      auto& row = art.wer.table[r];
      row.rule = rows[r].at("rule").get<int>();
      row.mae = rows[r].at("mae").get<double>();
      row.mse = rows[r].at("mse").get<double>();
      row.non_triggers = rows[r].at("non_triggers").get<std::size_t>();
      row.errors = rows[r].at("errors").get<std::vector<long long>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Load, dir + "/artifacts.json: " + e.what());
  }
  if (art.attribute_names != art.kb.attribute_names())
    throw Error(ErrorCode::Load, "artifact attributes disagree with the knowledge base");
  if (art.retained.size() != art.hierarchies.size())
    throw Error(ErrorCode::Load, "retained attributes disagree with the hierarchies");
  return art;
}

}  // namespace aoipm
