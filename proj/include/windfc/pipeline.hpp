#pragma once

// End-to-end forecasting run: ingest, clean, select features, slice days,
// choose similar days, train, forecast one day and evaluate.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfc/bagging.hpp"
#include "windfc/bpnn.hpp"
#include "windfc/config.hpp"
#include "windfc/dataset.hpp"
#include "windfc/error.hpp"
#include "windfc/metrics.hpp"
#include "windfc/preprocess.hpp"
#include "windfc/random.hpp"
#include "windfc/relief.hpp"
#include "windfc/similar_days.hpp"
#include "windfc/text.hpp"

namespace windfc {

namespace detail {

/// Runs `fn`, rethrowing any failure as a StageError for `stage`.
template <typename Fn>
auto stage(const std::string& name, const std::string& hint, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), hint);
  }
}

}  // namespace detail

/// Cleaned 10-minute series sliced into days.
struct PreparedData {
  Series series;
  std::vector<RowReject> rejects;
  std::vector<std::size_t> inserted_slots;
  CleanReport clean_report;
  std::vector<DayUnit> days;
  std::size_t dropped_records = 0;
};

inline PreparedData prepare_data(const PipelineConfig& cfg) {
  PreparedData out;
  Series raw = detail::stage("ingest", "check source, csv_path and the [schema] column names", [&] {
    cfg.validate();
    if (cfg.source == "synthetic") return synth_generate(cfg.synth_seed, cfg.synth_days, cfg.curve);
    IngestResult r = ingest_csv(cfg.csv_path, cfg.schema);
    out.rejects = std::move(r.rejects);
    return std::move(r.series);
  });
  detail::stage("clean", "set clean = true or repair the input records", [&] {
    GridFillResult grid = fill_missing_slots(raw);
    out.inserted_slots = std::move(grid.inserted);
    out.series.extra_names = grid.series.extra_names;
    if (cfg.clean) {
      CleanResult c = clean(grid.series.records);
      out.series.records = std::move(c.records);
      out.clean_report = std::move(c.report);
    } else {
      for (const auto& r : grid.series.records)
        if (detail::any_non_finite(r) || r.wind_speed < 0.0 || r.power < 0.0)
          throw InvalidInput("invalid record at timestamp " + std::to_string(r.timestamp) +
                             " and cleaning is disabled");
      out.series.records = std::move(grid.series.records);
    }
  });
  detail::stage("slice", "supply at least one full day (144 ten-minute records)", [&] {
    SliceResult s = slice_days(out.series.records);
    out.days = std::move(s.days);
    out.dropped_records = s.dropped;
  });
  return out;
}

/// Records of one day at the modelling granularity.
inline std::vector<SampleRecord> day_rows(const DayUnit& day, Granularity g) {
  if (g == Granularity::TenMinute) return day.records;
  return aggregate_hourly(day.records).records;
}

inline double feature_value(const SampleRecord& r, const std::string& name,
                            const std::vector<std::string>& extra_names) {
  if (name == "wind_speed") return r.wind_speed;
  if (name == "ambient_temp") return r.ambient_temp;
  if (name == kBladeAngle) return r.blade_angle;
  if (name == kBladeSin) return std::sin(detail::deg2rad(r.blade_angle));
  if (name == kBladeCos) return std::cos(detail::deg2rad(r.blade_angle));
  for (std::size_t e = 0; e < extra_names.size(); ++e)
    if (extra_names[e] == name) return r.extra.at(e);
  throw InvalidInput("unknown feature '" + name + "'");
}

inline Batch build_batch(std::span<const SampleRecord> rows, const std::vector<std::string>& features,
                         const std::vector<std::string>& extra_names) {
  Batch b{Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.size())),
          Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < features.size(); ++f)
      b.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = feature_value(rows[i], features[f], extra_names);
    b.y[static_cast<Eigen::Index>(i)] = rows[i].power;
  }
  return b;
}

/// Everything fixed before any approach trains: the forecast day, its inputs,
/// the historical window and the selected features.
struct ForecastSetup {
  std::size_t forecast_pos = 0;            // position in PreparedData::days
  DayUnit forecast_day;                    // weather possibly perturbed
  std::vector<SampleRecord> forecast_rows;  // first horizon rows at the granularity
  std::vector<DayUnit> history;            // days before the forecast day
  FeatureWeights weights;
  std::vector<std::string> features;
};

inline ForecastSetup setup_forecast(const PipelineConfig& cfg, const PreparedData& data) {
  ForecastSetup s;
  const Granularity g = cfg.granularity_value();
  detail::stage("split", "choose forecast_day so at least one earlier day exists", [&] {
    const auto n = static_cast<long>(data.days.size());
    const long f = cfg.forecast_day < 0 ? n + cfg.forecast_day : cfg.forecast_day;
    if (f < 1 || f >= n)
      throw InvalidInput("forecast_day " + std::to_string(cfg.forecast_day) + " resolves to day " + std::to_string(f) +
                         ", outside [1, " + std::to_string(n - 1) + "] for " + std::to_string(n) + " days");
    s.forecast_pos = static_cast<std::size_t>(f);
    s.forecast_day = data.days[s.forecast_pos];
    if (cfg.weather_noise > 0.0) {
      Rng rng = make_rng(cfg.weather_seed());
      std::normal_distribution<double> noise(0.0, cfg.weather_noise);
      for (auto& r : s.forecast_day.records) {
        r.wind_speed = std::max(0.0, r.wind_speed + noise(rng));
        r.ambient_temp += noise(rng);
      }
      s.forecast_day.recompute_signatures();
    }
    auto rows = day_rows(s.forecast_day, g);
    const std::size_t per_hour = g == Granularity::Hourly ? 1 : kRecordsPerHour;
    rows.resize(std::min(rows.size(), static_cast<std::size_t>(cfg.horizon_hours) * per_hour));
    s.forecast_rows = std::move(rows);
    const std::size_t first = s.forecast_pos > static_cast<std::size_t>(cfg.history_days)
                                  ? s.forecast_pos - static_cast<std::size_t>(cfg.history_days)
                                  : 0;
    s.history.assign(data.days.begin() + static_cast<long>(first), data.days.begin() + f);
  });
  detail::stage("features", "lower relief_threshold or extend forecastable / forced_include", [&] {
    std::vector<std::string> names = {"wind_speed", kBladeAngle, "ambient_temp"};
    for (const auto& e : data.series.extra_names) names.push_back(e);
    std::vector<SampleRecord> rows;
    for (const auto& d : s.history) {
      auto r = day_rows(d, g);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    const Batch all = build_batch(rows, names, data.series.extra_names);
    s.weights = relief_weights(all.x, all.y, names, cfg.relief_params());
    s.features = select_features(s.weights, cfg.forecastable_set(), cfg.forced_include_set());
  });
  return s;
}

/// Outcome of one approach on the forecast day.
struct ApproachResult {
  Approach approach = Approach::BaggingClustering;
  std::vector<int> training_days;
  std::optional<SimilarDaySelection> selection;
  std::optional<HiddenWidthResult> hidden_search;
  Scaling scaling;
  BaggedEnsemble model;  // a single net is a one-member ensemble
  std::vector<std::int64_t> timestamps;
  std::vector<double> actual;
  std::vector<double> predicted;
  EvalReport report;
};

inline ApproachResult run_approach(const PipelineConfig& cfg, const PreparedData& data, const ForecastSetup& setup,
                                   Approach approach) {
  ApproachResult out;
  out.approach = approach;
  const Granularity g = cfg.granularity_value();

  if (approach == Approach::Plain) {
    const std::size_t w = std::min(setup.history.size(), static_cast<std::size_t>(cfg.baseline_days));
    for (std::size_t i = setup.history.size() - w; i < setup.history.size(); ++i)
      out.training_days.push_back(setup.history[i].day_index);
  } else {
    detail::stage("clustering", "clusters must not exceed the historical days; lower clusters or raise history_days",
                  [&] {
                    const auto ref = make_forecast_reference(data.days[setup.forecast_pos - 1], &setup.forecast_day);
                    out.selection = select_training_days(setup.history, ref, cfg.similar_day_options());
                    out.training_days = out.selection->training_days;
                  });
  }

  Batch train_set, forecast_set;
  detail::stage("normalize", "training rows must be finite", [&] {
    std::vector<SampleRecord> rows;
    for (int day : out.training_days) {
      auto r = day_rows(data.days[static_cast<std::size_t>(day)], g);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    const Batch raw = build_batch(rows, setup.features, data.series.extra_names);
    out.scaling = Scaling::fit(raw.x, raw.y);
    train_set = {out.scaling.scale_inputs(raw.x), out.scaling.scale_target(raw.y)};
    const Batch fraw = build_batch(setup.forecast_rows, setup.features, data.series.extra_names);
    forecast_set = {out.scaling.scale_inputs(fraw.x), fraw.y};
  });

  detail::stage("train", "lower learning_rate or max_epochs, or check the training data", [&] {
    NetConfig net_cfg = cfg.net_config(static_cast<int>(setup.features.size()));
    if (cfg.hidden_sweep) {
      // Hold out the most recent fifth of the training rows for validation.
      const Eigen::Index n = train_set.size();
      const Eigen::Index n_val = std::max<Eigen::Index>(1, n / 5);
      if (n - n_val < 1) throw InvalidInput("hidden_sweep needs at least 2 training rows");
      Batch fit{train_set.x.topRows(n - n_val), train_set.y.head(n - n_val)};
      Batch val{train_set.x.bottomRows(n_val), train_set.y.tail(n_val)};
      out.hidden_search = select_hidden_width(net_cfg, fit, val, default_hidden_candidates(), cfg.threads);
      net_cfg = out.hidden_search->config;
    }
    if (approach == Approach::BaggingClustering) {
      out.model = train_ensemble(cfg.bagging_config(net_cfg), train_set);
    } else {
      out.model.config = cfg.bagging_config(net_cfg);
      out.model.config.ensemble_size = 1;
      out.model.config.master_seed = net_cfg.seed;
      out.model.members.push_back(train(net_cfg, train_set));
      out.model.member_seeds.push_back(net_cfg.seed);
    }
  });

  detail::stage("forecast", "the forecast inputs must be finite", [&] {
    const Vector u = predict_batch(out.model, forecast_set.x);
    const Vector kw = out.scaling.unscale_target(u);
    for (std::size_t i = 0; i < setup.forecast_rows.size(); ++i) {
      out.timestamps.push_back(setup.forecast_rows[i].timestamp);
      out.actual.push_back(setup.forecast_rows[i].power);
      out.predicted.push_back(std::max(0.0, kw[static_cast<Eigen::Index>(i)]));
    }
  });

  detail::stage("evaluate", "", [&] { out.report = EvalReport::evaluate(to_string(approach), out.actual, out.predicted); });
  return out;
}

struct PipelineRun {
  PreparedData data;
  ForecastSetup setup;
  ApproachResult result;
};

inline PipelineRun run_pipeline(const PipelineConfig& cfg) {
  PipelineRun run;
  run.data = prepare_data(cfg);
  run.setup = setup_forecast(cfg, run.data);
  run.result = run_approach(cfg, run.data, run.setup, cfg.approach_value());
  return run;
}

struct CompareRun {
  PreparedData data;
  ForecastSetup setup;
  std::vector<ApproachResult> results;  // plain, clustering, bagging + clustering
  Comparison comparison;
};

/// The three approaches on the same data, forecast day and features.
inline CompareRun run_compare(const PipelineConfig& cfg) {
  CompareRun run;
  run.data = prepare_data(cfg);
  run.setup = setup_forecast(cfg, run.data);
  std::vector<EvalReport> reports;
  for (auto a : {Approach::Plain, Approach::Clustering, Approach::BaggingClustering}) {
    run.results.push_back(run_approach(cfg, run.data, run.setup, a));
    reports.push_back(run.results.back().report);
  }
  run.comparison = compare(std::move(reports));
  return run;
}

// ---------------------------------------------------------------------------
// Run-directory artifacts

inline void write_forecast_csv(std::ostream& out, const ApproachResult& r) {
  out << "timestamp,actual_kw,predicted_kw\n";
  for (std::size_t i = 0; i < r.timestamps.size(); ++i)
    out << r.timestamps[i] << ',' << text::format_number(r.actual[i]) << ',' << text::format_number(r.predicted[i])
        << '\n';
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

inline nlohmann::json clean_report_json(const PreparedData& d) {
  nlohmann::json j = d.clean_report;
  j["inserted_slots"] = d.inserted_slots;
  auto rejects = nlohmann::json::array();
  for (const auto& r : d.rejects) rejects.push_back({{"line", r.line}, {"column", r.column}, {"reason", r.reason}});
  j["ingest_rejects"] = rejects;
  j["dropped_trailing_records"] = d.dropped_records;
  j["days"] = d.days.size();
  return j;
}

inline nlohmann::json selection_json(const ForecastSetup& s, const ApproachResult& r) {
  nlohmann::json j;
  j["approach"] = to_string(r.approach);
  j["forecast_day"] = s.forecast_day.day_index;
  j["features"] = s.features;
  j["training_days"] = r.training_days;
  if (r.selection) j["similar_days"] = *r.selection;
  if (r.hidden_search) {
    j["hidden_search"] = {{"widths", r.hidden_search->widths},
                          {"validation_rmse", r.hidden_search->validation_rmse},
                          {"chosen", r.hidden_search->config.hidden_dim}};
  }
  return j;
}

}  // namespace detail

/// Writes the artifacts of a pipeline run into `dir`.
inline void write_run_dir(const std::filesystem::path& dir, const PipelineConfig& cfg, const PipelineRun& run) {
  detail::stage("persist", "check that output_dir is writable", [&] {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "config.ini", [&](std::ostream& o) { write_config(o, cfg); });
    detail::write_json(dir / "clean_report.json", detail::clean_report_json(run.data));
    detail::write_json(dir / "feature_weights.json", run.setup.weights);
    detail::write_json(dir / "selection.json", detail::selection_json(run.setup, run.result));
    save_ensemble(dir / "model", run.result.model, run.result.scaling);
    detail::write_text(dir / "forecast.csv", [&](std::ostream& o) { write_forecast_csv(o, run.result); });
    detail::write_json(dir / "eval_report.json", run.result.report);
  });
}

/// Writes the artifacts of a comparison run into `dir`.
inline void write_compare_dir(const std::filesystem::path& dir, const PipelineConfig& cfg, const CompareRun& run) {
  detail::stage("persist", "check that output_dir is writable", [&] {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "config.ini", [&](std::ostream& o) { write_config(o, cfg); });
    detail::write_json(dir / "clean_report.json", detail::clean_report_json(run.data));
    detail::write_json(dir / "feature_weights.json", run.setup.weights);
    auto sel = nlohmann::json::array();
    for (const auto& r : run.results) sel.push_back(detail::selection_json(run.setup, r));
    detail::write_json(dir / "selection.json", sel);
    detail::write_json(dir / "comparison.json", run.comparison);
    detail::write_text(dir / "comparison.txt", [&](std::ostream& o) { o << format_table(run.comparison); });
    detail::write_text(dir / "residuals.csv", [&](std::ostream& o) {
      write_residuals_csv(o, run.results.front().timestamps, run.comparison.reports);
    });
  });
}

}  // namespace windfc
