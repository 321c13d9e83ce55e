#pragma once

// Pipeline configuration: a flat INI file with one section per stage. Every
// key is unique across sections so it doubles as a command-line flag name.

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "windfc/bagging.hpp"
#include "windfc/bpnn.hpp"
#include "windfc/dataset.hpp"
#include "windfc/error.hpp"
#include "windfc/relief.hpp"
#include "windfc/similar_days.hpp"
#include "windfc/text.hpp"

namespace windfc {

enum class Granularity { TenMinute, Hourly };
enum class Approach { Plain, Clustering, BaggingClustering };

inline std::string to_string(Granularity g) { return g == Granularity::Hourly ? "hourly" : "10min"; }
inline std::string to_string(Approach a) {
  switch (a) {
    case Approach::Plain: return "bpnn";
    case Approach::Clustering: return "bpnn-clustering";
    case Approach::BaggingClustering: return "bagging-bpnn-clustering";
  }
  return "?";
}

struct PipelineConfig {
  // [data]
  std::string source = "synthetic";  // synthetic | csv
  std::string csv_path;
  std::uint64_t synth_seed = 7;
  int synth_days = 120;
  PowerCurveParams curve;
  // [schema]
  CsvSchema schema;
  // [clean]
  bool clean = true;
  // [features]
  int relief_iterations = 0;
  int relief_neighbors = 10;
  double relief_sigma = 20.0;
  double relief_threshold = 0.01;
  std::string forecastable = "wind_speed,blade_angle,ambient_temp";
  std::string forced_include = "wind_speed,blade_angle,ambient_temp";
  // [clustering]
  int clusters = 3;
  int restarts = 10;
  int kmeans_max_iter = 100;
  int min_days = 5;
  // [network]
  int hidden = 0;
  double learning_rate = 10.0;
  int max_epochs = 5000;
  double target_error = 1e-4;
  double init_range = 0.5;
  bool hidden_sweep = false;
  // [bagging]
  int ensemble_size = 10;
  double bootstrap_fraction = 1.0;
  unsigned threads = 1;
  // [run]
  std::string approach = "bagging-bpnn-clustering";
  std::string granularity = "hourly";
  int horizon_hours = 24;
  int history_days = 90;
  int baseline_days = 29;
  int forecast_day = -1;  // day index; negative counts from the end
  double weather_noise = 0.0;
  std::uint64_t seed = 1;
  std::string output_dir = "run";

  Granularity granularity_value() const {
    if (granularity == "hourly") return Granularity::Hourly;
    if (granularity == "10min") return Granularity::TenMinute;
    throw InvalidInput("granularity must be 'hourly' or '10min', got '" + granularity + "'");
  }

  Approach approach_value() const {
    for (auto a : {Approach::Plain, Approach::Clustering, Approach::BaggingClustering})
      if (approach == to_string(a)) return a;
    throw InvalidInput("approach must be one of bpnn, bpnn-clustering, bagging-bpnn-clustering; got '" + approach + "'");
  }

  // Stage seeds, all derived from `seed`.
  std::uint64_t relief_seed() const { return derive_seed(seed, 1); }
  std::uint64_t kmeans_seed() const { return derive_seed(seed, 2); }
  std::uint64_t net_seed() const { return derive_seed(seed, 3); }
  std::uint64_t bagging_seed() const { return derive_seed(seed, 4); }
  std::uint64_t weather_seed() const { return derive_seed(seed, 5); }

  ReliefParams relief_params() const {
    return {relief_iterations, relief_neighbors, relief_sigma, relief_seed(), relief_threshold};
  }

  SimilarDayOptions similar_day_options() const {
    return {clusters, restarts, kmeans_max_iter, kmeans_seed(), min_days, threads};
  }

  NetConfig net_config(int input_dim) const {
    NetConfig c;
    c.input_dim = input_dim;
    c.hidden_dim = hidden;
    c.learning_rate = learning_rate;
    c.max_epochs = max_epochs;
    c.target_error = target_error;
    c.seed = net_seed();
    c.weight_init_range = init_range;
    return c;
  }

  BaggingConfig bagging_config(const NetConfig& base) const {
    return {ensemble_size, bootstrap_fraction, base, bagging_seed(), threads};
  }

  std::set<std::string> forecastable_set() const {
    std::set<std::string> out;
    for (auto& s : text::split(forecastable, ','))
      if (!s.empty()) out.insert(s);
    return out;
  }
  std::set<std::string> forced_include_set() const {
    std::set<std::string> out;
    for (auto& s : text::split(forced_include, ','))
      if (!s.empty()) out.insert(s);
    return out;
  }

  void validate() const {
    if (source != "synthetic" && source != "csv") throw InvalidInput("source must be 'synthetic' or 'csv'");
    if (source == "csv" && csv_path.empty()) throw InvalidInput("source = csv requires csv_path");
    if (source == "synthetic") {
      if (synth_days < 1) throw InvalidInput("synth_days must be >= 1");
      curve.validate();
    }
    granularity_value();
    approach_value();
    if (horizon_hours < 1 || horizon_hours > 24) throw InvalidInput("horizon_hours must lie in [1, 24]");
    if (history_days < 1) throw InvalidInput("history_days must be >= 1");
    if (baseline_days < 1) throw InvalidInput("baseline_days must be >= 1");
    if (clusters < 1) throw InvalidInput("clusters must be >= 1");
    if (restarts < 1) throw InvalidInput("restarts must be >= 1");
    if (ensemble_size < 1) throw InvalidInput("ensemble_size must be >= 1");
    if (!(weather_noise >= 0.0)) throw InvalidInput("weather_noise must be >= 0");
  }
};

namespace detail {

struct ConfigField {
  std::string section;
  std::string key;
  std::string help;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

inline std::string fmt(double v) { return text::format_number(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(unsigned v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }
inline std::string fmt(const std::string& v) { return v; }

inline void parse_into(const std::string& key, const std::string& s, double& dst) {
  auto v = text::parse_double(s);
  if (!v) throw InvalidInput("config key '" + key + "': expected a number, got '" + s + "'");
  dst = *v;
}
inline void parse_into(const std::string& key, const std::string& s, int& dst) {
  auto v = text::parse_int(s);
  if (!v) throw InvalidInput("config key '" + key + "': expected an integer, got '" + s + "'");
  dst = static_cast<int>(*v);
}
inline void parse_into(const std::string& key, const std::string& s, unsigned& dst) {
  auto v = text::parse_int(s);
  if (!v || *v < 0) throw InvalidInput("config key '" + key + "': expected a non-negative integer, got '" + s + "'");
  dst = static_cast<unsigned>(*v);
}
inline void parse_into(const std::string& key, const std::string& s, std::uint64_t& dst) {
  std::uint64_t v = 0;
  const auto t = text::trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw InvalidInput("config key '" + key + "': expected an unsigned integer, got '" + s + "'");
  dst = v;
}
inline void parse_into(const std::string& key, const std::string& s, bool& dst) {
  const auto t = std::string(text::trim(s));
  if (t == "true" || t == "1" || t == "yes") dst = true;
  else if (t == "false" || t == "0" || t == "no") dst = false;
  else throw InvalidInput("config key '" + key + "': expected true/false, got '" + s + "'");
}
inline void parse_into(const std::string&, const std::string& s, std::string& dst) { dst = std::string(text::trim(s)); }

template <typename Member>
ConfigField field(std::string section, std::string key, std::string help, Member member) {
  return {section, key, std::move(help), [member](const PipelineConfig& c) { return fmt(member(const_cast<PipelineConfig&>(c))); },
          [member, key](PipelineConfig& c, const std::string& s) { parse_into(key, s, member(c)); }};
}

}  // namespace detail

/// Every configuration key in file order.
inline const std::vector<detail::ConfigField>& config_fields() {
  using detail::field;
  using C = PipelineConfig;
  static const std::vector<detail::ConfigField> fields = {
      field("data", "source", "synthetic | csv", [](C& c) -> auto& { return c.source; }),
      field("data", "csv_path", "input CSV when source = csv", [](C& c) -> auto& { return c.csv_path; }),
      field("data", "synth_seed", "synthetic data seed", [](C& c) -> auto& { return c.synth_seed; }),
      field("data", "synth_days", "synthetic days", [](C& c) -> auto& { return c.synth_days; }),
      field("data", "cut_in", "cut-in speed (m/s)", [](C& c) -> auto& { return c.curve.cut_in; }),
      field("data", "rated_speed", "rated speed (m/s)", [](C& c) -> auto& { return c.curve.rated_speed; }),
      field("data", "cut_out", "cut-out speed (m/s)", [](C& c) -> auto& { return c.curve.cut_out; }),
      field("data", "rated_power", "rated power (kW)", [](C& c) -> auto& { return c.curve.rated_power; }),
      field("data", "noise_std", "power noise std (kW)", [](C& c) -> auto& { return c.curve.noise_std; }),
      field("schema", "col_timestamp", "timestamp column", [](C& c) -> auto& { return c.schema.timestamp; }),
      field("schema", "col_wind_speed", "wind speed column", [](C& c) -> auto& { return c.schema.wind_speed; }),
      field("schema", "col_blade_angle", "blade angle column", [](C& c) -> auto& { return c.schema.blade_angle; }),
      field("schema", "col_ambient_temp", "ambient temperature column", [](C& c) -> auto& { return c.schema.ambient_temp; }),
      field("schema", "col_power", "power column", [](C& c) -> auto& { return c.schema.power; }),
      field("clean", "clean", "remove and refill invalid records", [](C& c) -> auto& { return c.clean; }),
      field("features", "relief_iterations", "Relief anchors (0 = all)", [](C& c) -> auto& { return c.relief_iterations; }),
      field("features", "relief_neighbors", "Relief neighbours k", [](C& c) -> auto& { return c.relief_neighbors; }),
      field("features", "relief_sigma", "Relief rank-weight width", [](C& c) -> auto& { return c.relief_sigma; }),
      field("features", "relief_threshold", "minimum Relief weight", [](C& c) -> auto& { return c.relief_threshold; }),
      field("features", "forecastable", "features known for the forecast day", [](C& c) -> auto& { return c.forecastable; }),
      field("features", "forced_include", "features kept regardless of weight", [](C& c) -> auto& { return c.forced_include; }),
      field("clustering", "clusters", "k-means clusters", [](C& c) -> auto& { return c.clusters; }),
      field("clustering", "restarts", "k-means restarts", [](C& c) -> auto& { return c.restarts; }),
      field("clustering", "kmeans_max_iter", "k-means iteration cap", [](C& c) -> auto& { return c.kmeans_max_iter; }),
      field("clustering", "min_days", "minimum similar days", [](C& c) -> auto& { return c.min_days; }),
      field("network", "hidden", "hidden units (0 = 2M+1)", [](C& c) -> auto& { return c.hidden; }),
      field("network", "learning_rate", "gradient-descent step", [](C& c) -> auto& { return c.learning_rate; }),
      field("network", "max_epochs", "training epochs cap", [](C& c) -> auto& { return c.max_epochs; }),
      field("network", "target_error", "stop when loss <= this", [](C& c) -> auto& { return c.target_error; }),
      field("network", "init_range", "uniform init half-width", [](C& c) -> auto& { return c.init_range; }),
      field("network", "hidden_sweep", "search hidden width over 5..21", [](C& c) -> auto& { return c.hidden_sweep; }),
      field("bagging", "ensemble_size", "ensemble members K", [](C& c) -> auto& { return c.ensemble_size; }),
      field("bagging", "bootstrap_fraction", "bootstrap size / training size", [](C& c) -> auto& { return c.bootstrap_fraction; }),
      field("bagging", "threads", "worker threads (results unaffected)", [](C& c) -> auto& { return c.threads; }),
      field("run", "approach", "bpnn | bpnn-clustering | bagging-bpnn-clustering", [](C& c) -> auto& { return c.approach; }),
      field("run", "granularity", "hourly | 10min", [](C& c) -> auto& { return c.granularity; }),
      field("run", "horizon_hours", "forecast hours", [](C& c) -> auto& { return c.horizon_hours; }),
      field("run", "history_days", "days before the forecast day used for clustering", [](C& c) -> auto& { return c.history_days; }),
      field("run", "baseline_days", "training window of the plain BPNN", [](C& c) -> auto& { return c.baseline_days; }),
      field("run", "forecast_day", "forecast day index (negative: from end)", [](C& c) -> auto& { return c.forecast_day; }),
      field("run", "weather_noise", "std of noise added to forecast-day weather", [](C& c) -> auto& { return c.weather_noise; }),
      field("run", "seed", "master seed for all model randomness", [](C& c) -> auto& { return c.seed; }),
      field("run", "output_dir", "run directory", [](C& c) -> auto& { return c.output_dir; }),
  };
  return fields;
}

inline void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : config_fields())
    if (f.key == key) return f.set(cfg, value);
  throw InvalidInput("unknown config key '" + key + "'");
}

inline std::string get_config_value(const PipelineConfig& cfg, const std::string& key) {
  for (const auto& f : config_fields())
    if (f.key == key) return f.get(cfg);
  throw InvalidInput("unknown config key '" + key + "'");
}

inline void write_config(std::ostream& out, const PipelineConfig& cfg) {
  std::string section;
  for (const auto& f : config_fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
}

inline std::string config_to_string(const PipelineConfig& cfg) {
  std::ostringstream s;
  write_config(s, cfg);
  return s.str();
}

/// Applies the keys of an INI document on top of `cfg`.
inline void read_config(std::istream& in, PipelineConfig& cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidInput("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      bool known = false;
      for (const auto& f : config_fields()) {
        if (f.key != key) continue;
        if (f.section != section)
          throw InvalidInput("config: key '" + key + "' belongs in section [" + f.section + "], found in [" + section + "]");
        f.set(cfg, value.get_value<std::string>());
        known = true;
      }
      if (!known) throw InvalidInput("config: unknown key '" + key + "' in section [" + section + "]");
    }
  }
}

inline PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  read_config(in, base);
  return base;
}

}  // namespace windfc
