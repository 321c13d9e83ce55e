// windfc: command-line front end for the forecasting toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "windfc/windfc.hpp"

namespace fs = std::filesystem;
using namespace windfc;

namespace {

/// Collects --config plus one flag per config key; applied as flag > file > default.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    for (const auto& f : config_fields()) {
      auto* opt = app->add_option("--" + f.key, values[f.key], f.help);
      opt->group("[" + f.section + "]");
    }
  }

  PipelineConfig resolve(CLI::App* app) const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    for (const auto& f : config_fields())
      if (app->count("--" + f.key) > 0) f.set(cfg, values.at(f.key));
    cfg.validate();
    return cfg;
  }
};

int cmd_synth(const PipelineConfig& cfg, const std::string& out_path, std::string manifest_path) {
  cfg.validate();
  if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
  Series s = synth_generate(cfg.synth_seed, cfg.synth_days, cfg.curve);
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + out_path + "'");
    write_csv(out, s, cfg.schema);
  }
  nlohmann::ordered_json m;
  m["generator"] = "windfc-synth";
  m["synth_seed"] = cfg.synth_seed;
  m["synth_days"] = cfg.synth_days;
  m["cut_in"] = cfg.curve.cut_in;
  m["rated_speed"] = cfg.curve.rated_speed;
  m["cut_out"] = cfg.curve.cut_out;
  m["rated_power"] = cfg.curve.rated_power;
  m["noise_std"] = cfg.curve.noise_std;
  m["rows"] = s.records.size();
  std::ofstream out(manifest_path, std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw Error("cannot write '" + manifest_path + "'");
  std::cout << "wrote " << s.records.size() << " records to " << out_path << " (manifest " << manifest_path << ")\n";
  return 0;
}

PipelineConfig apply_manifest(PipelineConfig cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest '" + path + "'");
  const auto m = nlohmann::json::parse(in);
  cfg.synth_seed = m.at("synth_seed").get<std::uint64_t>();
  cfg.synth_days = m.at("synth_days").get<int>();
  cfg.curve.cut_in = m.at("cut_in").get<double>();
  cfg.curve.rated_speed = m.at("rated_speed").get<double>();
  cfg.curve.cut_out = m.at("cut_out").get<double>();
  cfg.curve.rated_power = m.at("rated_power").get<double>();
  cfg.curve.noise_std = m.at("noise_std").get<double>();
  return cfg;
}

int cmd_pipeline(const PipelineConfig& cfg) {
  const PipelineRun run = run_pipeline(cfg);
  write_run_dir(cfg.output_dir, cfg, run);
  const auto& r = run.result.report;
  std::printf("%s: RMSE %.3f kW, MAE %.3f kW over %zu steps; training days %zu; run directory %s\n",
              r.approach_name.c_str(), r.rmse, r.mae, r.n, run.result.training_days.size(), cfg.output_dir.c_str());
  return 0;
}

int cmd_compare(const PipelineConfig& cfg) {
  const CompareRun run = run_compare(cfg);
  write_compare_dir(cfg.output_dir, cfg, run);
  std::cout << format_table(run.comparison);
  return 0;
}

std::vector<double> read_column(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("'" + path + "' is empty");
  const auto header = text::split(line, ',');
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInput("'" + path + "' has no column '" + name + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    const auto v = col < fields.size() ? text::parse_double(fields[col]) : std::nullopt;
    if (!v) throw InvalidInput(path + ":" + std::to_string(line_no) + ": column '" + name + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

int cmd_eval(const std::string& path, const std::string& actual_col, const std::string& predicted_col, bool json) {
  const auto actual = read_column(path, actual_col);
  const auto predicted = read_column(path, predicted_col);
  const EvalReport r = EvalReport::evaluate(predicted_col, actual, predicted, false);
  if (json) {
    std::cout << nlohmann::json(r).dump(2) << '\n';
  } else {
    std::printf("n %zu\nrmse_kw %s\nmae_kw %s\n", r.n, text::format_number(r.rmse).c_str(),
                text::format_number(r.mae).c_str());
  }
  return 0;
}

void describe_net(const NeuralNet& net, const Scaling& s) {
  const auto& c = net.config;
  std::printf("  input %d, hidden %d, lr %s, max_epochs %d, seed %llu\n", net.input_dim(), net.hidden_dim(),
              text::format_number(c.learning_rate).c_str(), c.max_epochs, static_cast<unsigned long long>(c.seed));
  if (!net.train_curve.empty())
    std::printf("  epochs %zu, loss %s -> %s\n", net.train_curve.size(), text::format_number(net.train_curve.front()).c_str(),
                text::format_number(net.train_curve.back()).c_str());
  if (s.target.columns() == 1)
    std::printf("  target range [%s, %s] kW\n", text::format_number(s.target.mins()[0]).c_str(),
                text::format_number(s.target.maxs()[0]).c_str());
}

int cmd_inspect(const std::string& path) {
  if (fs::is_directory(path)) {
    const LoadedEnsemble e = load_ensemble(path);
    std::printf("ensemble of %zu members, master seed %llu, bootstrap fraction %s\n", e.ensemble.members.size(),
                static_cast<unsigned long long>(e.ensemble.config.master_seed),
                text::format_number(e.ensemble.config.bootstrap_fraction).c_str());
    for (std::size_t i = 0; i < e.ensemble.members.size(); ++i) {
      std::printf("member %zu\n", i);
      describe_net(e.ensemble.members[i], e.scaling);
    }
  } else {
    const ModelFile m = load_model_file(path);
    std::printf("network\n");
    describe_net(m.net, m.scaling);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-term wind power forecasting toolkit"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "write a synthetic SCADA dataset and its manifest");
  ConfigFlags synth_flags;
  synth_flags.attach(synth);
  std::string synth_out = "synthetic.csv", synth_manifest, from_manifest;
  synth->add_option("--out", synth_out, "output CSV path");
  synth->add_option("--manifest", synth_manifest, "manifest path (default <out>.manifest.json)");
  synth->add_option("--from-manifest", from_manifest, "regenerate the dataset described by a manifest")
      ->check(CLI::ExistingFile);

  auto* pipeline = app.add_subcommand("pipeline", "run one forecast and write a run directory");
  ConfigFlags pipeline_flags;
  pipeline_flags.attach(pipeline);

  auto* compare = app.add_subcommand("compare", "compare plain BPNN, BPNN with clustering and bagging");
  ConfigFlags compare_flags;
  compare_flags.attach(compare);

  auto* eval = app.add_subcommand("eval", "RMSE and MAE between two CSV columns");
  std::string eval_csv, actual_col = "actual_kw", predicted_col = "predicted_kw";
  bool eval_json = false;
  eval->add_option("csv", eval_csv, "CSV file")->required()->check(CLI::ExistingFile);
  eval->add_option("--actual", actual_col, "column of observed values");
  eval->add_option("--predicted", predicted_col, "column of predictions");
  eval->add_flag("--json", eval_json, "print the report as JSON");

  auto* inspect = app.add_subcommand("inspect-model", "describe a model file or ensemble directory");
  std::string model_path;
  inspect->add_option("path", model_path, "model file or ensemble directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      PipelineConfig cfg = synth_flags.resolve(synth);
      if (!from_manifest.empty()) cfg = apply_manifest(cfg, from_manifest);
      return cmd_synth(cfg, synth_out, synth_manifest);
    }
    if (pipeline->parsed()) return cmd_pipeline(pipeline_flags.resolve(pipeline));
    if (compare->parsed()) return cmd_compare(compare_flags.resolve(compare));
    if (eval->parsed()) return cmd_eval(eval_csv, actual_col, predicted_col, eval_json);
    if (inspect->parsed()) return cmd_inspect(model_path);
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
