#pragma once

// Bootstrap-aggregated ensemble of BPNNs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfc/bpnn.hpp"
#include "windfc/error.hpp"
#include "windfc/parallel.hpp"
#include "windfc/random.hpp"

namespace windfc {

struct BaggingConfig {
  int ensemble_size = 10;
  double bootstrap_fraction = 1.0;
  NetConfig base_config;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;  // does not affect results

  void validate() const {
    if (ensemble_size < 1) throw InvalidInput("BaggingConfig: ensemble_size must be >= 1");
    if (!(bootstrap_fraction > 0.0 && bootstrap_fraction <= 1.0))
      throw InvalidInput("BaggingConfig: bootstrap_fraction must lie in (0, 1]");
    base_config.validate();
  }
};

/// Seeds of member i. Bootstrap draw and weight init use separate streams.
struct MemberSeeds {
  std::uint64_t member;
  std::uint64_t bootstrap;
  std::uint64_t init;
};

inline MemberSeeds member_seeds(std::uint64_t master_seed, std::size_t index) {
  const auto s = derive_seed(master_seed, index);
  return {s, derive_seed(s, 0), derive_seed(s, 1)};
}

/// n row indices drawn uniformly with replacement from [0, size).
inline std::vector<Eigen::Index> bootstrap_indices(Eigen::Index size, Eigen::Index n, std::uint64_t seed) {
  if (size < 1) throw InvalidInput("bootstrap_sample: empty data");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

inline Batch bootstrap_sample(const Batch& data, Eigen::Index n, std::uint64_t seed) {
  if (data.size() < 1) throw InvalidInput("bootstrap_sample: empty data");
  const auto idx = bootstrap_indices(data.size(), n, seed);
  Batch out{Matrix(n, data.x.cols()), Vector(n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    out.x.row(r) = data.x.row(idx[r]);
    out.y[r] = data.y[idx[r]];
  }
  return out;
}

struct BaggedEnsemble {
  std::vector<NeuralNet> members;
  std::vector<std::uint64_t> member_seeds;
  BaggingConfig config;

  int input_dim() const { return members.empty() ? 0 : members.front().input_dim(); }
};

/// Member `index` of the ensemble; depends only on (config, data, index).
inline NeuralNet train_member(const BaggingConfig& config, const Batch& train_set, std::size_t index) {
  const auto seeds = member_seeds(config.master_seed, index);
  const auto n = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(config.bootstrap_fraction * static_cast<double>(train_set.size()))));
  const Batch subset = bootstrap_sample(train_set, n, seeds.bootstrap);
  NetConfig cfg = config.base_config;
  cfg.seed = seeds.init;
  try {
    return train(cfg, subset);
  } catch (const DivergenceError& e) {
    throw DivergenceError("ensemble member " + std::to_string(index) + ": " + e.what(), e.epoch(),
                          static_cast<int>(index));
  }
}

inline BaggedEnsemble train_ensemble(const BaggingConfig& config, const Batch& train_set) {
  config.validate();
  if (train_set.size() < 1) throw InvalidInput("train_ensemble: empty training set");
  BaggedEnsemble ens;
  ens.config = config;
  ens.members.resize(config.ensemble_size);
  for (int i = 0; i < config.ensemble_size; ++i) ens.member_seeds.push_back(member_seeds(config.master_seed, i).member);
  parallel_for(ens.members.size(), config.threads,
               [&](std::size_t i) { ens.members[i] = train_member(config, train_set, i); });
  return ens;
}

/// Unweighted mean of member outputs, summed in member order.
inline double predict(const BaggedEnsemble& ens, std::span<const double> x) {
  if (ens.members.empty()) throw InvalidInput("predict: empty ensemble");
  double sum = 0.0;
  for (const auto& m : ens.members) sum += forward(m, x).u;
  return sum / static_cast<double>(ens.members.size());
}

inline Vector predict_batch(const BaggedEnsemble& ens, const Matrix& x) {
  if (ens.members.empty()) throw InvalidInput("predict: empty ensemble");
  Vector sum = Vector::Zero(x.rows());
  for (const auto& m : ens.members) sum += forward_batch(m, x);
  return sum / static_cast<double>(ens.members.size());
}

// ---------------------------------------------------------------------------
// Persistence: manifest.json plus one model file per member.

inline std::string member_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "member_%03zu.bin", i);
  return buf;
}

inline void save_ensemble(const std::filesystem::path& dir, const BaggedEnsemble& ens, const Scaling& scaling = {}) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "windfc-ensemble";
  manifest["version"] = 1;
  manifest["member_count"] = ens.members.size();
  manifest["input_dim"] = ens.input_dim();
  manifest["ensemble_size"] = ens.config.ensemble_size;
  manifest["bootstrap_fraction"] = ens.config.bootstrap_fraction;
  manifest["master_seed"] = ens.config.master_seed;
  manifest["member_seeds"] = ens.member_seeds;
  auto files = nlohmann::json::array();
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    save_model_file((dir / member_file_name(i)).string(), ens.members[i], scaling);
    files.push_back(member_file_name(i));
  }
  manifest["members"] = files;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("cannot write ensemble manifest in '" + dir.string() + "'");
}

struct LoadedEnsemble {
  BaggedEnsemble ensemble;
  Scaling scaling;
};

inline LoadedEnsemble load_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw InvalidInput("no ensemble manifest in '" + dir.string() + "'");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("ensemble manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "windfc-ensemble") throw InvalidInput("ensemble manifest: wrong format tag");
  LoadedEnsemble out;
  auto& ens = out.ensemble;
  const auto count = manifest.at("member_count").get<std::size_t>();
  const auto files = manifest.at("members").get<std::vector<std::string>>();
  ens.member_seeds = manifest.at("member_seeds").get<std::vector<std::uint64_t>>();
  if (files.size() != count || ens.member_seeds.size() != count)
    throw InvalidInput("ensemble manifest: member count does not match listed members");
  ens.config.ensemble_size = manifest.at("ensemble_size").get<int>();
  ens.config.bootstrap_fraction = manifest.at("bootstrap_fraction").get<double>();
  ens.config.master_seed = manifest.at("master_seed").get<std::uint64_t>();
  const int input_dim = manifest.at("input_dim").get<int>();
  for (std::size_t i = 0; i < count; ++i) {
    ModelFile mf = load_model_file((dir / files[i]).string());
    if (mf.net.input_dim() != input_dim)
      throw InvalidInput("ensemble member " + std::to_string(i) + " has input dimension " +
                         std::to_string(mf.net.input_dim()) + ", manifest says " + std::to_string(input_dim));
    if (i == 0) {
      out.scaling = mf.scaling;
      ens.config.base_config = mf.net.config;
    }
    ens.members.push_back(std::move(mf.net));
  }
  if (ens.members.empty()) throw InvalidInput("ensemble manifest lists no members");
  return out;
}

}  // namespace windfc
