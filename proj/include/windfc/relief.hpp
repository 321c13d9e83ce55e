#pragma once

// RReliefF feature weighting for a continuous target, and selection of the
// network's input features from the weights.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfc/error.hpp"
#include "windfc/preprocess.hpp"
#include "windfc/random.hpp"

namespace windfc {

struct ReliefParams {
  int iterations = 0;   // anchors m; 0 or >= n uses every sample once, in order
  int neighbors = 10;   // k
  double sigma = 20.0;  // rank-weight width
  std::uint64_t seed = 1;
  double threshold = 0.01;
};

struct FeatureWeights {
  std::vector<std::string> names;
  std::vector<double> weights;
  double threshold = 0.01;
  bool constant_target = false;  // weights undefined, reported as zero

  /// Names with weight > threshold, in input order.
  std::vector<std::string> above_threshold() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (weights[i] > threshold) out.push_back(names[i]);
    return out;
  }
};

inline void to_json(nlohmann::json& j, const FeatureWeights& w) {
  auto entries = nlohmann::json::array();
  for (std::size_t i = 0; i < w.names.size(); ++i)
    entries.push_back({{"feature", w.names[i]}, {"weight", w.weights[i]}});
  j = nlohmann::json{{"weights", entries},
                     {"threshold", w.threshold},
                     {"selected", w.above_threshold()},
                     {"constant_target", w.constant_target}};
}

/// RReliefF weights of each column of `samples` for predicting `target`.
///
/// Features and target are min-max scaled internally so attribute and target
/// differences lie in [0, 1]. For each anchor, the k nearest samples under
/// Manhattan distance (ties broken by lower index) contribute with weight
/// exp(-(rank/sigma)^2), normalized over the k neighbors. Final weights are
///   W[A] = N_dC&dA / N_dC - (N_dA - N_dC&dA) / (m - N_dC).
inline FeatureWeights relief_weights(const Matrix& samples, const Vector& target,
                                     const std::vector<std::string>& names, const ReliefParams& params = {}) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto d = static_cast<std::size_t>(samples.cols());
  if (n < 2) throw InvalidInput("relief_weights: need at least 2 samples");
  if (static_cast<std::size_t>(target.size()) != n) throw InvalidInput("relief_weights: target length mismatch");
  if (names.size() != d) throw InvalidInput("relief_weights: feature name count mismatch");
  if (params.neighbors < 1) throw InvalidInput("relief_weights: neighbors must be >= 1");
  if (!(params.sigma > 0.0)) throw InvalidInput("relief_weights: sigma must be > 0");

  FeatureWeights out;
  out.names = names;
  out.weights.assign(d, 0.0);
  out.threshold = params.threshold;

  const double t_min = target.minCoeff(), t_max = target.maxCoeff();
  if (t_max == t_min) {
    out.constant_target = true;
    return out;
  }
  const Matrix x = apply_norm(fit_norm(samples), samples);
  const Vector y = (target.array() - t_min) / (t_max - t_min);

  std::vector<std::size_t> anchors(n);
  std::iota(anchors.begin(), anchors.end(), 0);
  if (params.iterations > 0 && static_cast<std::size_t>(params.iterations) < n) {
    Rng rng = make_rng(params.seed);
    std::shuffle(anchors.begin(), anchors.end(), rng);
    anchors.resize(params.iterations);
  }
  const std::size_t k = std::min<std::size_t>(params.neighbors, n - 1);

  std::vector<double> rank_weight(k);
  for (std::size_t r = 0; r < k; ++r) {
    const double z = static_cast<double>(r + 1) / params.sigma;
    rank_weight[r] = std::exp(-z * z);
  }
  const double rank_total = std::accumulate(rank_weight.begin(), rank_weight.end(), 0.0);
  for (auto& w : rank_weight) w /= rank_total;

  double n_dc = 0.0;
  std::vector<double> n_da(d, 0.0), n_dcda(d, 0.0);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (auto i : anchors) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back((x.row(i) - x.row(j)).cwiseAbs().sum(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t r = 0; r < k; ++r) {
      const auto j = dist[r].second;
      const double w = rank_weight[r];
      const double diff_c = std::abs(y[i] - y[j]);
      n_dc += diff_c * w;
      for (std::size_t a = 0; a < d; ++a) {
        const double diff_a = std::abs(x(i, a) - x(j, a)) * w;
        n_da[a] += diff_a;
        n_dcda[a] += diff_c * diff_a;
      }
    }
  }
  const double m = static_cast<double>(anchors.size());
  for (std::size_t a = 0; a < d; ++a) {
    const double hit = n_dc > 0.0 ? n_dcda[a] / n_dc : 0.0;
    const double miss = (m - n_dc) > 0.0 ? (n_da[a] - n_dcda[a]) / (m - n_dc) : 0.0;
    out.weights[a] = hit - miss;
  }
  return out;
}

inline constexpr const char* kBladeAngle = "blade_angle";
inline constexpr const char* kBladeSin = "blade_sin";
inline constexpr const char* kBladeCos = "blade_cos";

/// Network input features: weight above threshold (or force-included), and
/// known for the forecast day. Ordered by descending weight; blade angle is
/// expanded into its sine and cosine components.
inline std::vector<std::string> select_features(const FeatureWeights& weights,
                                                const std::set<std::string>& forecastable,
                                                const std::set<std::string>& forced_include = {}) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < weights.names.size(); ++i) {
    const auto& name = weights.names[i];
    const bool keep = weights.weights[i] > weights.threshold || forced_include.contains(name);
    if (keep && forecastable.contains(name)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights.weights[a] > weights.weights[b]; });
  std::vector<std::string> out;
  for (auto i : order) {
    if (weights.names[i] == kBladeAngle) {
      out.emplace_back(kBladeSin);
      out.emplace_back(kBladeCos);
    } else {
      out.push_back(weights.names[i]);
    }
  }
  if (out.empty())
    throw InvalidInput("select_features: no feature is both above the weight threshold and forecastable");
  return out;
}

}  // namespace windfc
