#pragma once

// Similar-day selection: cluster historical days by meteorological (S1) and
// power (S2) signatures, pick the cluster of each clustering that correlates
// best with the forecast reference, and intersect the two member sets.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfc/dataset.hpp"
#include "windfc/error.hpp"
#include "windfc/kmeans.hpp"
#include "windfc/preprocess.hpp"

namespace windfc {

/// Pearson correlation coefficient, clamped to [-1, 1].
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson: length mismatch");
  if (x.size() < 2) throw InvalidInput("pearson: need at least 2 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidInput("pearson: constant vector has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline std::optional<double> try_pearson(std::span<const double> x, std::span<const double> y) {
  try {
    return pearson(x, y);
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

/// Signatures standing in for the forecast day: S1 from the forecast day's
/// meteorological inputs (or the prior day's), S2 from the prior day.
struct ForecastReference {
  Signature1 s1;
  Signature2 s2;
};

inline ForecastReference make_forecast_reference(const DayUnit& prior_day, const DayUnit* forecast_weather = nullptr) {
  return {forecast_weather ? forecast_weather->s1 : prior_day.s1, prior_day.s2};
}

struct SimilarDayOptions {
  int clusters = 3;
  int restarts = 10;
  int max_iter = 100;
  std::uint64_t seed = 1;
  int min_days = 5;
  unsigned threads = 1;
};

/// Which cluster of one clustering was chosen, and why.
struct ClusterChoice {
  int cluster_id = -1;
  double score = 0.0;
  std::string method = "pearson";     // "euclidean" when some correlation is undefined
  std::vector<double> scores;         // per cluster; NaN for empty clusters
  std::vector<int> members;           // day_index values
};

struct SimilarDaySelection {
  int cluster1_id = -1;
  int cluster2_id = -1;
  double pearson1 = 0.0;
  double pearson2 = 0.0;
  std::vector<int> training_days;  // day_index values, ascending
  bool fallback_used = false;
  ClusterChoice choice1, choice2;
};

inline void to_json(nlohmann::json& j, const ClusterChoice& c) {
  auto scores = nlohmann::json::array();
  for (double s : c.scores) scores.push_back(std::isnan(s) ? nlohmann::json(nullptr) : nlohmann::json(s));
  j = nlohmann::json{{"cluster_id", c.cluster_id}, {"score", c.score}, {"method", c.method},
                     {"scores", scores}, {"members", c.members}};
}

inline void to_json(nlohmann::json& j, const SimilarDaySelection& s) {
  j = nlohmann::json{{"cluster1_id", s.cluster1_id},   {"cluster2_id", s.cluster2_id},
                     {"pearson1", s.pearson1},         {"pearson2", s.pearson2},
                     {"training_days", s.training_days}, {"fallback_used", s.fallback_used},
                     {"s1_clustering", s.choice1},     {"s2_clustering", s.choice2}};
}

namespace detail {

inline std::vector<double> row_of(const Matrix& m, Eigen::Index r) {
  std::vector<double> v(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[c] = m(r, c);
  return v;
}

inline ClusterChoice choose_cluster(const KMeansModel& model, const std::vector<double>& ref,
                                    std::span<const DayUnit> days) {
  ClusterChoice choice;
  choice.scores.assign(model.k, std::nan(""));
  std::vector<int> nonempty;
  for (int c = 0; c < model.k; ++c)
    if (model.cluster_size(c) > 0) nonempty.push_back(c);

  bool all_defined = true;
  for (int c : nonempty) {
    const auto centroid = row_of(model.centroids, c);
    if (auto p = try_pearson(ref, centroid)) {
      choice.scores[c] = *p;
    } else {
      all_defined = false;
    }
  }
  if (!all_defined) {
    // Correlation is undefined for flat vectors; rank by closeness instead.
    choice.method = "euclidean";
    for (int c : nonempty) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) d2 += (ref[i] - model.centroids(c, i)) * (ref[i] - model.centroids(c, i));
      choice.scores[c] = -std::sqrt(d2);
    }
  }
  for (int c : nonempty)
    if (choice.cluster_id < 0 || choice.scores[c] > choice.score) {
      choice.cluster_id = c;
      choice.score = choice.scores[c];
    }
  for (int i : model.members(choice.cluster_id)) choice.members.push_back(days[i].day_index);
  std::sort(choice.members.begin(), choice.members.end());
  return choice;
}

}  // namespace detail

/// Chooses training days for one forecast. Signatures are min-max scaled over
/// the historical days before clustering and correlation.
inline SimilarDaySelection select_training_days(std::span<const DayUnit> days, const ForecastReference& ref,
                                                const SimilarDayOptions& opts = {}) {
  if (days.empty()) throw InvalidInput("select_training_days: no historical days");
  if (opts.clusters < 1 || static_cast<std::size_t>(opts.clusters) > days.size())
    throw InvalidInput("select_training_days: clusters = " + std::to_string(opts.clusters) +
                       " exceeds the number of historical days (" + std::to_string(days.size()) + ")");

  const auto n = static_cast<Eigen::Index>(days.size());
  Matrix s1(n, 6), s2(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = days[i].s1.to_vector();
    const auto b = days[i].s2.to_vector();
    for (int c = 0; c < 6; ++c) s1(i, c) = a[c];
    for (int c = 0; c < 3; ++c) s2(i, c) = b[c];
  }
  const NormStats n1 = fit_norm(s1), n2 = fit_norm(s2);
  const Matrix p1 = apply_norm(n1, s1), p2 = apply_norm(n2, s2);

  auto scaled_ref = [](const NormStats& st, const std::vector<double>& v) {
    Matrix m(1, static_cast<Eigen::Index>(v.size()));
    for (std::size_t c = 0; c < v.size(); ++c) m(0, c) = v[c];
    return detail::row_of(apply_norm(st, m), 0);
  };
  const auto r1 = scaled_ref(n1, ref.s1.to_vector());
  const auto r2 = scaled_ref(n2, ref.s2.to_vector());

  KMeansOptions ko{opts.max_iter, 1e-9, opts.restarts, opts.seed, opts.threads};
  const KMeansModel m1 = kmeans(p1, opts.clusters, ko);
  ko.seed = derive_seed(opts.seed, 0x5332);
  const KMeansModel m2 = kmeans(p2, opts.clusters, ko);

  SimilarDaySelection sel;
  sel.choice1 = detail::choose_cluster(m1, r1, days);
  sel.choice2 = detail::choose_cluster(m2, r2, days);
  sel.cluster1_id = sel.choice1.cluster_id;
  sel.cluster2_id = sel.choice2.cluster_id;
  sel.pearson1 = sel.choice1.score;
  sel.pearson2 = sel.choice2.score;

  std::set_intersection(sel.choice1.members.begin(), sel.choice1.members.end(), sel.choice2.members.begin(),
                        sel.choice2.members.end(), std::back_inserter(sel.training_days));
  const std::size_t minimum = static_cast<std::size_t>(std::max(1, opts.min_days));
  if (sel.training_days.size() >= minimum) return sel;

  // Fallback: rank the union by per-day similarity to the reference.
  sel.fallback_used = true;
  std::vector<int> pool;
  std::set_union(sel.choice1.members.begin(), sel.choice1.members.end(), sel.choice2.members.begin(),
                 sel.choice2.members.end(), std::back_inserter(pool));
  std::vector<std::pair<double, int>> ranked;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::binary_search(pool.begin(), pool.end(), days[i].day_index)) continue;
    const double a = try_pearson(r1, detail::row_of(p1, i)).value_or(0.0);
    const double b = try_pearson(r2, detail::row_of(p2, i)).value_or(0.0);
    ranked.emplace_back(0.5 * (a + b), days[i].day_index);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  ranked.resize(std::min(ranked.size(), minimum));
  sel.training_days.clear();
  for (const auto& [score, day] : ranked) sel.training_days.push_back(day);
  std::sort(sel.training_days.begin(), sel.training_days.end());
  return sel;
}

inline SimilarDaySelection select_training_days(std::span<const DayUnit> days, const DayUnit& forecast_ref,
                                                const SimilarDayOptions& opts = {}) {
  return select_training_days(days, ForecastReference{forecast_ref.s1, forecast_ref.s2}, opts);
}

}  // namespace windfc
