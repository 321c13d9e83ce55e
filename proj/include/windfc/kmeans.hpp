#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "windfc/error.hpp"
#include "windfc/parallel.hpp"
#include "windfc/preprocess.hpp"
#include "windfc/random.hpp"

namespace windfc {

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-9;   // stop once no centroid moves farther than this
  int restarts = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct KMeansModel {
  int k = 0;
  Matrix centroids;               // k x dim
  std::vector<int> assignments;   // point index -> cluster id
  int iterations_run = 0;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int restart = 0;                      // index of the winning restart
  std::vector<double> inertia_history;  // after each iteration of that restart

  std::vector<int> members(int cluster) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == cluster) out.push_back(static_cast<int>(i));
    return out;
  }
  std::size_t cluster_size(int cluster) const {
    return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), cluster));
  }
};

namespace detail {

inline int nearest_centroid(const Matrix& points, Eigen::Index i, const Matrix& centroids, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (points.row(i) - centroids.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

inline double inertia_of(const Matrix& points, const Matrix& centroids, const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) total += (points.row(i) - centroids.row(labels[i])).squaredNorm();
  return total;
}

// One seeded Lloyd run from k distinct randomly chosen points.
inline KMeansModel lloyd_run(const Matrix& points, int k, const KMeansOptions& opts, std::uint64_t seed) {
  const auto n = points.rows();
  Rng rng = make_rng(seed);
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);

  KMeansModel m;
  m.k = k;
  m.seed = seed;
  m.centroids.resize(k, points.cols());
  for (int c = 0; c < k; ++c) m.centroids.row(c) = points.row(idx[c]);

  std::vector<int> labels(n, -1), prev;
  std::vector<double> d2(n);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    prev = labels;
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = nearest_centroid(points, i, m.centroids, &d2[i]);

    // Reseed each empty cluster at the point farthest from its centroid,
    // taken from a cluster that keeps at least one other member.
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index far = -1;
      double far_d = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[labels[i]] > 1 && d2[i] > far_d) {
          far_d = d2[i];
          far = i;
        }
      }
      if (far < 0) continue;  // every point coincides with its centroid
      --counts[labels[far]];
      labels[far] = c;
      counts[c] = 1;
      d2[far] = 0.0;
    }

    Matrix next = Matrix::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(labels[i]) += points.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0)
        next.row(c) /= static_cast<double>(counts[c]);
      else
        next.row(c) = m.centroids.row(c);
    }
    const double movement = (next - m.centroids).rowwise().norm().maxCoeff();
    m.centroids = std::move(next);
    m.iterations_run = iter;
    m.inertia_history.push_back(inertia_of(points, m.centroids, labels));
    if (labels == prev || movement < opts.tol) break;
  }
  m.assignments = std::move(labels);
  m.inertia = m.inertia_history.back();
  return m;
}

}  // namespace detail

/// Lloyd's k-means with `opts.restarts` independently seeded random
/// initializations; returns the lowest-inertia run (ties: lowest restart
/// index). Rows of `points` are the observations.
inline KMeansModel kmeans(const Matrix& points, int k, const KMeansOptions& opts = {}) {
  if (points.rows() == 0) throw InvalidInput("kmeans: empty input");
  if (k < 1) throw InvalidInput("kmeans: k must be >= 1");
  if (k > points.rows())
    throw InvalidInput("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" +
                       std::to_string(points.rows()) + ")");
  if (opts.max_iter < 1 || opts.restarts < 1) throw InvalidInput("kmeans: max_iter and restarts must be >= 1");

  std::vector<KMeansModel> runs(opts.restarts);
  parallel_for(runs.size(), opts.threads, [&](std::size_t r) {
    runs[r] = detail::lloyd_run(points, k, opts, derive_seed(opts.seed, r));
    runs[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  return std::move(runs[best]);
}

}  // namespace windfc
