#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "windfc/kmeans.hpp"

using namespace windfc;

namespace {

Matrix blobs(std::uint64_t seed, int per_cluster, double sigma) {
  const double centers[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Matrix m(4 * per_cluster, 2);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < per_cluster; ++i) {
      m(c * per_cluster + i, 0) = centers[c][0] + g(rng);
      m(c * per_cluster + i, 1) = centers[c][1] + g(rng);
    }
  return m;
}

void expect_converged_invariants(const Matrix& points, const KMeansModel& m) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int label = m.assignments[i];
    const double own = (points.row(i) - m.centroids.row(label)).squaredNorm();
    for (int c = 0; c < m.k; ++c) EXPECT_LE(own, (points.row(i) - m.centroids.row(c)).squaredNorm() + 1e-12);
  }
  for (int c = 0; c < m.k; ++c) {
    const auto members = m.members(c);
    if (members.empty()) continue;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
    for (int i : members) mean += points.row(i);
    mean /= static_cast<double>(members.size());
    EXPECT_LE((mean - m.centroids.row(c)).cwiseAbs().maxCoeff(), 1e-9);
  }
  for (std::size_t t = 1; t < m.inertia_history.size(); ++t)
    EXPECT_LE(m.inertia_history[t], m.inertia_history[t - 1] + 1e-12);
}

}  // namespace

TEST(KMeans, SeparatedPairs) {
  Matrix p(4, 2);
  p << 0, 0, 0, 1, 10, 10, 10, 11;
  const auto m = kmeans(p, 2);
  EXPECT_EQ(m.assignments[0], m.assignments[1]);
  EXPECT_EQ(m.assignments[2], m.assignments[3]);
  EXPECT_NE(m.assignments[0], m.assignments[2]);
  const int a = m.assignments[0], b = m.assignments[2];
  EXPECT_DOUBLE_EQ(m.centroids(a, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.centroids(b, 0), 10.0);
  EXPECT_DOUBLE_EQ(m.centroids(b, 1), 10.5);
  EXPECT_DOUBLE_EQ(m.inertia, 1.0);
}

TEST(KMeans, SingleClusterIsGlobalMean) {
  const Matrix p = blobs(1, 10, 0.2);
  const auto m = kmeans(p, 1);
  EXPECT_LE((m.centroids.row(0) - p.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KMeans, EveryPointOwnCluster) {
  Matrix p(5, 2);
  p << 0, 0, 1, 3, 4, 4, 7, 1, 2, 9;
  const auto m = kmeans(p, 5);
  EXPECT_EQ(m.inertia, 0.0);
  std::set<int> labels(m.assignments.begin(), m.assignments.end());
  EXPECT_EQ(labels.size(), 5u);
}

TEST(KMeans, InvalidArguments) {
  EXPECT_THROW(kmeans(Matrix(0, 2), 1), InvalidInput);
  EXPECT_THROW(kmeans(Matrix::Random(3, 2), 4), InvalidInput);
  EXPECT_THROW(kmeans(Matrix::Random(3, 2), 0), InvalidInput);
}

TEST(KMeans, ConvergedInvariantsOnBlobs) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix p = blobs(s, 30, 0.15);
    KMeansOptions o;
    o.seed = s;
    expect_converged_invariants(p, kmeans(p, 4, o));
    expect_converged_invariants(p, kmeans(p, 7, o));
  }
}

TEST(KMeans, DuplicatePointsLeaveNoGap) {
  Matrix p = Matrix::Zero(6, 2);
  p.row(5) << 1.0, 1.0;
  const auto m = kmeans(p, 3);
  EXPECT_EQ(m.assignments.size(), 6u);
  EXPECT_NEAR(m.inertia, 0.0, 1e-12);
}

TEST(KMeans, DeterministicAndThreadIndependent) {
  const Matrix p = blobs(3, 25, 0.3);
  KMeansOptions o;
  o.seed = 42;
  const auto a = kmeans(p, 4, o);
  o.threads = 4;
  const auto b = kmeans(p, 4, o);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.restart, b.restart);
}

TEST(KMeans, PartitionInvariantUnderCommonRescaling) {
  const Matrix p = blobs(8, 20, 0.25);
  KMeansOptions o;
  o.seed = 8;
  const auto a = kmeans(p, 4, o);
  const auto b = kmeans(p * 37.5, 4, o);
  EXPECT_EQ(a.assignments, b.assignments);
}

TEST(KMeans, ReturnedInertiaNotAboveFirstIteration) {
  const Matrix p = blobs(2, 40, 0.4);
  const auto m = kmeans(p, 4);
  ASSERT_FALSE(m.inertia_history.empty());
  EXPECT_LE(m.inertia, m.inertia_history.front());
}
