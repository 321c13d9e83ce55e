#include <cmath>

#include <gtest/gtest.h>

#include "windfc/similar_days.hpp"

using namespace windfc;

namespace {

const std::vector<double> kS1A = {1, 0, 1, 0, 1, 0};
const std::vector<double> kS1B = {0, 1, 0, 1, 0, 1};
const std::vector<double> kS2X = {1, 0, 1};
const std::vector<double> kS2Y = {0, 1, 0};

DayUnit make_day(int index, const std::vector<double>& s1, const std::vector<double>& s2, double jitter) {
  DayUnit d;
  d.day_index = index;
  d.s1 = {s1[0] + jitter, s1[1] + jitter, s1[2] - jitter, s1[3] + jitter, s1[4] - jitter, s1[5] + jitter};
  d.s2 = {s2[0] + jitter, s2[1] - jitter, s2[2] + jitter};
  return d;
}

// Days 0..19; S1 pattern A on [a_lo, a_hi], S2 pattern X on [x_lo, x_hi].
std::vector<DayUnit> fixture(int a_lo, int a_hi, int x_lo, int x_hi) {
  std::vector<DayUnit> days;
  for (int i = 0; i < 20; ++i) {
    const bool a = i >= a_lo && i <= a_hi;
    const bool x = i >= x_lo && i <= x_hi;
    days.push_back(make_day(i, a ? kS1A : kS1B, x ? kS2X : kS2Y, 0.01 * ((i * 7) % 5)));
  }
  return days;
}

ForecastReference reference() {
  return {{kS1A[0], kS1A[1], kS1A[2], kS1A[3], kS1A[4], kS1A[5]}, {kS2X[0], kS2X[1], kS2X[2]}};
}

}  // namespace

TEST(Pearson, HandComputedValue) {
  const std::vector<double> x = {1, 2, 3}, y = {2, 4, 7};
  // Hand-evaluated: cov = 2.5, sx = 1, sy = sqrt(6.3333...).
  EXPECT_NEAR(pearson(x, y), 2.5 / std::sqrt(19.0 / 3.0), 1e-15);
  EXPECT_NEAR(pearson(x, y), 0.99339926, 1e-8);
}

TEST(Pearson, SelfAndNegated) {
  const std::vector<double> v = {0.3, -1.2, 4.4, 2.0, 0.0};
  std::vector<double> neg;
  for (double x : v) neg.push_back(-x);
  EXPECT_NEAR(pearson(v, v), 1.0, 1e-12);
  EXPECT_NEAR(pearson(v, neg), -1.0, 1e-12);
}

TEST(Pearson, SymmetricAndAffineInvariant) {
  const std::vector<double> x = {1.5, 2.25, -3.0, 8.0, 0.5}, y = {0.2, 0.1, -0.7, 2.2, 0.4};
  std::vector<double> xa;
  for (double v : x) xa.push_back(3.7 * v - 12.0);
  EXPECT_NEAR(pearson(x, y), pearson(y, x), 1e-12);
  EXPECT_NEAR(pearson(x, y), pearson(xa, y), 1e-12);
}

TEST(Pearson, Errors) {
  EXPECT_THROW(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InvalidInput);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InvalidInput);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), InvalidInput);
  EXPECT_FALSE(try_pearson(std::vector<double>{2, 2}, std::vector<double>{1, 2}).has_value());
}

TEST(SimilarDays, IntersectionOfForcedClusters) {
  const auto days = fixture(1, 10, 6, 15);
  SimilarDayOptions o;
  o.clusters = 2;
  const auto sel = select_training_days(days, reference(), o);
  EXPECT_FALSE(sel.fallback_used);
  EXPECT_EQ(sel.training_days, (std::vector<int>{6, 7, 8, 9, 10}));
  EXPECT_EQ(sel.choice1.members, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_GT(sel.pearson1, 0.9);
  EXPECT_GT(sel.pearson2, 0.9);
}

TEST(SimilarDays, EmptyIntersectionFallsBack) {
  const auto days = fixture(1, 5, 10, 14);
  SimilarDayOptions o;
  o.clusters = 2;
  o.min_days = 5;
  const auto sel = select_training_days(days, reference(), o);
  EXPECT_TRUE(sel.fallback_used);
  ASSERT_EQ(sel.training_days.size(), 5u);
  for (int d : sel.training_days) EXPECT_TRUE((d >= 1 && d <= 5) || (d >= 10 && d <= 14));
  EXPECT_TRUE(std::is_sorted(sel.training_days.begin(), sel.training_days.end()));
}

TEST(SimilarDays, IdenticalDaysSelectAll) {
  std::vector<DayUnit> days;
  for (int i = 0; i < 8; ++i) days.push_back(make_day(i, kS1A, kS2X, 0.0));
  const auto sel = select_training_days(days, days[0]);
  EXPECT_EQ(sel.training_days.size(), 8u);
  EXPECT_EQ(sel.choice1.method, "euclidean");
}

TEST(SimilarDays, TooManyClustersNamesConstraint) {
  const auto days = fixture(1, 10, 6, 15);
  SimilarDayOptions o;
  o.clusters = 25;
  try {
    select_training_days(days, reference(), o);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("clusters"), std::string::npos);
  }
}

TEST(SimilarDays, DeterministicAndNonEmpty) {
  std::vector<DayUnit> days;
  Rng rng = make_rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> s1(6), s2(3);
    for (auto& v : s1) v = u(rng);
    for (auto& v : s2) v = u(rng);
    days.push_back(make_day(i, s1, s2, 0.0));
  }
  SimilarDayOptions o;
  o.seed = 77;
  const auto a = select_training_days(days, days[3], o);
  const auto b = select_training_days(days, days[3], o);
  EXPECT_EQ(a.training_days, b.training_days);
  EXPECT_FALSE(a.training_days.empty());
  if (!a.fallback_used) {
    for (int d : a.training_days) {
      EXPECT_TRUE(std::binary_search(a.choice1.members.begin(), a.choice1.members.end(), d));
      EXPECT_TRUE(std::binary_search(a.choice2.members.begin(), a.choice2.members.end(), d));
    }
  }
}

TEST(SimilarDays, ReferenceUsesForecastWeatherWhenGiven) {
  DayUnit prior = make_day(0, kS1A, kS2X, 0.0);
  DayUnit weather = make_day(1, kS1B, kS2Y, 0.0);
  const auto with = make_forecast_reference(prior, &weather);
  EXPECT_EQ(with.s1, weather.s1);
  EXPECT_EQ(with.s2, prior.s2);
  const auto without = make_forecast_reference(prior);
  EXPECT_EQ(without.s1, prior.s1);
}
