#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "windfc/bagging.hpp"

using namespace windfc;

namespace {

Batch ramp(int n) {
  Batch b{Matrix(n, 2), Vector(n)};
  for (int i = 0; i < n; ++i) {
    b.x(i, 0) = i / static_cast<double>(n);
    b.x(i, 1) = (i % 7) / 7.0;
    b.y[i] = 0.1 + 0.6 * b.x(i, 0) + 0.2 * b.x(i, 1);
  }
  return b;
}

BaggingConfig small_config(int k) {
  BaggingConfig c;
  c.ensemble_size = k;
  c.base_config.input_dim = 2;
  c.base_config.max_epochs = 60;
  c.master_seed = 2024;
  return c;
}

}  // namespace

TEST(Bootstrap, SingleRowRepeated) {
  Batch one{Matrix::Constant(1, 2, 3.0), Vector::Constant(1, 0.4)};
  const Batch s = bootstrap_sample(one, 5, 1);
  EXPECT_EQ(s.size(), 5);
  EXPECT_TRUE((s.x.array() == 3.0).all());
  EXPECT_TRUE((s.y.array() == 0.4).all());
}

TEST(Bootstrap, SeedDeterminesIndices) {
  EXPECT_EQ(bootstrap_indices(50, 50, 9), bootstrap_indices(50, 50, 9));
  EXPECT_NE(bootstrap_indices(50, 50, 9), bootstrap_indices(50, 50, 10));
  EXPECT_THROW(bootstrap_sample(Batch{Matrix(0, 2), Vector(0)}, 3, 1), InvalidInput);
}

TEST(Bootstrap, DistinctFractionMatchesCoverageIdentity) {
  const double expected = 1.0 - std::pow(1.0 - 1.0 / 100.0, 100.0);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto idx = bootstrap_indices(100, 100, derive_seed(5, s));
    total += static_cast<double>(std::set<Eigen::Index>(idx.begin(), idx.end()).size()) / 100.0;
  }
  EXPECT_NEAR(total / 1000.0, expected, 0.02);
  EXPECT_NEAR(expected, 0.634, 0.001);
}

TEST(MemberSeeds, FixedDerivation) {
  const auto a = member_seeds(7, 3);
  EXPECT_EQ(a.member, derive_seed(7, 3));
  EXPECT_EQ(a.bootstrap, derive_seed(a.member, 0));
  EXPECT_EQ(a.init, derive_seed(a.member, 1));
  EXPECT_NE(member_seeds(7, 3).member, member_seeds(7, 4).member);
}

TEST(Ensemble, DeterministicAndThreadIndependent) {
  const Batch data = ramp(40);
  auto cfg = small_config(4);
  const auto a = train_ensemble(cfg, data);
  cfg.threads = 3;
  const auto b = train_ensemble(cfg, data);
  ASSERT_EQ(a.members.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(a.members[i].same_weights(b.members[i]));
  EXPECT_EQ(a.member_seeds, b.member_seeds);
}

TEST(Ensemble, MemberDependsOnlyOnIndex) {
  const Batch data = ramp(30);
  const auto cfg = small_config(3);
  const auto ens = train_ensemble(cfg, data);
  for (std::size_t i : {2u, 0u, 1u}) EXPECT_TRUE(train_member(cfg, data, i).same_weights(ens.members[i]));
}

TEST(Ensemble, DegenerateSingleMemberEqualsSingleNet) {
  Batch one{Matrix::Constant(1, 2, 0.3), Vector::Constant(1, 0.7)};
  auto cfg = small_config(1);
  const auto ens = train_ensemble(cfg, one);
  NetConfig net_cfg = cfg.base_config;
  net_cfg.seed = member_seeds(cfg.master_seed, 0).init;
  const NeuralNet single = train(net_cfg, one);
  const std::vector<double> probe = {0.1, 0.9};
  EXPECT_EQ(predict(ens, probe), forward(single, probe).u);
}

TEST(Ensemble, InvalidConfig) {
  auto cfg = small_config(0);
  EXPECT_THROW(train_ensemble(cfg, ramp(5)), InvalidInput);
  cfg = small_config(2);
  cfg.bootstrap_fraction = 0.0;
  EXPECT_THROW(train_ensemble(cfg, ramp(5)), InvalidInput);
}

TEST(Ensemble, DivergenceTaggedWithMember) {
  Batch bad = ramp(6);
  bad.x(0, 0) = std::nan("");
  auto cfg = small_config(2);
  cfg.bootstrap_fraction = 1.0;
  try {
    train_ensemble(cfg, bad);
    SUCCEED();  // a member may not draw the bad row
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.member(), 0);
  }
  Batch all_bad{Matrix::Constant(3, 2, std::nan("")), Vector::Constant(3, 0.5)};
  try {
    train_ensemble(cfg, all_bad);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.member(), 0);
    EXPECT_EQ(e.epoch(), 0);
  }
}

TEST(Predict, MeanOfMembers) {
  NetConfig c;
  c.input_dim = 1;
  c.hidden_dim = 1;
  BaggedEnsemble ens;
  NeuralNet a = NeuralNet::zeros(c), b = NeuralNet::zeros(c);
  a.b_out = std::log(0.2 / 0.8);  // sigmoid -> 0.2
  b.b_out = std::log(0.6 / 0.4);  // sigmoid -> 0.6
  ens.members = {a, b};
  EXPECT_NEAR(predict(ens, std::vector<double>{0.0}), 0.4, 1e-15);
  ens.members = {a, a, a};
  EXPECT_NEAR(predict(ens, std::vector<double>{0.0}), forward(a, std::vector<double>{0.0}).u, 1e-15);
  EXPECT_THROW(predict(ens, std::vector<double>{0.0, 1.0}), InvalidInput);
  EXPECT_THROW(predict(BaggedEnsemble{}, std::vector<double>{0.0}), InvalidInput);
}

TEST(Predict, RecomputedMemberByMemberAndPermutationInvariant) {
  auto cfg = small_config(5);
  cfg.base_config.weight_init_range = 2.0;
  cfg.base_config.max_epochs = 1;
  auto ens = train_ensemble(cfg, ramp(10));
  const std::vector<double> probe = {0.25, 0.75};
  double sum = 0.0;
  for (const auto& m : ens.members) sum += forward(m, probe).u;
  EXPECT_NEAR(predict(ens, probe), sum / 5.0, 1e-15);
  std::reverse(ens.members.begin(), ens.members.end());
  EXPECT_NEAR(predict(ens, probe), sum / 5.0, 1e-15);
  Matrix x(1, 2);
  x << 0.25, 0.75;
  EXPECT_NEAR(predict_batch(ens, x)[0], sum / 5.0, 1e-15);
}

TEST(Persistence, EnsembleRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "windfc_bagging_roundtrip";
  std::filesystem::remove_all(dir);
  const Batch data = ramp(20);
  const auto ens = train_ensemble(small_config(3), data);
  const Scaling s = Scaling::fit(data.x, data.y);
  save_ensemble(dir, ens, s);
  const auto loaded = load_ensemble(dir);
  ASSERT_EQ(loaded.ensemble.members.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(loaded.ensemble.members[i].same_weights(ens.members[i]));
  EXPECT_EQ(loaded.ensemble.member_seeds, ens.member_seeds);
  EXPECT_EQ(loaded.scaling, s);
  std::filesystem::remove(dir / member_file_name(2));
  EXPECT_THROW(load_ensemble(dir), InvalidInput);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_ensemble(dir), InvalidInput);
}
