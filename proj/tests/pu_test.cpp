#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "gradient_check.hpp"
#include "kgi/error.hpp"
#include "kgi/pu.hpp"
#include "pu_synthetic.hpp"

namespace kgi {
namespace {

WordVectors toy_words() {
  WordVectors wv(3);
  wv.add("play", Eigen::Vector3d(1, 0, 0));
  wv.add("song", Eigen::Vector3d(0, 2, 0));
  wv.add("book", Eigen::Vector3d(0, 0, 3));
  return wv;
}

TEST(SentenceEmbedding, SingleTokenIsNormalizedVector) {
  const auto wv = toy_words();
  const auto e = sentence_embedding("song", wv);
  EXPECT_FALSE(e.all_oov);
  EXPECT_EQ(e.vector, Eigen::Vector3d(0, 1, 0));
}

TEST(SentenceEmbedding, PermutationInvariantAndUnitNorm) {
  const auto wv = toy_words();
  const auto a = sentence_embedding("play the song book", wv);
  const auto b = sentence_embedding("book song the play", wv);
  EXPECT_LT((a.vector - b.vector).norm(), 1e-15);
  EXPECT_NEAR(a.vector.norm(), 1.0, 1e-12);
}

TEST(SentenceEmbedding, AllOovAndEmpty) {
  const auto wv = toy_words();
  const auto e = sentence_embedding("hello there", wv);
  EXPECT_TRUE(e.all_oov);
  EXPECT_TRUE(e.vector.isZero());
  try {
    sentence_embedding("  ", wv);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kEmptyUtterance);
  }
}

TEST(LogisticRegression, GradientMatchesFiniteDifferences) {
  const auto s = testing::two_gaussians(20, 20, 3, 0.5, 0.7, 1);
  std::vector<Eigen::VectorXd> x = s.labeled;
  std::vector<int> y(x.size(), 1);
  for (const auto& v : s.unlabeled) {
    x.push_back(v);
    y.push_back(0);
  }
  Eigen::VectorXd params(4);
  params << 0.3, -0.2, 0.7, 0.1;
  auto loss = [&] {
    return LogisticRegression::objective(x, y, 0.01, params.head(3),
                                         params[3], nullptr, nullptr);
  };
  Eigen::VectorXd gw;
  double gb = 0.0;
  LogisticRegression::objective(x, y, 0.01, params.head(3), params[3], &gw,
                                &gb);
  std::vector<double> analytic(gw.data(), gw.data() + 3);
  analytic.push_back(gb);
  EXPECT_LT(testing::max_gradient_error(std::span<double>(params.data(), 4),
                                        analytic, loss),
            1e-6);
}

TEST(LogisticRegression, RequiresBothClasses) {
  const std::vector<Eigen::VectorXd> x = {Eigen::Vector2d(1, 0),
                                          Eigen::Vector2d(0, 1)};
  EXPECT_THROW(LogisticRegression::fit(x, {1, 1}, {}), Error);
}

TEST(PUTrain, RecoversKnownLabelFrequency) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = testing::two_gaussians(1000, 1000, 2, 2.0, 0.7, seed);
    PUConfig cfg;
    cfg.seed = seed;
    const auto model = pu_train(s.labeled, s.unlabeled, cfg);
    EXPECT_GT(model.c(), 0.0);
    EXPECT_LE(model.c(), 1.0);
    sum += model.c();
  }
  const double mean_c = sum / 10.0;
  std::cout << "mean c-hat over 10 seeds = " << mean_c << "\n";
  EXPECT_LE(std::abs(mean_c - 0.7), 0.05);
}

TEST(PUTrain, GateAccuracyOnSeparableFixture) {
  const auto s = testing::two_gaussians(500, 500, 4, 1.5, 0.6, 3);
  PUConfig cfg;
  const auto model = pu_train(s.labeled, s.unlabeled, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < s.test_x.size(); ++i) {
    const auto p = model.predict(s.test_x[i]);
    EXPECT_GE(p.probability, 0.0);
    EXPECT_LE(p.probability, 1.0);
    correct += (p.gate == Gate::kSeen) == (s.test_y[i] == 1) ? 1 : 0;
  }
  const double acc =
      static_cast<double>(correct) / static_cast<double>(s.test_x.size());
  EXPECT_GE(acc, 0.9);
}

TEST(PUTrain, CorrectedOutputIsMonotoneInBase) {
  const auto s = testing::two_gaussians(300, 300, 2, 1.0, 0.5, 4);
  const auto model = pu_train(s.labeled, s.unlabeled, PUConfig{});
  std::vector<std::pair<double, double>> gf;
  for (const auto& x : s.test_x) {
    gf.emplace_back(model.base().predict(x), model.probability(x));
  }
  std::sort(gf.begin(), gf.end());
  for (std::size_t i = 1; i < gf.size(); ++i) {
    EXPECT_GE(gf[i].second, gf[i - 1].second);
  }
}

TEST(PUTrain, IdenticalPositivesAndUnlabeled) {
  const auto s = testing::two_gaussians(400, 0, 3, 1.0, 1.0, 5);
  const auto model = pu_train(s.labeled, s.labeled, PUConfig{});
  // g cannot tell the sets apart: it stays near the fit fold's label share
  // (one half), and the corrected output is close to 1 on the data.
  EXPECT_NEAR(model.c(), 0.5, 0.05);
  double mean_f = 0.0;
  for (const auto& x : s.labeled) mean_f += model.probability(x);
  mean_f /= static_cast<double>(s.labeled.size());
  EXPECT_GE(mean_f, 0.95);
}

TEST(PUTrain, DeterministicAndThreshold) {
  const auto s = testing::two_gaussians(200, 200, 2, 1.0, 0.7, 6);
  PUConfig cfg;
  cfg.seed = 11;
  const auto a = pu_train(s.labeled, s.unlabeled, cfg);
  const auto b = pu_train(s.labeled, s.unlabeled, cfg);
  EXPECT_EQ(a.c(), b.c());

  // base output 0.49 * c gives f = 0.49 -> unseen
  const PUModel m(LogisticRegression(Eigen::VectorXd::Zero(1), 0.0), 0.5,
                  0.5);
  EXPECT_EQ(m.predict(Eigen::VectorXd::Zero(1)).probability, 1.0);
  const double logit = std::log(0.245 / (1 - 0.245));
  const PUModel low(LogisticRegression(Eigen::VectorXd::Zero(1), logit), 0.5,
                    0.5);
  const auto p = low.predict(Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(p.probability, 0.49, 1e-12);
  EXPECT_EQ(p.gate, Gate::kUnseen);
}

TEST(PUTrain, CalibrationFailure) {
  // Labeled points are a ~0.1% share of an indistinguishable mixture, so g
  // and therefore c collapse towards zero.
  const auto s = testing::two_gaussians(20, 20000, 2, 0.0, 1.0, 7);
  PUConfig cfg;
  cfg.min_c = 0.01;
  try {
    pu_train(s.labeled, s.unlabeled, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCalibrationFailed);
  }
}

TEST(PUModel, CheckpointRoundTrip) {
  const auto s = testing::two_gaussians(100, 100, 3, 1.0, 0.7, 8);
  auto model = pu_train(s.labeled, s.unlabeled, PUConfig{});
  model.embedding_path = "vectors.txt";
  const auto path =
      (std::filesystem::temp_directory_path() / "kgi_pu.ckpt").string();
  model.save(path);
  const auto back = PUModel::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.c(), model.c());
  EXPECT_EQ(back.embedding_path, "vectors.txt");
  for (const auto& x : s.test_x) {
    EXPECT_EQ(back.probability(x), model.probability(x));
  }
}

TEST(IntentExistence, SeparableFixtureF1) {
  WordVectors wv(4);
  wv.add("play", Eigen::Vector4d(1, 0.1, 0, 0));
  wv.add("book", Eigen::Vector4d(0.9, 0, 0.2, 0));
  wv.add("find", Eigen::Vector4d(1, 0, 0, 0.1));
  wv.add("thanks", Eigen::Vector4d(-1, 0, 0.1, 0));
  wv.add("bye", Eigen::Vector4d(-0.9, 0.2, 0, 0));
  wv.add("okay", Eigen::Vector4d(-1, 0, 0, 0.2));
  const std::vector<std::string> pos = {"play music", "book a table",
                                        "find a hotel", "play that", "book it"};
  const std::vector<std::string> neg = {"thanks", "bye now", "okay thanks",
                                        "okay bye", "thanks bye"};
  const auto m = IntentExistenceModel::train(pos, neg, wv, LogisticConfig{});
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& u : {"play a song", "find book", "book play"}) {
    const auto p = m.predict(u, wv);
    EXPECT_GE(p.probability, 0.0);
    EXPECT_LE(p.probability, 1.0);
    (p.has_intent ? tp : fn)++;
  }
  for (const auto& u : {"thanks okay", "bye", "okay"}) {
    if (m.predict(u, wv).has_intent) ++fp;
  }
  const double f1 = 2.0 * static_cast<double>(tp) /
                    static_cast<double>(2 * tp + fp + fn);
  EXPECT_GE(f1, 0.9);
  EXPECT_THROW(IntentExistenceModel::train(pos, {}, wv, LogisticConfig{}),
               Error);
  const auto again = IntentExistenceModel::train(pos, neg, wv, LogisticConfig{});
  EXPECT_EQ(again.classifier().weights(), m.classifier().weights());
}

}  // namespace
}  // namespace kgi
