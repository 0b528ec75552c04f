#include <algorithm>
#include <map>
#include <thread>

#include <gtest/gtest.h>

#include "gradient_check.hpp"
#include "kgi/error.hpp"
#include "kgi/rmg.hpp"

namespace kgi {
namespace {

const std::string kDataDir = KGI_DATA_DIR;

const ConceptNormalizer& normalizer() {
  static const ConceptNormalizer n(
      Lemmatizer::load(kDataDir + "/lemma_rules.txt"));
  return n;
}

/// Table-driven scorer: explicit probabilities per (head, relation, tail),
/// everything else `fallback`.
class TableScorer : public LinkScorer {
 public:
  TableScorer(std::vector<std::string> entities, std::size_t relations,
              double fallback)
      : entities_(std::move(entities)),
        relations_(relations),
        fallback_(fallback) {}

  void set(const std::string& h, std::size_t r, const std::string& t,
           double p) {
    table_[{*entity_id(h), r, *entity_id(t)}] = p;
  }

  std::size_t relation_count() const override { return relations_; }
  std::optional<std::size_t> entity_id(std::string_view c) const override {
    const auto it = std::find(entities_.begin(), entities_.end(), c);
    if (it == entities_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - entities_.begin());
  }
  double probability(std::size_t h, std::size_t r,
                     std::size_t t) const override {
    ++calls;
    const auto it = table_.find({h, r, t});
    return it == table_.end() ? fallback_ : it->second;
  }

  mutable std::size_t calls = 0;

 private:
  std::vector<std::string> entities_;
  std::size_t relations_;
  double fallback_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> table_;
};

/// Dense random probabilities over a fixed entity list.
class RandomScorer : public LinkScorer {
 public:
  RandomScorer(std::vector<std::string> entities, std::size_t relations,
               std::uint64_t seed)
      : entities_(std::move(entities)), relations_(relations) {
    Rng rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const auto n = entities_.size();
    p_.resize(n * relations * n);
    for (auto& v : p_) v = d(rng);
  }
  std::size_t relation_count() const override { return relations_; }
  std::optional<std::size_t> entity_id(std::string_view c) const override {
    const auto it = std::find(entities_.begin(), entities_.end(), c);
    if (it == entities_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - entities_.begin());
  }
  double probability(std::size_t h, std::size_t r,
                     std::size_t t) const override {
    const auto n = entities_.size();
    return p_[(h * relations_ + r) * n + t];
  }
  double& at(std::size_t h, std::size_t r, std::size_t t) {
    const auto n = entities_.size();
    return p_[(h * relations_ + r) * n + t];
  }

 private:
  std::vector<std::string> entities_;
  std::size_t relations_;
  std::vector<double> p_;
};

PhraseSet phrases_of(std::vector<std::string> p) { return PhraseSet{p}; }

TEST(Ngrams, EnumerationExample) {
  const auto g = ngrams({"a", "b", "c"}, 2, normalizer());
  EXPECT_EQ(g.phrases,
            (std::vector<std::string>{"a", "b", "c", "a b", "b c"}));
}

TEST(Ngrams, SingleToken) {
  EXPECT_EQ(ngrams({"hungry"}, 4, normalizer()).phrases,
            std::vector<std::string>{"hungry"});
}

TEST(Ngrams, CountingIdentity) {
  for (std::size_t u = 4; u <= 12; ++u) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < u; ++i) {
      tokens.push_back("w" + std::string(1, static_cast<char>('a' + i)));
    }
    std::size_t expected = 0;
    for (std::size_t n = 1; n <= 4; ++n) expected += u - n + 1;
    EXPECT_EQ(ngrams(tokens, 4, normalizer()).size(), expected);
  }
}

TEST(Ngrams, NormalizedAndDeduplicated) {
  const auto g = ngrams({"i", "am", "feeling", "hungry", "hungry"}, 4,
                        normalizer());
  EXPECT_NE(std::find(g.phrases.begin(), g.phrases.end(), "feel hungry"),
            g.phrases.end());
  EXPECT_EQ(std::count(g.phrases.begin(), g.phrases.end(), "hungry"), 1);
  std::set<std::string> unique(g.phrases.begin(), g.phrases.end());
  EXPECT_EQ(unique.size(), g.size());
}

TEST(Ngrams, Errors) {
  try {
    ngrams({}, 4, normalizer());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyUtterance);
  }
  EXPECT_THROW(ngrams({"a"}, 0, normalizer()), Error);
  try {
    utterance_phrases(" ?! ", 4, normalizer());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyUtterance);
  }
}

TEST(Rm, ConstantStub) {
  TableScorer lp({"find", "hungry"}, 35, 0.7);
  const auto v = rm("find", phrases_of({"hungry"}), Direction::kOutgoing, lp);
  ASSERT_EQ(v.size(), 35u);
  for (double x : v) EXPECT_EQ(x, 0.7);
}

TEST(Rm, UnknownConceptAndPhraseFallBack) {
  TableScorer lp({"find", "hungry"}, 3, 0.1);
  const auto unknown = rm("teleport", phrases_of({"hungry"}),
                          Direction::kOutgoing, lp);
  EXPECT_EQ(unknown, std::vector<double>(3, kOutOfVocabularyProbability));
  const auto mixed =
      rm("find", phrases_of({"hungry", "zzz"}), Direction::kOutgoing, lp);
  EXPECT_EQ(mixed, std::vector<double>(3, kOutOfVocabularyProbability));
  const auto known = rm("find", phrases_of({"hungry"}), Direction::kOutgoing,
                        lp);
  EXPECT_EQ(known, std::vector<double>(3, 0.1));
}

/// Naive oracle: loop relation, then phrase, calling the scorer directly.
std::vector<double> brute_rm(const std::string& c,
                             const std::vector<std::string>& phrases,
                             Direction d, const LinkScorer& lp) {
  std::vector<double> out;
  for (std::size_t r = 0; r < lp.relation_count(); ++r) {
    double best = -1.0;
    for (const auto& g : phrases) {
      const auto ci = lp.entity_id(c);
      const auto gi = lp.entity_id(g);
      double p = 0.5;
      if (!ci) {
        p = 0.5;
      } else if (gi) {
        p = d == Direction::kOutgoing ? lp.probability(*ci, r, *gi)
                                      : lp.probability(*gi, r, *ci);
      }
      best = std::max(best, p);
    }
    out.push_back(best);
  }
  return out;
}

std::vector<std::string> toy_entities() {
  return {"find", "search", "restaurant", "one way", "flight", "hungry",
          "eat",  "food",   "ticket",     "cheap",   "fly",    "seat"};
}

TEST(RelationshipMetaFeatures, MatchesQuadrupleLoopOracle) {
  const std::vector<std::string> utt = {"hungry", "eat", "food", "zzz",
                                        "cheap"};
  const Intent single{"FindRestaurant", "Find", {"Restaurant"}};
  const Intent compound{"SearchOneWayFlight", "Search", {"OneWay", "Flight"}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomScorer lp(toy_entities(), 7, seed);
    for (const auto* intent : {&single, &compound}) {
      const auto e = relationship_meta_features(phrases_of(utt), *intent, lp,
                                                normalizer());
      ASSERT_EQ(e.size(), 28);
      const auto action = normalizer().normalize(intent->action);
      std::vector<std::string> objects;
      for (const auto& p : intent->object_parts) {
        objects.push_back(intent->object_parts.size() == 1
                              ? normalizer().normalize(p)
                              : (p == "OneWay" ? "one way" : "flight"));
      }
      const auto a_out = brute_rm(action, utt, Direction::kOutgoing, lp);
      const auto a_in = brute_rm(action, utt, Direction::kIncoming, lp);
      for (std::size_t r = 0; r < 7; ++r) {
        double o_out = 0.0;
        double o_in = 0.0;
        for (const auto& o : objects) {
          o_out += brute_rm(o, utt, Direction::kOutgoing, lp)[r];
          o_in += brute_rm(o, utt, Direction::kIncoming, lp)[r];
        }
        o_out /= static_cast<double>(objects.size());
        o_in /= static_cast<double>(objects.size());
        const auto ri = static_cast<Eigen::Index>(r);
        EXPECT_EQ(e[ri], a_out[r]);
        EXPECT_EQ(e[7 + ri], o_out);
        EXPECT_EQ(e[14 + ri], a_in[r]);
        EXPECT_EQ(e[21 + ri], o_in);
      }
    }
  }
}

TEST(RelationshipMetaFeatures, CompoundObjectIsMeanOfParts) {
  RandomScorer lp(toy_entities(), 5, 3);
  const auto utt = phrases_of({"cheap", "ticket", "fly"});
  const Intent compound{"SearchOneWayFlight", "Search", {"OneWay", "Flight"}};
  const auto e = relationship_meta_features(utt, compound, lp, normalizer());
  const auto a = rm("one way", utt, Direction::kOutgoing, lp);
  const auto b = rm("flight", utt, Direction::kOutgoing, lp);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_DOUBLE_EQ(e[5 + static_cast<Eigen::Index>(r)], (a[r] + b[r]) / 2);
  }
}

TEST(RelationshipMetaFeatures, DirectionMattersForAsymmetricLp) {
  TableScorer lp({"find", "restaurant", "table"}, 1, 0.2);
  lp.set("table", 0, "restaurant", 0.9);
  const Intent intent{"FindRestaurant", "Find", {"Restaurant"}};
  const auto e =
      relationship_meta_features(phrases_of({"table"}), intent, lp,
                                 normalizer());
  EXPECT_EQ(e[1], 0.2);  // restaurant -> table
  EXPECT_EQ(e[3], 0.9);  // table -> restaurant
  EXPECT_NE(e[1], e[3]);
}

TEST(RelationshipMetaFeatures, LengthIsFourTimesRelations) {
  TableScorer lp({"find", "restaurant"}, 35, 0.3);
  const Intent intent{"FindRestaurant", "Find", {"Restaurant"}};
  const auto e = relationship_meta_features(phrases_of({"food"}), intent, lp,
                                            normalizer());
  EXPECT_EQ(e.size(), 140);
  EXPECT_EQ(MetaFeatureLayout{35}.size(), 140u);
}

TEST(RelationshipMetaFeatures, PhraseOrderInvariantAndBounded) {
  RandomScorer lp(toy_entities(), 4, 8);
  std::vector<std::string> utt = {"hungry", "eat", "food", "cheap", "seat"};
  const Intent intent{"FindRestaurant", "Find", {"Restaurant"}};
  const auto base =
      relationship_meta_features(phrases_of(utt), intent, lp, normalizer());
  EXPECT_TRUE((base.array() >= 0.0).all() && (base.array() <= 1.0).all());
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(utt.begin(), utt.end(), rng);
    EXPECT_EQ(
        relationship_meta_features(phrases_of(utt), intent, lp, normalizer()),
        base);
  }
}

TEST(RelationshipMetaFeatures, MonotoneInLpProbabilities) {
  const std::vector<std::string> utt = {"hungry", "eat", "food"};
  const Intent intent{"SearchOneWayFlight", "Search", {"OneWay", "Flight"}};
  Rng rng(4);
  std::uniform_int_distribution<std::size_t> ent(0, 11);
  std::uniform_int_distribution<std::size_t> rel(0, 3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomScorer lp(toy_entities(), 4, seed);
    const auto before =
        relationship_meta_features(phrases_of(utt), intent, lp, normalizer());
    auto& cell = lp.at(ent(rng), rel(rng), ent(rng));
    cell = std::min(1.0, cell + 0.3);
    const auto after =
        relationship_meta_features(phrases_of(utt), intent, lp, normalizer());
    EXPECT_TRUE((after.array() >= before.array()).all());
  }
}

TEST(MemoizedScorer, SameValuesFewerCallsAndThreadSafe) {
  TableScorer inner(toy_entities(), 3, 0.4);
  inner.set("find", 1, "food", 0.8);
  MemoizedScorer memo(inner);
  const Intent intent{"FindRestaurant", "Find", {"Restaurant"}};
  const auto utt = phrases_of({"food", "eat"});
  const auto direct = relationship_meta_features(utt, intent, inner,
                                                 normalizer());
  inner.calls = 0;
  EXPECT_EQ(relationship_meta_features(utt, intent, memo, normalizer()),
            direct);
  const auto first_calls = inner.calls;
  EXPECT_EQ(relationship_meta_features(utt, intent, memo, normalizer()),
            direct);
  EXPECT_EQ(inner.calls, first_calls);
  EXPECT_EQ(memo.cache_size(), first_calls);

  RandomScorer dense(toy_entities(), 5, 2);
  MemoizedScorer shared(dense);
  std::vector<std::thread> pool;
  std::atomic<int> mismatches = 0;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&] {
      for (std::size_t h = 0; h < 12; ++h) {
        for (std::size_t r = 0; r < 5; ++r) {
          for (std::size_t t = 0; t < 12; ++t) {
            if (shared.probability(h, r, t) != dense.probability(h, r, t)) {
              ++mismatches;
            }
          }
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(mismatches.load(), 0);
  EXPECT_EQ(shared.cache_size(), 12u * 5u * 12u);
}

TEST(RmgProjection, ZeroWeightsGiveHalf) {
  ParamStore store;
  const RmgProjection proj(store, 140, 64);
  const auto y = proj.project(store, Eigen::VectorXd::Constant(140, 0.3));
  ASSERT_EQ(y.size(), 64);
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], 0.5);
}

TEST(RmgProjection, DimensionMismatch) {
  ParamStore store;
  const RmgProjection proj(store, 8, 4);
  try {
    proj.project(store, Eigen::VectorXd::Zero(9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
}

TEST(RmgProjection, GradientMatchesFiniteDifferences) {
  ParamStore store;
  const RmgProjection proj(store, 12, 5);
  Rng rng(6);
  proj.init(store, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(12);
  for (Eigen::Index i = 0; i < 12; ++i) x[i] = u(rng);
  Eigen::VectorXd target(5);
  for (Eigen::Index i = 0; i < 5; ++i) target[i] = u(rng);
  auto loss = [&] {
    return 0.5 * (proj.project(store, x) - target).squaredNorm();
  };
  store.zero_grad();
  const auto y = proj.project(store, x);
  const Eigen::VectorXd dx = proj.backward(store, x, y, y - target);
  auto& v = store.values();
  EXPECT_LT(testing::max_gradient_error(
                std::span<double>(v.data(), store.size()),
                std::span<const double>(store.grads().data(), store.size()),
                loss),
            1e-4);
  std::vector<double> dx_vec(dx.data(), dx.data() + dx.size());
  EXPECT_LT(testing::max_gradient_error(std::span<double>(x.data(), 12),
                                        dx_vec, loss),
            1e-4);
}

}  // namespace
}  // namespace kgi
