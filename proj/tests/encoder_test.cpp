#include <sstream>

#include <gtest/gtest.h>

#include "gradient_check.hpp"
#include "kgi/encoder.hpp"
#include "kgi/error.hpp"

namespace kgi {
namespace {

const std::string kDataDir = KGI_DATA_DIR;

std::shared_ptr<WordVectors> random_vectors(std::size_t dim,
                                            std::uint64_t seed) {
  auto wv = std::make_shared<WordVectors>(dim);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* w : {"find", "hotel", "i", "want", "to", "play", "this",
                        "song", "cheap", "room"}) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = u(rng);
    wv->add(w, v);
  }
  return wv;
}

std::vector<TaggedToken> sentence(std::initializer_list<const char*> words) {
  std::vector<TaggedToken> out;
  std::size_t k = 0;
  for (const char* w : words) {
    out.push_back({w, static_cast<PosTag>(k++ % kPosTagCount)});
  }
  return out;
}

TEST(WordVectors, ParseLookupAndOov) {
  std::istringstream in("3 2\nfind 0.5 -1\nHotel 2 3e-1\n");
  const auto wv = WordVectors::parse(in);
  EXPECT_EQ(wv.dim(), 2u);
  EXPECT_EQ(wv.size(), 2u);
  EXPECT_EQ(wv.lookup("find"), Eigen::Vector2d(0.5, -1));
  EXPECT_EQ(wv.lookup("HOTEL"), Eigen::Vector2d(2, 0.3));
  EXPECT_EQ(wv.lookup("zzz"), Eigen::Vector2d::Zero());
  EXPECT_FALSE(wv.find("zzz"));
}

TEST(WordVectors, RoundTripAndErrors) {
  const auto wv = random_vectors(5, 1);
  std::stringstream buf;
  wv->write(buf);
  const auto back = WordVectors::parse(buf);
  EXPECT_EQ(back.lookup("song"), wv->lookup("song"));

  std::istringstream ragged("a 1 2\nb 1\n");
  try {
    WordVectors::parse(ragged);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad("a 1 x\n");
  EXPECT_THROW(WordVectors::parse(bad), ParseError);
}

TEST(PosTagger, BundledLexiconAndRules) {
  const auto tagger = PosTagger::load(kDataDir + "/pos_lexicon.txt");
  EXPECT_EQ(tagger.tag("find"), PosTag::kVerb);
  EXPECT_EQ(tagger.tag("the"), PosTag::kOther);
  EXPECT_EQ(tagger.tag("hungry"), PosTag::kAdj);
  EXPECT_EQ(tagger.tag("restaurant"), PosTag::kNoun);
  EXPECT_EQ(tagger.tag("booking"), PosTag::kVerb);
  EXPECT_EQ(tagger.tag("quickly"), PosTag::kOther);
  EXPECT_EQ(tagger.tag("42"), PosTag::kOther);
}

TEST(PosTagger, UnknownTagRejected) {
  std::istringstream in("run VRB\n");
  try {
    PosTagger::parse(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTagVocabulary);
  }
}

TEST(TokenEmbedder, ConcatenationShapeAndLookup) {
  ParamStore store;
  const TokenEmbedder emb(store, "emb", random_vectors(8, 2), 4);
  Rng rng(1);
  emb.init(store, rng);
  const auto v = emb.embed(store, {"hotel", PosTag::kNoun});
  ASSERT_EQ(v.size(), 12);
  EXPECT_EQ(v.head(8), emb.words().lookup("hotel"));
  const auto oov1 = emb.embed(store, {"qwerty", PosTag::kVerb});
  const auto oov2 = emb.embed(store, {"qwerty", PosTag::kVerb});
  EXPECT_EQ(oov1, oov2);
  EXPECT_TRUE(oov1.head(8).isZero());
  try {
    emb.embed(store, {"hotel", static_cast<PosTag>(9)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTagVocabulary);
  }
}

TEST(SequenceEncoder, ShapesAndEmptyInput) {
  ParamStore store;
  EncoderConfig cfg{3, 5, 2};
  const SequenceEncoder enc(store, "utt", random_vectors(6, 3), cfg);
  Rng rng(2);
  enc.init(store, rng);
  EXPECT_EQ(enc.encode(store, sentence({"song"})).size(), 10);
  EXPECT_EQ(enc.encode(store, sentence({"i", "want", "to", "play", "this",
                                        "song"}))
                .size(),
            10);
  try {
    enc.encode(store, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyUtterance);
  }
}

TEST(SequenceEncoder, ForgetBiasInitializedToOne) {
  ParamStore store;
  const SequenceEncoder enc(store, "utt", random_vectors(4, 3),
                            EncoderConfig{2, 3, 2});
  Rng rng(2);
  enc.init(store, rng);
  const auto& lstm = enc.lstm();
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t d = 0; d < 2; ++d) {
      const auto b = store.value(lstm.bias(l, d));
      EXPECT_TRUE(b.block(0, 0, 3, 1).isZero());
      EXPECT_TRUE(b.block(3, 0, 3, 1).isOnes());
      EXPECT_TRUE(b.block(6, 0, 6, 1).isZero());
      EXPECT_LE(store.value(lstm.input_weights(l, d)).cwiseAbs().maxCoeff(),
                0.08);
    }
  }
}

/// Copies forward-direction parameters into the backward direction. From
/// the second layer on, the input columns are swapped between the two
/// halves so the backward cell sees [bw ; fw] where the forward one saw
/// [fw ; bw].
void mirror(ParamStore& store, const BiLstm& lstm) {
  const auto H = static_cast<Eigen::Index>(lstm.hidden());
  for (std::size_t l = 0; l < lstm.layers(); ++l) {
    Eigen::MatrixXd w = store.value(lstm.input_weights(l, 0));
    if (l > 0) {
      Eigen::MatrixXd swapped(w.rows(), w.cols());
      swapped << w.rightCols(H), w.leftCols(H);
      w = swapped;
    }
    store.value(lstm.input_weights(l, 1)) = w;
    store.value(lstm.recurrent_weights(l, 1)) =
        store.value(lstm.recurrent_weights(l, 0));
    store.value(lstm.bias(l, 1)) = store.value(lstm.bias(l, 0));
  }
}

TEST(SequenceEncoder, ReversalSwapsHalvesUnderMirroredParameters) {
  for (std::size_t layers : {1u, 2u, 3u}) {
    ParamStore store;
    const SequenceEncoder enc(store, "utt", random_vectors(6, 4),
                              EncoderConfig{3, 4, layers});
    Rng rng(layers);
    enc.init(store, rng);
    // Larger weights so the check is not trivially near zero.
    store.values() *= 10.0;
    mirror(store, enc.lstm());
    auto seq = sentence({"i", "want", "to", "play", "this", "song"});
    const auto out = enc.encode(store, seq);
    std::reverse(seq.begin(), seq.end());
    const auto rev = enc.encode(store, seq);
    EXPECT_LT((rev.head(4) - out.tail(4)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((rev.tail(4) - out.head(4)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT((out.head(4) - out.tail(4)).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(SequenceEncoder, BpttMatchesFiniteDifferences) {
  for (std::size_t layers : {1u, 2u}) {
    ParamStore store;
    const SequenceEncoder enc(store, "utt", random_vectors(4, 5),
                              EncoderConfig{3, 3, layers});
    Rng rng(10 + layers);
    enc.init(store, rng);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (Eigen::Index i = 0; i < store.values().size(); ++i) {
      store.values()[i] += u(rng);
    }
    const auto seq = sentence({"find", "cheap", "hotel", "room", "zzz"});
    Eigen::VectorXd target(6);
    for (auto& x : target) x = u(rng);
    auto loss = [&] {
      return 0.5 * (enc.encode(store, seq) - target).squaredNorm();
    };
    store.zero_grad();
    SequenceEncoder::Cache cache;
    const auto y = enc.encode(store, seq, &cache);
    enc.backward(store, cache, y - target);
    EXPECT_LT(testing::max_gradient_error(
                  std::span<double>(store.values().data(), store.size()),
                  std::span<const double>(store.grads().data(), store.size()),
                  loss),
              1e-4)
        << layers << " layers";
  }
}

TEST(SequenceEncoder, WordVectorsStayFrozen) {
  ParamStore store;
  auto words = random_vectors(4, 6);
  const auto before = words->lookup("hotel");
  const SequenceEncoder enc(store, "utt", words, EncoderConfig{2, 3, 1});
  // Only the POS table and LSTM weights are trainable.
  EXPECT_EQ(store.size(), 2u * kPosTagCount + 2u * (12u * 6u + 12u * 3u + 12u));
  Rng rng(1);
  enc.init(store, rng);
  SequenceEncoder::Cache cache;
  const auto y = enc.encode(store, sentence({"find", "hotel"}), &cache);
  enc.backward(store, cache, y);
  EXPECT_EQ(words->lookup("hotel"), before);
}

TEST(EncodeIntent, LabelTokensAndDeterminism) {
  const auto tagger = PosTagger::load(kDataDir + "/pos_lexicon.txt");
  const Intent intent{"FindHotel", "Find", {"Hotel"}};
  const auto toks = intent_tokens(intent, tagger);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].word, "find");
  EXPECT_EQ(toks[1].word, "hotel");
  EXPECT_EQ(toks[0].tag, PosTag::kVerb);

  ParamStore store;
  const SequenceEncoder enc(store, "int", random_vectors(4, 7),
                            EncoderConfig{2, 3, 2});
  Rng rng(3);
  enc.init(store, rng);
  const auto a = enc.encode(store, toks);
  EXPECT_EQ(a.size(), 6);
  EXPECT_EQ(a, enc.encode(store, intent_tokens(intent, tagger)));
}

}  // namespace
}  // namespace kgi
