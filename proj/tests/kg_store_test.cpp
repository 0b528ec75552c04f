#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kgi/error.hpp"
#include "kgi/kg_store.hpp"

namespace kgi {
namespace {

const std::string kDataDir = KGI_DATA_DIR;

RelationVocab conceptnet_schema() {
  return RelationVocab::load(kDataDir + "/conceptnet_relations.schema");
}

ConceptNormalizer normalizer() {
  return ConceptNormalizer(Lemmatizer::load(kDataDir + "/lemma_rules.txt"));
}

TripleSet parse(const std::string& text, const RelationVocab& vocab) {
  const auto norm = normalizer();
  std::istringstream in(text);
  return parse_triples(in, vocab, &norm);
}

TEST(RelationVocab, BundledSchemaHas35Relations) {
  const auto vocab = conceptnet_schema();
  ASSERT_EQ(vocab.size(), 35u);
  EXPECT_EQ(vocab.name(0), "RelatedTo");
  EXPECT_EQ(vocab.name(34), "Self");
  std::size_t symmetric = 0;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    symmetric += vocab.is_symmetric(r) ? 1 : 0;
  }
  EXPECT_EQ(symmetric, 8u);
  for (const char* name : {"IsA", "RelatedTo", "Synonym", "Antonym",
                           "DistinctFrom", "LocatedNear", "SimilarTo",
                           "EtymologicallyRelatedTo"}) {
    EXPECT_TRUE(vocab.is_symmetric(vocab.require(name))) << name;
  }
  ASSERT_EQ(vocab.inverse_pairs().size(), 1u);
  EXPECT_EQ(vocab.inverse_of(vocab.require("PartOf")), vocab.require("HasA"));
  EXPECT_EQ(vocab.inverse_of(vocab.require("HasA")), vocab.require("PartOf"));
}

TEST(RelationVocab, SchemaRoundTrip) {
  const auto vocab = conceptnet_schema();
  std::stringstream buf;
  vocab.write(buf);
  EXPECT_EQ(RelationVocab::parse(buf), vocab);
}

TEST(RelationVocab, RejectsInvalidSchemas) {
  auto expect_schema_error = [](const std::string& text) {
    std::istringstream in(text);
    try {
      RelationVocab::parse(in);
      FAIL() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchema) << text;
    }
  };
  expect_schema_error("IsA\nIsA\n");
  expect_schema_error("PartOf [inv:HasA]\n");
  expect_schema_error("PartOf [inv:HasA] [sym]\nHasA\n");
  expect_schema_error("A [inv:B]\nB\nC [inv:A]\n");
  expect_schema_error("A [inv:A]\n");
}

TEST(ParseTriples, SingleTriple) {
  const auto ts = parse("table\tAtLocation\trestaurant\n", conceptnet_schema());
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts.entities(), (std::vector<std::string>{"restaurant", "table"}));
  EXPECT_EQ(ts.triples()[0],
            (Triple{"table", "AtLocation", "restaurant"}));
}

TEST(ParseTriples, EmptyStreamAndDuplicates) {
  EXPECT_TRUE(parse("", conceptnet_schema()).empty());
  const auto ts = parse("# comment\nTable\tAtLocation\trestaurant\n"
                        "table\tAtLocation\tRestaurants\n\n",
                        conceptnet_schema());
  EXPECT_EQ(ts.size(), 1u);
}

TEST(ParseTriples, NormalizesConcepts) {
  const auto ts = parse("feeling hungry\tCausesDesire\teating\n",
                        conceptnet_schema());
  EXPECT_EQ(ts.triples()[0], (Triple{"feel hungry", "CausesDesire", "eat"}));
}

TEST(ParseTriples, MalformedLineReportsLineNumber) {
  try {
    parse("a\tIsA\tb\na\tIsA\n", conceptnet_schema());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse("a\tIsA\t   \n", conceptnet_schema());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ParseTriples, UnknownRelationIsSchemaError) {
  try {
    parse("a\tLikes\tb\n", conceptnet_schema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
}

TEST(ParseTriples, SerializeParseRoundTripOnRandomSets) {
  const auto vocab = conceptnet_schema();
  const std::vector<std::string> words = {"movie", "film", "subtitle", "cat",
                                          "run", "table", "feel hungry",
                                          "one way", "ticket", "bus"};
  std::mt19937 rng(99);
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
  std::uniform_int_distribution<std::size_t> rel(0, vocab.size() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Triple> triples;
    for (int i = 0; i < trial; ++i) {
      triples.push_back({words[word(rng)], vocab.name(rel(rng)),
                         words[word(rng)]});
    }
    const TripleSet ts(triples);
    std::stringstream buf;
    write_triples(buf, ts);
    const auto norm = normalizer();
    EXPECT_EQ(parse_triples(buf, vocab, &norm), ts);
  }
}

TEST(ParseTriples, EntityOrderIsStable) {
  const auto vocab = conceptnet_schema();
  const auto a = parse("zebra\tIsA\tanimal\ncat\tIsA\tanimal\n", vocab);
  const auto b = parse("cat\tIsA\tanimal\nzebra\tIsA\tanimal\n", vocab);
  EXPECT_EQ(a.entities(), b.entities());
  EXPECT_EQ(a.entity_index("cat"), 1u);
}

TEST(SchemaClosure, SymmetricReversalMissing) {
  const auto vocab = conceptnet_schema();
  const auto report =
      schema_closure_check(parse("movie\tIsA\tfilm\n", vocab), vocab);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].implied, (Triple{"film", "IsA", "movie"}));
}

TEST(SchemaClosure, InverseMissing) {
  const auto vocab = conceptnet_schema();
  const auto report =
      schema_closure_check(parse("movie\tHasA\tsubtitles\n", vocab), vocab);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].implied, (Triple{"subtitle", "PartOf", "movie"}));
  EXPECT_EQ(report[0].source, (Triple{"movie", "HasA", "subtitle"}));
}

TEST(SchemaClosure, ClosedSetIsClean) {
  const auto vocab = conceptnet_schema();
  const auto ts = parse(
      "movie\tIsA\tfilm\nfilm\tIsA\tmovie\nmovie\tHasA\tsubtitle\n"
      "subtitle\tPartOf\tmovie\ntable\tAtLocation\trestaurant\n",
      vocab);
  EXPECT_TRUE(schema_closure_check(ts, vocab).empty());
}

TEST(KnowledgeStore, SaveLoadRoundTrip) {
  KnowledgeStore store{conceptnet_schema(),
                       parse("movie\tIsA\tfilm\nfeeling hungry\tCausesDesire"
                             "\teat\n",
                             conceptnet_schema())};
  const auto path =
      std::filesystem::temp_directory_path() / "kgi_store_roundtrip.tsv";
  store.save(path.string());
  const auto loaded = KnowledgeStore::load(path.string());
  EXPECT_EQ(loaded.vocab, store.vocab);
  EXPECT_EQ(loaded.triples, store.triples);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace kgi
