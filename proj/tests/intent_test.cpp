#include <sstream>

#include <gtest/gtest.h>

#include "kgi/error.hpp"
#include "kgi/intent.hpp"

namespace kgi {
namespace {

const std::string kDataDir = KGI_DATA_DIR;

const CompoundLexicon& lexicon() {
  static const auto lex = CompoundLexicon::load(kDataDir + "/compounds.txt");
  return lex;
}

const ConceptNormalizer& normalizer() {
  static const ConceptNormalizer n(
      Lemmatizer::load(kDataDir + "/lemma_rules.txt"));
  return n;
}

Intent parse(std::string_view label) { return parse_intent(label, lexicon()); }

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(ParseIntent, ActionObjectExamples) {
  const auto a = parse("FindRestaurant");
  EXPECT_EQ(a.action, "Find");
  EXPECT_EQ(a.object_parts, std::vector<std::string>{"Restaurant"});

  const auto b = parse("RateBook");
  EXPECT_EQ(b.action, "Rate");
  EXPECT_EQ(b.object_parts, std::vector<std::string>{"Book"});
  EXPECT_EQ(b.label_tokens(), (std::vector<std::string>{"Rate", "Book"}));

  const auto c = parse("SearchOneWayFlight");
  EXPECT_EQ(c.action, "Search");
  EXPECT_EQ(c.object_parts, (std::vector<std::string>{"OneWay", "Flight"}));
  EXPECT_EQ(c.object(), "OneWayFlight");
}

TEST(ParseIntent, WithoutLexiconEverySegmentIsAPart) {
  const auto c = parse_intent("SearchOneWayFlight", CompoundLexicon{});
  EXPECT_EQ(c.object_parts,
            (std::vector<std::string>{"One", "Way", "Flight"}));
}

TEST(ParseIntent, LongestCompoundWins) {
  const CompoundLexicon lex({"OneWay", "OneWayFlight"});
  const auto c = parse_intent("SearchOneWayFlight", lex);
  EXPECT_EQ(c.object_parts, std::vector<std::string>{"OneWayFlight"});
}

TEST(ParseIntent, ConceptsAreNormalized) {
  const auto c = parse("SearchOneWayFlights");
  EXPECT_EQ(c.action_concept(normalizer()), "search");
  EXPECT_EQ(c.object_concepts(normalizer()),
            (std::vector<std::string>{"one way", "flight"}));
  EXPECT_EQ(parse("PlayMusic").action_concept(normalizer()), "play");
}

TEST(ParseIntent, RejectsUnparseableLabels) {
  for (const char* bad : {"", "Find", "findRestaurant", "Find Restaurant",
                          "Find_Restaurant", "find"}) {
    expect_code(ErrorCode::kUnparseableIntent, [&] { parse(bad); });
  }
}

TEST(ParseIntent, RawReconstructsFromParts) {
  for (const char* label :
       {"FindRestaurant", "SearchOneWayFlight", "GetATMLocation",
        "BookRoundTripFlight", "AddToPlaylist", "PlayMusic2"}) {
    const auto i = parse(label);
    EXPECT_EQ(i.action + i.object(), label);
    EXPECT_FALSE(i.action.empty());
    for (const auto& p : i.object_parts) EXPECT_FALSE(p.empty());
    EXPECT_EQ(compose_intent(i.action, i.object_parts), i);
  }
}

IntentCatalog restaurant_catalog() {
  std::vector<Intent> seen;
  for (const char* l : {"FindRestaurant", "ReserveRestaurant", "FindHotel",
                        "RentMovies"}) {
    seen.push_back(parse(l));
  }
  return IntentCatalog(std::move(seen), {parse("BookFlight")});
}

TEST(IntentCatalog, DisjointAndUnique) {
  const auto cat = restaurant_catalog();
  EXPECT_EQ(cat.seen_count(), 4u);
  EXPECT_EQ(cat.total_count(), 5u);
  EXPECT_TRUE(cat.is_seen("FindHotel"));
  EXPECT_TRUE(cat.is_unseen("BookFlight"));
  EXPECT_EQ(cat.find("Nope"), nullptr);
  expect_code(ErrorCode::kConfiguration, [] {
    IntentCatalog({parse("FindHotel")}, {parse("FindHotel")});
  });
  expect_code(ErrorCode::kConfiguration, [] {
    IntentCatalog({parse("FindHotel"), parse("FindHotel")}, {});
  });
}

TEST(CorruptIntent, ModesReplaceTheRightParts) {
  const auto cat = restaurant_catalog();
  const auto src = parse("FindRestaurant");
  Rng rng(3);
  bool saw_reserve = false;
  bool saw_hotel = false;
  for (int i = 0; i < 200; ++i) {
    const auto a = corrupt_intent(src, cat, CorruptionMode::kAction, rng);
    EXPECT_NE(a.action, src.action);
    EXPECT_EQ(a.object_parts, src.object_parts);
    saw_reserve |= a.raw == "ReserveRestaurant";

    const auto o = corrupt_intent(src, cat, CorruptionMode::kObject, rng);
    EXPECT_EQ(o.action, src.action);
    EXPECT_NE(o.object_parts, src.object_parts);
    saw_hotel |= o.raw == "FindHotel";

    const auto b = corrupt_intent(src, cat, CorruptionMode::kBoth, rng);
    EXPECT_NE(b.action, src.action);
    EXPECT_NE(b.object_parts, src.object_parts);
  }
  EXPECT_TRUE(saw_reserve);
  EXPECT_TRUE(saw_hotel);
}

TEST(CorruptIntent, NeverReturnsSourceAndUsesOnlySeenParts) {
  const auto cat = restaurant_catalog();
  std::set<std::string> actions;
  std::set<std::string> objects;
  for (const auto& i : cat.seen()) {
    actions.insert(i.action);
    objects.insert(i.object());
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    for (const auto& src : cat.all()) {
      for (auto mode : {CorruptionMode::kAction, CorruptionMode::kObject,
                        CorruptionMode::kBoth}) {
        const auto out = corrupt_intent(src, cat, mode, rng);
        EXPECT_NE(out, src);
        if (mode != CorruptionMode::kObject) {
          EXPECT_TRUE(actions.contains(out.action)) << out.raw;
        }
        if (mode != CorruptionMode::kAction) {
          EXPECT_TRUE(objects.contains(out.object())) << out.raw;
        }
      }
    }
  }
}

TEST(CorruptIntent, DeterministicUnderSeed) {
  const auto cat = restaurant_catalog();
  Rng a(9);
  Rng b(9);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(corrupt_intent(cat.seen()[0], cat, CorruptionMode::kBoth, a),
              corrupt_intent(cat.seen()[0], cat, CorruptionMode::kBoth, b));
  }
}

TEST(CorruptIntent, InfeasibleWhenPoolsTooSmall) {
  const IntentCatalog one_action({parse("FindHotel"), parse("FindRestaurant")},
                                 {});
  Rng rng(1);
  const auto src = parse("FindHotel");
  EXPECT_EQ(corrupt_intent(src, one_action, CorruptionMode::kObject, rng).raw,
            "FindRestaurant");
  expect_code(ErrorCode::kCorruptionInfeasible, [&] {
    corrupt_intent(src, one_action, CorruptionMode::kAction, rng);
  });
  expect_code(ErrorCode::kCorruptionInfeasible, [&] {
    corrupt_intent(src, one_action, CorruptionMode::kBoth, rng);
  });
}

TEST(CompoundLexicon, ParsesCommentsAndBlanks) {
  std::istringstream in("# c\n\nOneWay\n  RoundTrip  \n");
  const auto lex = CompoundLexicon::parse(in);
  EXPECT_EQ(lex.entries().size(), 2u);
  EXPECT_TRUE(lex.contains("RoundTrip"));
}

}  // namespace
}  // namespace kgi
