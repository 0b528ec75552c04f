#pragma once

#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgi/lemmatizer.hpp"
#include "kgi/link_predictor.hpp"

namespace kgi {

/// Multi-segment camel-case tokens that stay one Object part, e.g. "OneWay".
class CompoundLexicon {
 public:
  CompoundLexicon() = default;
  explicit CompoundLexicon(std::set<std::string> entries)
      : entries_(std::move(entries)) {}

  /// One compound per line; blank and '#' lines skipped.
  static CompoundLexicon parse(std::istream& in);
  static CompoundLexicon load(const std::string& path);

  bool contains(std::string_view token) const {
    return entries_.contains(std::string(token));
  }
  const std::set<std::string>& entries() const { return entries_; }

 private:
  std::set<std::string> entries_;
};

/// An "ActionObject" intent label split into its Action and Object parts.
struct Intent {
  std::string raw;
  std::string action;
  std::vector<std::string> object_parts;

  /// The Object as written in the label ("OneWayFlight").
  std::string object() const;
  /// Camel segments of the label, e.g. {"Find", "Hotel"}.
  std::vector<std::string> label_tokens() const;
  /// Concept id of the Action ("find").
  std::string action_concept(const ConceptNormalizer& normalizer) const;
  /// One concept id per Object part ("one way", "flight").
  std::vector<std::string> object_concepts(
      const ConceptNormalizer& normalizer) const;

  bool operator==(const Intent& other) const { return raw == other.raw; }
  bool operator<(const Intent& other) const { return raw < other.raw; }
};

/// Action = first camel segment; remaining segments become Object parts,
/// with adjacent segments re-merged greedily (longest first) when their
/// concatenation is in the lexicon. Throws Error(kUnparseableIntent) for
/// empty, non-alphanumeric, lowercase-initial or single-segment labels.
Intent parse_intent(std::string_view label, const CompoundLexicon& lexicon);

/// Builds the intent whose label is `action` followed by `object_parts`.
Intent compose_intent(std::string action,
                      std::vector<std::string> object_parts);

/// Seen (S) and unseen (U) intents; S and U are disjoint and labels unique.
class IntentCatalog {
 public:
  IntentCatalog() = default;
  /// Throws Error(kConfiguration) on overlap or duplicate labels.
  IntentCatalog(std::vector<Intent> seen, std::vector<Intent> unseen);

  const std::vector<Intent>& seen() const { return seen_; }
  const std::vector<Intent>& unseen() const { return unseen_; }
  std::vector<Intent> all() const;

  /// k and n in the usual notation.
  std::size_t seen_count() const { return seen_.size(); }
  std::size_t total_count() const { return seen_.size() + unseen_.size(); }

  bool is_seen(std::string_view label) const;
  bool is_unseen(std::string_view label) const;
  const Intent* find(std::string_view label) const;

 private:
  std::vector<Intent> seen_;
  std::vector<Intent> unseen_;
};

enum class CorruptionMode { kAction, kObject, kBoth };

const char* to_string(CorruptionMode mode);

/// Replaces the Action, the Object, or both with a different one drawn
/// uniformly from the parts of the catalog's seen intents. The result never
/// equals `src`. Throws Error(kCorruptionInfeasible) when the seen intents
/// offer no alternative for a replaced part.
Intent corrupt_intent(const Intent& src, const IntentCatalog& pool,
                      CorruptionMode mode, Rng& rng);

}  // namespace kgi
