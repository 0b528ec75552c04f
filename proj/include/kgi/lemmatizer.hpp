#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgi {

/// Table-driven suffix lemmatizer. The table format is documented at the top
/// of data/lemma_rules.txt.
class Lemmatizer {
 public:
  struct SuffixRule {
    std::string ending;
    std::string replacement;
    std::size_t min_stem = 1;
    bool undouble = false;
  };

  Lemmatizer() = default;

  static Lemmatizer parse(std::istream& in);
  static Lemmatizer load(const std::string& path);

  /// Lemma of a single lowercase token. Always a fixed point:
  /// lemma(lemma(w)) == lemma(w).
  std::string lemma(std::string_view word) const;

  std::size_t exception_count() const { return exceptions_.size(); }
  std::size_t rule_count() const { return rules_.size(); }

 private:
  /// One rewrite step; returns the input unchanged when nothing applies.
  std::string step(const std::string& word) const;

  std::unordered_map<std::string, std::string> exceptions_;
  std::vector<SuffixRule> rules_;
};

/// Maps surface text to a concept id: lowercase, '_' treated as a space,
/// whitespace collapsed, every token lemmatized, tokens joined by one space.
class ConceptNormalizer {
 public:
  ConceptNormalizer() = default;
  explicit ConceptNormalizer(Lemmatizer lemmatizer)
      : lemmatizer_(std::move(lemmatizer)) {}

  /// Throws Error(kInvalidConcept) on empty or whitespace-only input.
  std::string normalize(std::string_view surface) const;

  const Lemmatizer& lemmatizer() const { return lemmatizer_; }

 private:
  Lemmatizer lemmatizer_;
};

}  // namespace kgi
