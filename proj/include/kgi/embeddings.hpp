#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace kgi {

/// Frozen word vectors read from a text file with one `token v1 ... vd`
/// entry per line. A leading word2vec-style "count dim" header line is
/// skipped. Unknown tokens map to the zero vector.
class WordVectors {
 public:
  WordVectors() = default;
  explicit WordVectors(std::size_t dim) : dim_(dim) {}

  /// Throws ParseError on ragged rows or non-numeric values.
  static WordVectors parse(std::istream& in);
  static WordVectors load(const std::string& path);
  void write(std::ostream& out) const;

  /// Replaces an existing entry. Throws Error(kConfiguration) on a
  /// dimension mismatch.
  void add(std::string token, const Eigen::VectorXd& v);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;

  /// Vector of `token` (looked up lowercased), or nullopt.
  std::optional<Eigen::VectorXd> find(std::string_view token) const;
  /// Like find() but returns the zero vector for unknown tokens.
  Eigen::VectorXd lookup(std::string_view token) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Eigen::VectorXd> rows_;
};

enum class PosTag : std::size_t { kNoun = 0, kVerb, kAdj, kOther };

inline constexpr std::size_t kPosTagCount = 4;
inline constexpr std::array<std::string_view, kPosTagCount> kPosTagNames = {
    "NOUN", "VERB", "ADJ", "OTHER"};

/// Throws Error(kTagVocabulary) for names outside kPosTagNames.
PosTag parse_pos_tag(std::string_view name);

/// Lexicon plus suffix-rule tagger. Lexicon file lines are `word TAG`;
/// lines `*suffix TAG` are suffix rules tried longest first; '#' starts a
/// comment. Words matching neither are nouns.
class PosTagger {
 public:
  PosTagger() = default;

  static PosTagger parse(std::istream& in);
  static PosTagger load(const std::string& path);

  PosTag tag(std::string_view word) const;
  std::vector<PosTag> tag_all(const std::vector<std::string>& words) const;

  std::size_t lexicon_size() const { return lexicon_.size(); }

 private:
  std::unordered_map<std::string, PosTag> lexicon_;
  std::vector<std::pair<std::string, PosTag>> suffixes_;
};

}  // namespace kgi
