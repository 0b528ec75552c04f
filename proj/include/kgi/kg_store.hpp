#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgi/lemmatizer.hpp"

namespace kgi {

/// Ordered relation vocabulary plus the symmetric / inverse schema used to
/// tie link-predictor parameters.
class RelationVocab {
 public:
  RelationVocab() = default;

  /// Validates: relations unique and non-empty, every schema member known,
  /// no relation both symmetric and part of an inverse pair, and no relation
  /// in more than one inverse pair. Throws Error(kSchema).
  RelationVocab(std::vector<std::string> relations,
                const std::vector<std::string>& symmetric,
                const std::vector<std::pair<std::string, std::string>>&
                    inverse_pairs);

  /// Schema file: one relation per line, optional "[sym]" or
  /// "[inv:<other>]" markers, '#' comments.
  static RelationVocab parse(std::istream& in);
  static RelationVocab load(const std::string& path);
  void write(std::ostream& out) const;

  std::size_t size() const { return relations_.size(); }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::string& name(std::size_t index) const {
    return relations_.at(index);
  }

  std::optional<std::size_t> index(std::string_view name) const;
  /// Throws Error(kSchema) for unknown names.
  std::size_t require(std::string_view name) const;

  bool is_symmetric(std::size_t index) const { return symmetric_.at(index); }
  std::optional<std::size_t> inverse_of(std::size_t index) const;

  /// Unordered pairs, stored with first < second.
  const std::vector<std::pair<std::size_t, std::size_t>>& inverse_pairs()
      const {
    return inverse_pairs_;
  }

  friend bool operator==(const RelationVocab& a, const RelationVocab& b) {
    return a.relations_ == b.relations_ && a.symmetric_ == b.symmetric_ &&
           a.inverse_pairs_ == b.inverse_pairs_;
  }

 private:
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<bool> symmetric_;
  std::vector<std::pair<std::size_t, std::size_t>> inverse_pairs_;
};

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

std::ostream& operator<<(std::ostream& out, const Triple& t);

/// Deduplicated, sorted triples and the sorted entity vocabulary they use.
class TripleSet {
 public:
  TripleSet() = default;
  explicit TripleSet(std::vector<Triple> triples);

  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<std::string>& entities() const { return entities_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  bool contains(const Triple& t) const;
  std::optional<std::size_t> entity_index(std::string_view concept_id) const;

  friend bool operator==(const TripleSet& a, const TripleSet& b) {
    return a.triples_ == b.triples_;
  }

 private:
  std::vector<Triple> triples_;
  std::vector<std::string> entities_;
};

/// Reads `head<TAB>relation<TAB>tail` lines, skipping blank and '#' lines.
/// Concepts are normalized when `normalizer` is non-null, otherwise only
/// trimmed. Throws ParseError (wrong field count, empty concept) or
/// Error(kSchema) for relations outside `vocab`.
TripleSet parse_triples(std::istream& in, const RelationVocab& vocab,
                        const ConceptNormalizer* normalizer);

void write_triples(std::ostream& out, const TripleSet& ts);

struct ImpliedTriple {
  Triple source;
  Triple implied;

  auto operator<=>(const ImpliedTriple&) const = default;
};

/// Triples implied by the symmetric / inverse schema but absent from `ts`,
/// sorted by implied triple. Diagnostic only.
std::vector<ImpliedTriple> schema_closure_check(const TripleSet& ts,
                                                const RelationVocab& vocab);

/// A knowledge graph as written by `kgi kg-import`: the relation schema in
/// "#!relation" header lines followed by normalized TSV triples.
struct KnowledgeStore {
  RelationVocab vocab;
  TripleSet triples;

  void save(const std::string& path) const;
  static KnowledgeStore load(const std::string& path);
};

}  // namespace kgi
