#pragma once

#include <atomic>
#include <cstddef>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "kgi/intent.hpp"
#include "kgi/lemmatizer.hpp"
#include "kgi/link_predictor.hpp"
#include "kgi/params.hpp"

namespace kgi {

/// Probability used for any lookup involving a concept the link predictor
/// has never seen: the logistic of a zero score.
inline constexpr double kOutOfVocabularyProbability = 0.5;

inline constexpr std::size_t kDefaultMaxN = 4;

/// Normalized, deduplicated n-grams of an utterance.
struct PhraseSet {
  std::vector<std::string> phrases;

  std::size_t size() const { return phrases.size(); }
  bool empty() const { return phrases.empty(); }
};

/// All contiguous n-grams for n = 1..min(max_n, |tokens|), ordered by n and
/// then by position, normalized and deduplicated on first occurrence.
/// Throws Error(kEmptyUtterance) for no tokens, Error(kConfiguration) for
/// max_n == 0.
PhraseSet ngrams(const std::vector<std::string>& tokens, std::size_t max_n,
                 const ConceptNormalizer& normalizer);

/// Tokenizes then calls ngrams().
PhraseSet utterance_phrases(std::string_view utterance, std::size_t max_n,
                            const ConceptNormalizer& normalizer);

/// kOutgoing: the concept is the head and phrases are tails.
/// kIncoming: phrases are heads and the concept is the tail.
enum class Direction { kOutgoing, kIncoming };

/// One entry per relation: the maximum LP probability over all phrases.
/// Unknown phrases score kOutOfVocabularyProbability; an unknown concept
/// yields that value in every entry.
std::vector<double> rm(std::string_view concept_id, const PhraseSet& phrases,
                       Direction direction, const LinkScorer& lp);

/// Offsets of the four blocks in a meta-feature vector of length 4t.
struct MetaFeatureLayout {
  std::size_t relations;

  std::size_t size() const { return 4 * relations; }
  std::size_t action_outgoing() const { return 0; }
  std::size_t object_outgoing() const { return relations; }
  std::size_t action_incoming() const { return 2 * relations; }
  std::size_t object_incoming() const { return 3 * relations; }
};

/// [A->utt, O->utt, utt->A, utt->O]. A multi-part Object contributes the
/// mean of its parts' vectors.
Eigen::VectorXd relationship_meta_features(const PhraseSet& utterance,
                                           const Intent& intent,
                                           const LinkScorer& lp,
                                           const ConceptNormalizer& normalizer);

/// Caches probability() of a wrapped scorer. Safe for concurrent use.
class MemoizedScorer : public LinkScorer {
 public:
  explicit MemoizedScorer(const LinkScorer& inner) : inner_(inner) {}

  std::size_t relation_count() const override {
    return inner_.relation_count();
  }
  std::optional<std::size_t> entity_id(std::string_view concept_id)
      const override {
    return inner_.entity_id(concept_id);
  }
  double probability(std::size_t head, std::size_t relation,
                     std::size_t tail) const override;

  std::size_t cache_size() const;
  std::size_t hits() const;

 private:
  struct Key {
    std::size_t head;
    std::size_t relation;
    std::size_t tail;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  const LinkScorer& inner_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Key, double, KeyHash> cache_;
  mutable std::atomic<std::size_t> hits_ = 0;
};

/// sigmoid(W e_rel + b), W of shape width x input.
class RmgProjection {
 public:
  RmgProjection() = default;
  RmgProjection(ParamStore& store, std::size_t input_dim, std::size_t width);

  std::size_t input_dim() const { return linear_.in_dim(); }
  std::size_t width() const { return linear_.out_dim(); }
  void init(ParamStore& store, Rng& rng) const { linear_.init(store, rng); }

  /// Throws Error(kConfiguration) when e_rel has the wrong length.
  Eigen::VectorXd project(const ParamStore& store,
                          const Eigen::VectorXd& e_rel) const;
  /// `out` is the value returned by project(). Accumulates parameter
  /// gradients and returns d(loss)/d(e_rel).
  Eigen::VectorXd backward(ParamStore& store, const Eigen::VectorXd& e_rel,
                           const Eigen::VectorXd& out,
                           const Eigen::VectorXd& d_out) const;

 private:
  Linear linear_;
};

}  // namespace kgi
