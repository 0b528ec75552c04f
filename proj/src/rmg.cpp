#include "kgi/rmg.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

void warn_unknown_concept(std::string_view concept_id) {
  static std::mutex mutex;
  static std::set<std::string, std::less<>> reported;
  std::lock_guard lock(mutex);
  if (reported.insert(std::string(concept_id)).second) {
    spdlog::warn("concept '{}' is not in the link predictor vocabulary; "
                 "its meta-features fall back to {}",
                 concept_id, kOutOfVocabularyProbability);
  }
}

}  // namespace

PhraseSet ngrams(const std::vector<std::string>& tokens, std::size_t max_n,
                 const ConceptNormalizer& normalizer) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyUtterance, "utterance has no tokens");
  }
  if (max_n == 0) throw Error(ErrorCode::kConfiguration, "max_n must be >= 1");
  PhraseSet out;
  std::unordered_set<std::string> seen;
  const std::size_t top = std::min(max_n, tokens.size());
  for (std::size_t n = 1; n <= top; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::vector<std::string> window(tokens.begin() + i,
                                      tokens.begin() + i + n);
      auto phrase = normalizer.normalize(join(window, " "));
      if (seen.insert(phrase).second) out.phrases.push_back(std::move(phrase));
    }
  }
  return out;
}

PhraseSet utterance_phrases(std::string_view utterance, std::size_t max_n,
                            const ConceptNormalizer& normalizer) {
  return ngrams(tokenize(utterance), max_n, normalizer);
}

std::vector<double> rm(std::string_view concept_id, const PhraseSet& phrases,
                       Direction direction, const LinkScorer& lp) {
  if (phrases.empty()) {
    throw Error(ErrorCode::kEmptyUtterance, "no phrases to score");
  }
  const std::size_t t = lp.relation_count();
  const auto c = lp.entity_id(concept_id);
  if (!c) {
    warn_unknown_concept(concept_id);
    return std::vector<double>(t, kOutOfVocabularyProbability);
  }
  std::vector<std::optional<std::size_t>> ids;
  ids.reserve(phrases.size());
  for (const auto& g : phrases.phrases) ids.push_back(lp.entity_id(g));

  std::vector<double> out(t, 0.0);
  for (std::size_t r = 0; r < t; ++r) {
    double best = 0.0;
    for (const auto& g : ids) {
      double p = kOutOfVocabularyProbability;
      if (g) {
        p = direction == Direction::kOutgoing ? lp.probability(*c, r, *g)
                                              : lp.probability(*g, r, *c);
      }
      best = std::max(best, p);
    }
    out[r] = best;
  }
  return out;
}

Eigen::VectorXd relationship_meta_features(
    const PhraseSet& utterance, const Intent& intent, const LinkScorer& lp,
    const ConceptNormalizer& normalizer) {
  const MetaFeatureLayout layout{lp.relation_count()};
  const auto t = static_cast<Eigen::Index>(layout.relations);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(layout.size()));
  auto put = [&](std::size_t offset, const std::vector<double>& v) {
    for (Eigen::Index r = 0; r < t; ++r) {
      out[static_cast<Eigen::Index>(offset) + r] +=
          v[static_cast<std::size_t>(r)];
    }
  };
  const auto action = intent.action_concept(normalizer);
  put(layout.action_outgoing(),
      rm(action, utterance, Direction::kOutgoing, lp));
  put(layout.action_incoming(),
      rm(action, utterance, Direction::kIncoming, lp));
  const auto objects = intent.object_concepts(normalizer);
  for (const auto& o : objects) {
    put(layout.object_outgoing(), rm(o, utterance, Direction::kOutgoing, lp));
    put(layout.object_incoming(), rm(o, utterance, Direction::kIncoming, lp));
  }
  const double k = static_cast<double>(objects.size());
  out.segment(static_cast<Eigen::Index>(layout.object_outgoing()), t) /= k;
  out.segment(static_cast<Eigen::Index>(layout.object_incoming()), t) /= k;
  return out;
}

std::size_t MemoizedScorer::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<std::size_t>{}(k.head);
  h ^= std::hash<std::size_t>{}(k.relation) + 0x9e3779b97f4a7c15ULL +
       (h << 6) + (h >> 2);
  h ^= std::hash<std::size_t>{}(k.tail) + 0x9e3779b97f4a7c15ULL + (h << 6) +
       (h >> 2);
  return h;
}

double MemoizedScorer::probability(std::size_t head, std::size_t relation,
                                   std::size_t tail) const {
  const Key key{head, relation, tail};
  {
    std::shared_lock lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const double p = inner_.probability(head, relation, tail);
  std::unique_lock lock(mutex_);
  cache_.emplace(key, p);
  return p;
}

std::size_t MemoizedScorer::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::size_t MemoizedScorer::hits() const { return hits_.load(); }

RmgProjection::RmgProjection(ParamStore& store, std::size_t input_dim,
                             std::size_t width)
    : linear_(store, "rmg_projection", input_dim, width) {}

Eigen::VectorXd RmgProjection::project(const ParamStore& store,
                                       const Eigen::VectorXd& e_rel) const {
  if (static_cast<std::size_t>(e_rel.size()) != input_dim()) {
    throw Error(ErrorCode::kConfiguration,
                "meta-feature length " + std::to_string(e_rel.size()) +
                    " does not match projection input " +
                    std::to_string(input_dim()));
  }
  return sigmoid(linear_.forward(store, e_rel));
}

Eigen::VectorXd RmgProjection::backward(ParamStore& store,
                                        const Eigen::VectorXd& e_rel,
                                        const Eigen::VectorXd& out,
                                        const Eigen::VectorXd& d_out) const {
  const Eigen::VectorXd d_pre =
      d_out.array() * out.array() * (1.0 - out.array());
  return linear_.backward(store, e_rel, d_pre);
}

}  // namespace kgi
