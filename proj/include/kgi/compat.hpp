#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgi/dataset.hpp"
#include "kgi/encoder.hpp"
#include "kgi/intent.hpp"
#include "kgi/rmg.hpp"

namespace kgi {

/// Which inputs reach the prediction layers. kFull concatenates the
/// projected meta-features with both embeddings; kRelationOnly keeps only
/// the meta-features and kEmbeddingOnly only the utterance and intent
/// embeddings.
enum class FeatureSet { kFull, kRelationOnly, kEmbeddingOnly };

const char* to_string(FeatureSet f);
/// Accepts "full", "rel-only", "embed-only". Throws Error(kConfiguration).
FeatureSet parse_feature_set(std::string_view name);

struct CompatConfig {
  FeatureSet features = FeatureSet::kFull;
  std::size_t projection_width = 64;
  EncoderConfig encoder;
  /// Use the utterance encoder for intent labels as well.
  bool share_encoders = false;
  std::size_t hidden = 64;
  double dropout = 0.3;
  std::size_t max_n = kDefaultMaxN;

  std::size_t neg_ratio = 6;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double lr_factor = 0.5;
  std::size_t lr_patience = 20;
  std::size_t early_stop_patience = 40;
  double valid_fraction = 0.1;
  std::uint64_t seed = 0;

  /// Throws Error(kConfiguration).
  void validate() const;

  /// Sets one field from its key. Returns false for unknown keys; throws
  /// Error(kConfiguration) for malformed values.
  bool set(std::string_view key, std::string_view value);
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
};

struct TrainingExample {
  std::string utterance;
  Intent intent;
  int label;  // 1 compatible, 0 not
};

/// Positives for every record whose intent is seen, followed by up to
/// `neg_ratio` distinct corrupted intents per positive, cycling through the
/// Action, Object and Both modes. A corruption is rejected if it is a true
/// label of the same utterance anywhere in `records` or an unseen intent.
/// Modes the seen intents cannot support are skipped with a warning.
std::vector<TrainingExample> build_training_set(
    const std::vector<Record>& records, const IntentCatalog& catalog,
    std::size_t neg_ratio, Rng& rng);

/// Meta-features of (utterance, intent) pairs over a link scorer, with LP
/// probabilities memoized.
class RelationFeaturizer {
 public:
  RelationFeaturizer(const LinkScorer& lp, const ConceptNormalizer& normalizer,
                     std::size_t max_n = kDefaultMaxN)
      : memo_(lp), normalizer_(normalizer), max_n_(max_n) {}

  std::size_t relation_count() const { return memo_.relation_count(); }
  std::size_t max_n() const { return max_n_; }
  Eigen::VectorXd operator()(std::string_view utterance,
                             const Intent& intent) const;

 private:
  MemoizedScorer memo_;
  const ConceptNormalizer& normalizer_;
  std::size_t max_n_;
};

/// Pre-processed inputs of one (utterance, intent) pair.
struct CompatInput {
  Eigen::VectorXd e_rel;
  std::vector<TaggedToken> utterance;
  std::vector<TaggedToken> intent;
  std::string utterance_key;
  std::string intent_key;
};

/// Scores utterance/intent compatibility:
///   x = [sigmoid(W e_rel + b) ; e_utt ; e_int]  (per FeatureSet)
///   p = softmax(W2 relu(W1 x + b1) + b2)[compatible]
/// with dropout on x and on the hidden layer during training.
class CompatModel {
 public:
  CompatModel(CompatConfig cfg, std::shared_ptr<const WordVectors> words,
              std::shared_ptr<const PosTagger> tagger,
              std::size_t relation_count);

  void init(Rng& rng);

  const CompatConfig& config() const { return cfg_; }
  std::size_t relation_count() const { return relation_count_; }
  std::size_t input_width() const { return input_width_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  bool uses_relations() const { return cfg_.features != FeatureSet::kEmbeddingOnly; }
  bool uses_embeddings() const { return cfg_.features != FeatureSet::kRelationOnly; }

  /// Meta-features are only computed when the feature set uses them, in
  /// which case `featurizer` must be non-null.
  CompatInput prepare(std::string_view utterance, const Intent& intent,
                      const RelationFeaturizer* featurizer) const;

  /// Compatibility probability with dropout disabled.
  double probability(const CompatInput& in) const;
  /// Softmax over {incompatible, compatible}, dropout disabled.
  Eigen::Vector2d distribution(const CompatInput& in) const;

  /// Mean cross-entropy of the batch. With `grad` true, adds the gradient
  /// of that mean to params().grads(). Dropout masks come from
  /// `dropout_rng` when non-null, otherwise dropout is off.
  double batch_loss(const std::vector<const CompatInput*>& inputs,
                    const std::vector<int>& labels, bool grad,
                    Rng* dropout_rng);

  /// Free-form string metadata stored with the checkpoint (file paths of
  /// the word vectors, link predictor and so on).
  std::map<std::string, std::string> metadata;

  void save(const std::string& path) const;
  /// Word vectors and tagger are supplied by the caller, usually from the
  /// paths in the stored metadata; see read_metadata().
  static CompatModel load(const std::string& path,
                          std::shared_ptr<const WordVectors> words,
                          std::shared_ptr<const PosTagger> tagger);
  static std::map<std::string, std::string> read_metadata(
      const std::string& path);

 private:
  struct Forward;

  CompatConfig cfg_;
  std::shared_ptr<const WordVectors> words_;
  std::shared_ptr<const PosTagger> tagger_;
  std::size_t relation_count_;
  ParamStore params_;
  RmgProjection projection_;
  SequenceEncoder utterance_encoder_;
  SequenceEncoder intent_encoder_;
  Linear hidden_;
  Linear output_;
  std::size_t input_width_ = 0;
};

double predict_compat(std::string_view utterance, const Intent& intent,
                      const CompatModel& model,
                      const RelationFeaturizer* featurizer);

/// Argmax of predict_compat over the candidates; ties go to the
/// lexicographically smallest label. Throws Error(kConfiguration) for an
/// empty candidate list.
Intent classify(std::string_view utterance, const std::vector<Intent>& candidates,
                const CompatModel& model, const RelationFeaturizer* featurizer);

struct CompatTrainReport {
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  std::vector<double> learning_rate;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// Adam on mini-batches, ReduceLROnPlateau on the validation loss, early
/// stopping, and the parameters of the best validation epoch restored at
/// the end. The validation set is a label-stratified `valid_fraction` of
/// the examples. Throws TrainingDiverged on a non-finite loss.
CompatTrainReport train_compat(const std::vector<TrainingExample>& examples,
                               CompatModel& model,
                               const RelationFeaturizer* featurizer);

}  // namespace kgi
