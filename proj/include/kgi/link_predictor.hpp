#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "kgi/kg_store.hpp"

namespace kgi {

using Rng = std::mt19937_64;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Read-only triple probability source consumed by the meta-feature
/// generator. Entity ids are only meaningful to the scorer that issued them.
class LinkScorer {
 public:
  virtual ~LinkScorer() = default;

  virtual std::size_t relation_count() const = 0;
  virtual std::optional<std::size_t> entity_id(std::string_view concept_id)
      const = 0;
  /// Probability in [0, 1] that <head, relation, tail> holds.
  virtual double probability(std::size_t head, std::size_t relation,
                             std::size_t tail) const = 0;
};

struct LPTrainConfig {
  std::size_t dim = 200;
  std::size_t neg_ratio = 10;
  std::size_t epochs = 1000;
  double learning_rate = 0.05;
  double l2_lambda = 0.1;
  /// Positive triples per mini-batch; each brings its negatives along.
  std::size_t batch_size = 4800;
  std::uint64_t seed = 0;
  double init_bound = 0.1;

  /// Throws Error(kConfiguration).
  void validate() const;
};

struct LabeledTriple {
  std::size_t head;
  std::size_t relation;
  std::size_t tail;
  double label;  // +1 or -1
};

struct LPGradient {
  RowMatrix head;
  RowMatrix tail;
  RowMatrix relation;
};

/// SimplE bilinear model. Each entity has a head and a tail embedding; each
/// relation has a forward and an inverse row in a shared parameter table.
/// Symmetric relations use one row for both; an inverse pair (r1, r2) uses
/// two rows with inv(r1) == fwd(r2) and inv(r2) == fwd(r1). Tied rows
/// therefore receive the sum of their gradients.
///
///   score(h, r, t) = 1/2 (<H[h], R[fwd r], T[t]> + <H[t], R[inv r], T[h]>)
class LinkPredictorModel : public LinkScorer {
 public:
  LinkPredictorModel() = default;
  /// All parameters start at zero.
  LinkPredictorModel(std::vector<std::string> entities, RelationVocab vocab,
                     std::size_t dim);

  void init_uniform(double bound, Rng& rng);

  std::size_t dim() const { return dim_; }
  std::size_t entity_count() const { return entities_.size(); }
  const std::vector<std::string>& entities() const { return entities_; }
  const RelationVocab& vocab() const { return vocab_; }

  std::size_t relation_count() const override { return vocab_.size(); }
  std::optional<std::size_t> entity_id(std::string_view concept_id)
      const override;
  double probability(std::size_t head, std::size_t relation,
                     std::size_t tail) const override;

  double score(std::size_t head, std::size_t relation, std::size_t tail) const;

  /// String-keyed variants. Unknown entity -> Error(kOutOfVocabulary);
  /// unknown relation -> Error(kSchema).
  double score(std::string_view head, std::string_view relation,
               std::string_view tail) const;
  double probability(std::string_view head, std::string_view relation,
                     std::string_view tail) const;

  std::size_t forward_row(std::size_t relation) const {
    return fwd_row_.at(relation);
  }
  std::size_t inverse_row(std::size_t relation) const {
    return inv_row_.at(relation);
  }

  RowMatrix& head_embeddings() { return head_; }
  RowMatrix& tail_embeddings() { return tail_; }
  RowMatrix& relation_rows() { return rel_; }
  const RowMatrix& head_embeddings() const { return head_; }
  const RowMatrix& tail_embeddings() const { return tail_; }
  const RowMatrix& relation_rows() const { return rel_; }

  LPGradient zero_gradient() const;

  /// Sum over the batch of softplus(-y * score) plus
  /// l2_weight * 1/2 * ||all parameters||^2. Accumulates d(loss)/d(theta)
  /// into `grad` when non-null.
  double batch_loss(std::span<const LabeledTriple> batch, double l2_weight,
                    LPGradient* grad) const;

  bool all_finite() const;

  void save(const std::string& path) const;
  static LinkPredictorModel load(const std::string& path);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> entities_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  RelationVocab vocab_;
  std::vector<std::size_t> fwd_row_;
  std::vector<std::size_t> inv_row_;
  RowMatrix head_;
  RowMatrix tail_;
  RowMatrix rel_;
};

double sigmoid(double x);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// `ratio` corruptions of `triple`, each replacing the head or the tail
/// (chosen uniformly) by a different entity drawn uniformly from
/// [0, entity_count). Throws Error(kCannotCorrupt) when entity_count < 2.
std::vector<LabeledTriple> sample_negatives(const LabeledTriple& triple,
                                            std::size_t ratio,
                                            std::size_t entity_count,
                                            Rng& rng);

struct LPTrainReport {
  std::vector<double> epoch_loss;
};

/// Adam on mini-batches of positives plus fresh negatives each epoch.
/// Throws TrainingDiverged if a batch loss becomes non-finite.
LinkPredictorModel lp_train(const TripleSet& ts, const RelationVocab& vocab,
                            const LPTrainConfig& cfg,
                            LPTrainReport* report = nullptr);

/// Filtered hits@k over tail corruption: for each test triple, the true tail
/// must rank in the top k among all entities once the other tails known
/// from `known` are removed. Triples with unknown entities count as misses.
double hits_at_k(const LinkPredictorModel& model,
                 const std::vector<Triple>& test, const TripleSet& known,
                 std::size_t k);

}  // namespace kgi
