#include "kgi/link_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "kgi/binary_io.hpp"
#include "kgi/error.hpp"
#include "kgi/optimizer.hpp"

namespace kgi {
namespace {

constexpr std::string_view kMagic = "KGILP";
constexpr std::uint32_t kVersion = 1;

std::span<double> flat(RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}


}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void LPTrainConfig::validate() const {
  if (dim == 0 || neg_ratio == 0 || epochs == 0 || batch_size == 0 ||
      !(learning_rate > 0) || !(l2_lambda >= 0) || !(init_bound > 0)) {
    throw Error(ErrorCode::kConfiguration,
                "link predictor config: dim, neg_ratio, epochs, batch_size, "
                "learning_rate and init_bound must be positive, l2_lambda "
                "non-negative");
  }
}

LinkPredictorModel::LinkPredictorModel(std::vector<std::string> entities,
                                       RelationVocab vocab, std::size_t dim)
    : dim_(dim), entities_(std::move(entities)), vocab_(std::move(vocab)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    entity_index_.emplace(entities_[i], i);
  }
  const std::size_t t = vocab_.size();
  fwd_row_.assign(t, 0);
  inv_row_.assign(t, 0);
  std::vector<bool> done(t, false);
  std::size_t rows = 0;
  for (std::size_t r = 0; r < t; ++r) {
    if (done[r]) continue;
    if (vocab_.is_symmetric(r)) {
      fwd_row_[r] = inv_row_[r] = rows++;
    } else if (auto other = vocab_.inverse_of(r)) {
      const std::size_t a = rows++;
      const std::size_t b = rows++;
      fwd_row_[r] = a;
      inv_row_[r] = b;
      fwd_row_[*other] = b;
      inv_row_[*other] = a;
      done[*other] = true;
    } else {
      fwd_row_[r] = rows++;
      inv_row_[r] = rows++;
    }
    done[r] = true;
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  head_ = RowMatrix::Zero(static_cast<Eigen::Index>(entities_.size()), d);
  tail_ = RowMatrix::Zero(static_cast<Eigen::Index>(entities_.size()), d);
  rel_ = RowMatrix::Zero(static_cast<Eigen::Index>(rows), d);
}

void LinkPredictorModel::init_uniform(double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (RowMatrix* m : {&head_, &tail_, &rel_}) {
    for (double& x : flat(*m)) x = u(rng);
  }
}

std::optional<std::size_t> LinkPredictorModel::entity_id(
    std::string_view concept_id) const {
  auto it = entity_index_.find(std::string(concept_id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

double LinkPredictorModel::score(std::size_t h, std::size_t r,
                                 std::size_t t) const {
  const auto hi = static_cast<Eigen::Index>(h);
  const auto ti = static_cast<Eigen::Index>(t);
  const auto fwd = rel_.row(static_cast<Eigen::Index>(fwd_row_[r]));
  const auto inv = rel_.row(static_cast<Eigen::Index>(inv_row_[r]));
  double a = 0.0;
  double b = 0.0;
  for (Eigen::Index k = 0; k < rel_.cols(); ++k) {
    a += head_(hi, k) * fwd[k] * tail_(ti, k);
    b += head_(ti, k) * inv[k] * tail_(hi, k);
  }
  return 0.5 * (a + b);
}

double LinkPredictorModel::probability(std::size_t h, std::size_t r,
                                       std::size_t t) const {
  return sigmoid(score(h, r, t));
}

double LinkPredictorModel::score(std::string_view head,
                                 std::string_view relation,
                                 std::string_view tail) const {
  const std::size_t r = vocab_.require(relation);
  const auto h = entity_id(head);
  const auto t = entity_id(tail);
  if (!h || !t) {
    throw Error(ErrorCode::kOutOfVocabulary,
                "entity '" + std::string(h ? tail : head) +
                    "' is not in the link predictor vocabulary");
  }
  return score(*h, r, *t);
}

double LinkPredictorModel::probability(std::string_view head,
                                       std::string_view relation,
                                       std::string_view tail) const {
  return sigmoid(score(head, relation, tail));
}

LPGradient LinkPredictorModel::zero_gradient() const {
  return {RowMatrix::Zero(head_.rows(), head_.cols()),
          RowMatrix::Zero(tail_.rows(), tail_.cols()),
          RowMatrix::Zero(rel_.rows(), rel_.cols())};
}

double LinkPredictorModel::batch_loss(std::span<const LabeledTriple> batch,
                                      double l2_weight,
                                      LPGradient* grad) const {
  double loss = 0.0;
  for (const auto& ex : batch) {
    const double s = score(ex.head, ex.relation, ex.tail);
    loss += softplus(-ex.label * s);
    if (grad == nullptr) continue;
    // d softplus(-y s) / ds = -y * sigmoid(-y s); the 1/2 comes from score.
    const double g = -ex.label * sigmoid(-ex.label * s) * 0.5;
    const auto h = static_cast<Eigen::Index>(ex.head);
    const auto t = static_cast<Eigen::Index>(ex.tail);
    const auto f = static_cast<Eigen::Index>(fwd_row_[ex.relation]);
    const auto i = static_cast<Eigen::Index>(inv_row_[ex.relation]);
    for (Eigen::Index k = 0; k < rel_.cols(); ++k) {
      grad->head(h, k) += g * rel_(f, k) * tail_(t, k);
      grad->relation(f, k) += g * head_(h, k) * tail_(t, k);
      grad->tail(t, k) += g * head_(h, k) * rel_(f, k);
      grad->head(t, k) += g * rel_(i, k) * tail_(h, k);
      grad->relation(i, k) += g * head_(t, k) * tail_(h, k);
      grad->tail(h, k) += g * head_(t, k) * rel_(i, k);
    }
  }
  if (l2_weight > 0) {
    loss += 0.5 * l2_weight *
            (head_.squaredNorm() + tail_.squaredNorm() + rel_.squaredNorm());
    if (grad != nullptr) {
      grad->head += l2_weight * head_;
      grad->tail += l2_weight * tail_;
      grad->relation += l2_weight * rel_;
    }
  }
  return loss;
}

bool LinkPredictorModel::all_finite() const {
  return head_.allFinite() && tail_.allFinite() && rel_.allFinite();
}

void LinkPredictorModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path);
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(dim_));
  std::ostringstream schema;
  vocab_.write(schema);
  w.str(schema.str());
  w.u32(static_cast<std::uint32_t>(entities_.size()));
  for (const auto& e : entities_) w.str(e);
  w.u32(static_cast<std::uint32_t>(vocab_.size()));
  for (std::size_t r = 0; r < vocab_.size(); ++r) {
    w.u32(static_cast<std::uint32_t>(fwd_row_[r]));
    w.u32(static_cast<std::uint32_t>(inv_row_[r]));
  }
  w.matrix(head_);
  w.matrix(tail_);
  w.matrix(rel_);
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint " + path);
}

LinkPredictorModel LinkPredictorModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path);
  BinaryReader r(in);
  r.expect_magic(kMagic);
  if (const auto v = r.u32(); v != kVersion) {
    throw Error(ErrorCode::kParse, "unsupported link predictor checkpoint "
                                   "version " + std::to_string(v));
  }
  const std::size_t dim = r.u32();
  std::istringstream schema(r.str());
  RelationVocab vocab = RelationVocab::parse(schema);
  std::vector<std::string> entities(r.u32());
  for (auto& e : entities) e = r.str();
  LinkPredictorModel model(std::move(entities), std::move(vocab), dim);
  if (r.u32() != model.vocab_.size()) {
    throw Error(ErrorCode::kParse, "checkpoint relation count mismatch");
  }
  for (std::size_t rel = 0; rel < model.vocab_.size(); ++rel) {
    const std::size_t f = r.u32();
    const std::size_t i = r.u32();
    if (f != model.fwd_row_[rel] || i != model.inv_row_[rel]) {
      throw Error(ErrorCode::kParse, "checkpoint tying map does not match "
                                     "its relation schema");
    }
  }
  RowMatrix head = r.matrix();
  RowMatrix tail = r.matrix();
  RowMatrix rel = r.matrix();
  if (head.rows() != model.head_.rows() || head.cols() != model.head_.cols() ||
      tail.rows() != model.tail_.rows() || tail.cols() != model.tail_.cols() ||
      rel.rows() != model.rel_.rows() || rel.cols() != model.rel_.cols()) {
    throw Error(ErrorCode::kParse, "checkpoint matrix shape mismatch");
  }
  model.head_ = std::move(head);
  model.tail_ = std::move(tail);
  model.rel_ = std::move(rel);
  return model;
}

std::vector<LabeledTriple> sample_negatives(const LabeledTriple& triple,
                                            std::size_t ratio,
                                            std::size_t entity_count,
                                            Rng& rng) {
  if (entity_count < 2) {
    throw Error(ErrorCode::kCannotCorrupt,
                "need at least two entities to corrupt a triple");
  }
  std::bernoulli_distribution corrupt_head(0.5);
  std::uniform_int_distribution<std::size_t> other(0, entity_count - 2);
  std::vector<LabeledTriple> out;
  out.reserve(ratio);
  for (std::size_t i = 0; i < ratio; ++i) {
    LabeledTriple neg = triple;
    neg.label = -1.0;
    std::size_t& slot = corrupt_head(rng) ? neg.head : neg.tail;
    // Uniform over every entity except the original one.
    const std::size_t pick = other(rng);
    slot = pick >= slot ? pick + 1 : pick;
    out.push_back(neg);
  }
  return out;
}

LinkPredictorModel lp_train(const TripleSet& ts, const RelationVocab& vocab,
                            const LPTrainConfig& cfg, LPTrainReport* report) {
  cfg.validate();
  if (ts.empty()) {
    throw Error(ErrorCode::kConfiguration, "cannot train on an empty graph");
  }
  Rng rng(cfg.seed);
  LinkPredictorModel model(ts.entities(), vocab, cfg.dim);
  model.init_uniform(cfg.init_bound, rng);

  std::vector<LabeledTriple> positives;
  positives.reserve(ts.size());
  for (const auto& t : ts.triples()) {
    positives.push_back({*model.entity_id(t.head), vocab.require(t.relation),
                         *model.entity_id(t.tail), 1.0});
  }
  const std::size_t n_entities = model.entity_count();
  const std::size_t num_batches =
      (positives.size() + cfg.batch_size - 1) / cfg.batch_size;
  // The full-parameter penalty is spread over the batches of an epoch.
  const double l2_weight = cfg.l2_lambda / static_cast<double>(num_batches);

  const AdamConfig adam_cfg{.learning_rate = cfg.learning_rate};
  Adam adam_head(static_cast<std::size_t>(model.head_embeddings().size()),
                 adam_cfg);
  Adam adam_tail(static_cast<std::size_t>(model.tail_embeddings().size()),
                 adam_cfg);
  Adam adam_rel(static_cast<std::size_t>(model.relation_rows().size()),
                adam_cfg);

  LPGradient grad = model.zero_gradient();
  std::vector<LabeledTriple> batch;
  batch.reserve(std::min(positives.size(), cfg.batch_size) *
                (1 + cfg.neg_ratio));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(positives.begin(), positives.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < positives.size();
         start += cfg.batch_size) {
      const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(positives[i]);
        auto negs = sample_negatives(positives[i], cfg.neg_ratio, n_entities, rng);
        batch.insert(batch.end(), negs.begin(), negs.end());
      }
      grad.head.setZero();
      grad.tail.setZero();
      grad.relation.setZero();
      const double loss = model.batch_loss(batch, l2_weight, &grad);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch + 1);
      adam_head.step(flat(model.head_embeddings()), flat(grad.head));
      adam_tail.step(flat(model.tail_embeddings()), flat(grad.tail));
      adam_rel.step(flat(model.relation_rows()), flat(grad.relation));
      epoch_loss += loss;
    }
    if (!model.all_finite()) throw TrainingDiverged(epoch + 1);
    if (report != nullptr) report->epoch_loss.push_back(epoch_loss);
  }
  return model;
}

double hits_at_k(const LinkPredictorModel& model,
                 const std::vector<Triple>& test, const TripleSet& known,
                 std::size_t k) {
  if (test.empty()) return 0.0;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> known_ids;
  for (const auto& t : known.triples()) {
    const auto h = model.entity_id(t.head);
    const auto tl = model.entity_id(t.tail);
    const auto r = model.vocab().index(t.relation);
    if (h && tl && r) known_ids.emplace(*h, *r, *tl);
  }
  std::size_t hits = 0;
  for (const auto& t : test) {
    const auto h = model.entity_id(t.head);
    const auto tl = model.entity_id(t.tail);
    const auto r = model.vocab().index(t.relation);
    if (!h || !tl || !r) continue;
    const double target = model.score(*h, *r, *tl);
    std::size_t rank = 1;
    for (std::size_t e = 0; e < model.entity_count(); ++e) {
      if (e == *tl || known_ids.contains({*h, *r, e})) continue;
      // Ties count against the true tail.
      if (model.score(*h, *r, e) >= target) ++rank;
    }
    if (rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace kgi
