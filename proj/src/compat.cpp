#include "kgi/compat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "kgi/config.hpp"
#include "kgi/error.hpp"
#include "kgi/optimizer.hpp"

namespace kgi {
namespace {

constexpr std::uint32_t kCompatVersion = 1;

[[noreturn]] void bad_config(const std::string& msg) {
  throw Error(ErrorCode::kConfiguration, msg);
}

Eigen::VectorXd dropout_mask(Eigen::Index n, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return Eigen::VectorXd::Ones(n);
  std::bernoulli_distribution keep(1.0 - rate);
  Eigen::VectorXd m(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = keep(*rng) ? 1.0 / (1.0 - rate) : 0.0;
  }
  return m;
}

Eigen::Vector2d softmax2(const Eigen::Vector2d& z) {
  const double mx = z.maxCoeff();
  Eigen::Vector2d e = (z.array() - mx).exp();
  return e / e.sum();
}

double log_softmax_at(const Eigen::Vector2d& z, int k) {
  const double mx = z.maxCoeff();
  return z[k] - mx - std::log((z.array() - mx).exp().sum());
}

}  // namespace

const char* to_string(FeatureSet f) {
  switch (f) {
    case FeatureSet::kFull: return "full";
    case FeatureSet::kRelationOnly: return "rel-only";
    case FeatureSet::kEmbeddingOnly: return "embed-only";
  }
  return "unknown";
}

FeatureSet parse_feature_set(std::string_view name) {
  for (auto f : {FeatureSet::kFull, FeatureSet::kRelationOnly,
                 FeatureSet::kEmbeddingOnly}) {
    if (name == to_string(f)) return f;
  }
  bad_config("unknown feature set '" + std::string(name) +
             "' (expected full, rel-only or embed-only)");
}

void CompatConfig::validate() const {
  if (projection_width == 0 || hidden == 0 || encoder.hidden == 0 ||
      encoder.layers == 0 || encoder.pos_dim == 0 || max_n == 0) {
    bad_config("model dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) bad_config("dropout must be in [0, 1)");
  if (neg_ratio < 1 || neg_ratio > 6) bad_config("neg_ratio must be in [1, 6]");
  if (batch_size == 0) bad_config("batch_size must be positive");
  if (!(learning_rate > 0.0)) bad_config("learning_rate must be positive");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) {
    bad_config("lr_factor must be in (0, 1)");
  }
  if (!(valid_fraction > 0.0 && valid_fraction < 0.5)) {
    bad_config("valid_fraction must be in (0, 0.5)");
  }
}

bool CompatConfig::set(std::string_view key, std::string_view value) {
  if (key == "features") features = parse_feature_set(value);
  else if (key == "projection_width") projection_width = parse_size(key, value);
  else if (key == "pos_dim") encoder.pos_dim = parse_size(key, value);
  else if (key == "encoder_hidden") encoder.hidden = parse_size(key, value);
  else if (key == "encoder_layers") encoder.layers = parse_size(key, value);
  else if (key == "share_encoders") share_encoders = parse_flag(key, value);
  else if (key == "hidden") hidden = parse_size(key, value);
  else if (key == "dropout") dropout = parse_real(key, value);
  else if (key == "max_n") max_n = parse_size(key, value);
  else if (key == "neg_ratio") neg_ratio = parse_size(key, value);
  else if (key == "epochs") epochs = parse_size(key, value);
  else if (key == "batch_size") batch_size = parse_size(key, value);
  else if (key == "learning_rate") learning_rate = parse_real(key, value);
  else if (key == "lr_factor") lr_factor = parse_real(key, value);
  else if (key == "lr_patience") lr_patience = parse_size(key, value);
  else if (key == "early_stop_patience") early_stop_patience = parse_size(key, value);
  else if (key == "valid_fraction") valid_fraction = parse_real(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> CompatConfig::to_pairs() const {
  return {
      {"features", to_string(features)},
      {"projection_width", std::to_string(projection_width)},
      {"pos_dim", std::to_string(encoder.pos_dim)},
      {"encoder_hidden", std::to_string(encoder.hidden)},
      {"encoder_layers", std::to_string(encoder.layers)},
      {"share_encoders", share_encoders ? "true" : "false"},
      {"hidden", std::to_string(hidden)},
      {"dropout", format_real(dropout)},
      {"max_n", std::to_string(max_n)},
      {"neg_ratio", std::to_string(neg_ratio)},
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"learning_rate", format_real(learning_rate)},
      {"lr_factor", format_real(lr_factor)},
      {"lr_patience", std::to_string(lr_patience)},
      {"early_stop_patience", std::to_string(early_stop_patience)},
      {"valid_fraction", format_real(valid_fraction)},
      {"seed", std::to_string(seed)},
  };
}

std::vector<TrainingExample> build_training_set(
    const std::vector<Record>& records, const IntentCatalog& catalog,
    std::size_t neg_ratio, Rng& rng) {
  std::unordered_map<std::string, std::set<std::string>> true_labels;
  for (const auto& r : records) true_labels[r.text].insert(r.intent);

  std::vector<TrainingExample> out;
  std::set<CorruptionMode> warned;
  const std::array modes = {CorruptionMode::kAction, CorruptionMode::kObject,
                            CorruptionMode::kBoth};
  for (const auto& r : records) {
    const Intent* intent = catalog.find(r.intent);
    if (intent == nullptr || !catalog.is_seen(r.intent)) continue;
    out.push_back({r.text, *intent, 1});

    const auto& forbidden = true_labels[r.text];
    std::set<std::string> emitted;
    std::set<CorruptionMode> infeasible;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 20 * neg_ratio;
    for (std::size_t k = 0;
         emitted.size() < neg_ratio && attempts < max_attempts &&
         infeasible.size() < modes.size();
         ++k) {
      const auto mode = modes[k % modes.size()];
      if (infeasible.contains(mode)) continue;
      ++attempts;
      Intent neg;
      try {
        neg = corrupt_intent(*intent, catalog, mode, rng);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kCorruptionInfeasible) throw;
        infeasible.insert(mode);
        if (warned.insert(mode).second) spdlog::warn("{}", e.what());
        continue;
      }
      if (forbidden.contains(neg.raw) || catalog.is_unseen(neg.raw) ||
          !emitted.insert(neg.raw).second) {
        continue;
      }
      out.push_back({r.text, std::move(neg), 0});
    }
  }
  return out;
}

Eigen::VectorXd RelationFeaturizer::operator()(std::string_view utterance,
                                               const Intent& intent) const {
  return relationship_meta_features(
      utterance_phrases(utterance, max_n_, normalizer_), intent, memo_,
      normalizer_);
}

CompatModel::CompatModel(CompatConfig cfg,
                         std::shared_ptr<const WordVectors> words,
                         std::shared_ptr<const PosTagger> tagger,
                         std::size_t relation_count)
    : cfg_(std::move(cfg)),
      words_(std::move(words)),
      tagger_(std::move(tagger)),
      relation_count_(relation_count) {
  cfg_.validate();
  if (!words_ || !tagger_) bad_config("compat model needs word vectors and a tagger");
  if (uses_relations()) {
    if (relation_count_ == 0) bad_config("relation count must be positive");
    projection_ = RmgProjection(params_, 4 * relation_count_,
                                cfg_.projection_width);
    input_width_ += cfg_.projection_width;
  }
  if (uses_embeddings()) {
    utterance_encoder_ =
        SequenceEncoder(params_, "utterance", words_, cfg_.encoder);
    if (!cfg_.share_encoders) {
      intent_encoder_ = SequenceEncoder(params_, "intent", words_, cfg_.encoder);
    }
    input_width_ += 2 * utterance_encoder_.output_dim();
  }
  hidden_ = Linear(params_, "hidden", input_width_, cfg_.hidden);
  output_ = Linear(params_, "output", cfg_.hidden, 2);
}

void CompatModel::init(Rng& rng) {
  if (uses_relations()) projection_.init(params_, rng);
  if (uses_embeddings()) {
    utterance_encoder_.init(params_, rng);
    if (!cfg_.share_encoders) intent_encoder_.init(params_, rng);
  }
  hidden_.init(params_, rng);
  output_.init(params_, rng);
}

CompatInput CompatModel::prepare(std::string_view utterance,
                                 const Intent& intent,
                                 const RelationFeaturizer* featurizer) const {
  CompatInput in;
  in.utterance = utterance_tokens(utterance, *tagger_);
  in.intent = intent_tokens(intent, *tagger_);
  in.utterance_key = std::string(utterance);
  in.intent_key = intent.raw;
  if (uses_relations()) {
    if (featurizer == nullptr) {
      bad_config("this feature set needs a link predictor for meta-features");
    }
    if (featurizer->relation_count() != relation_count_) {
      bad_config("link predictor has " +
                 std::to_string(featurizer->relation_count()) +
                 " relations, the model expects " +
                 std::to_string(relation_count_));
    }
    in.e_rel = (*featurizer)(utterance, intent);
  }
  return in;
}

Eigen::Vector2d CompatModel::distribution(const CompatInput& in) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(input_width_));
  Eigen::Index at = 0;
  if (uses_relations()) {
    const auto r = projection_.project(params_, in.e_rel);
    x.segment(at, r.size()) = r;
    at += r.size();
  }
  if (uses_embeddings()) {
    const auto& int_enc =
        cfg_.share_encoders ? utterance_encoder_ : intent_encoder_;
    const auto u = utterance_encoder_.encode(params_, in.utterance);
    const auto i = int_enc.encode(params_, in.intent);
    x.segment(at, u.size()) = u;
    at += u.size();
    x.segment(at, i.size()) = i;
  }
  const Eigen::VectorXd h = hidden_.forward(params_, x).cwiseMax(0.0);
  return softmax2(output_.forward(params_, h));
}

double CompatModel::probability(const CompatInput& in) const {
  return distribution(in)[1];
}

double CompatModel::batch_loss(const std::vector<const CompatInput*>& inputs,
                               const std::vector<int>& labels, bool grad,
                               Rng* dropout_rng) {
  if (inputs.empty() || inputs.size() != labels.size()) {
    bad_config("batch needs matching non-empty inputs and labels");
  }
  struct Encoded {
    Eigen::VectorXd value;
    SequenceEncoder::Cache cache;
    Eigen::VectorXd grad;
  };
  const auto& int_enc =
      cfg_.share_encoders ? utterance_encoder_ : intent_encoder_;
  std::unordered_map<std::string, Encoded> utt_cache;
  std::unordered_map<std::string, Encoded> int_cache;
  auto encode = [&](std::unordered_map<std::string, Encoded>& cache,
                    const std::string& key, const SequenceEncoder& enc,
                    const std::vector<TaggedToken>& tokens) -> Encoded& {
    auto [it, fresh] = cache.try_emplace(key);
    if (fresh) {
      it->second.value =
          enc.encode(params_, tokens, grad ? &it->second.cache : nullptr);
      it->second.grad = Eigen::VectorXd::Zero(it->second.value.size());
    }
    return it->second;
  };

  const double n = static_cast<double>(inputs.size());
  const auto width = static_cast<Eigen::Index>(input_width_);
  double total = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const CompatInput& in = *inputs[k];
    Eigen::VectorXd x(width);
    Eigen::Index at = 0;
    Eigen::VectorXd r;
    Encoded* u = nullptr;
    Encoded* i = nullptr;
    if (uses_relations()) {
      r = projection_.project(params_, in.e_rel);
      x.segment(at, r.size()) = r;
      at += r.size();
    }
    if (uses_embeddings()) {
      u = &encode(utt_cache, in.utterance_key, utterance_encoder_, in.utterance);
      i = &encode(int_cache, in.intent_key, int_enc, in.intent);
      x.segment(at, u->value.size()) = u->value;
      at += u->value.size();
      x.segment(at, i->value.size()) = i->value;
    }
    const Eigen::VectorXd m1 = dropout_mask(width, cfg_.dropout, dropout_rng);
    const Eigen::VectorXd xd = x.cwiseProduct(m1);
    const Eigen::VectorXd a = hidden_.forward(params_, xd);
    const Eigen::VectorXd m2 =
        dropout_mask(a.size(), cfg_.dropout, dropout_rng);
    const Eigen::VectorXd hd = a.cwiseMax(0.0).cwiseProduct(m2);
    const Eigen::Vector2d z = output_.forward(params_, hd);
    const int y = labels[k];
    total -= log_softmax_at(z, y);
    if (!grad) continue;

    Eigen::Vector2d dz = softmax2(z);
    dz[y] -= 1.0;
    dz /= n;
    const Eigen::VectorXd dhd = output_.backward(params_, hd, dz);
    const Eigen::VectorXd da =
        (dhd.cwiseProduct(m2).array() * (a.array() > 0.0).cast<double>())
            .matrix();
    const Eigen::VectorXd dx = hidden_.backward(params_, xd, da).cwiseProduct(m1);
    at = 0;
    if (uses_relations()) {
      projection_.backward(params_, in.e_rel, r, dx.segment(at, r.size()));
      at += r.size();
    }
    if (uses_embeddings()) {
      u->grad += dx.segment(at, u->value.size());
      at += u->value.size();
      i->grad += dx.segment(at, i->value.size());
    }
  }
  if (grad) {
    for (auto& [key, e] : utt_cache) {
      utterance_encoder_.backward(params_, e.cache, e.grad);
    }
    for (auto& [key, e] : int_cache) int_enc.backward(params_, e.cache, e.grad);
  }
  return total / n;
}

void CompatModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  BinaryWriter w(out);
  w.magic("KGICM");
  w.u32(kCompatVersion);
  const auto pairs = cfg_.to_pairs();
  w.u32(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& [k, v] : pairs) {
    w.str(k);
    w.str(v);
  }
  w.u64(relation_count_);
  w.u32(static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    w.str(k);
    w.str(v);
  }
  params_.write(w);
}

namespace {

struct CompatHeader {
  CompatConfig cfg;
  std::size_t relation_count = 0;
  std::map<std::string, std::string> metadata;
};

CompatHeader read_header(BinaryReader& r) {
  r.expect_magic("KGICM");
  if (r.u32() != kCompatVersion) {
    throw Error(ErrorCode::kParse, "unsupported compat checkpoint version");
  }
  CompatHeader h;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto k = r.str();
    const auto v = r.str();
    if (!h.cfg.set(k, v)) {
      throw Error(ErrorCode::kParse, "unknown config key in checkpoint: " + k);
    }
  }
  h.relation_count = r.u64();
  const auto m = r.u32();
  for (std::uint32_t i = 0; i < m; ++i) {
    auto k = r.str();
    h.metadata[k] = r.str();
  }
  return h;
}

}  // namespace

CompatModel CompatModel::load(const std::string& path,
                              std::shared_ptr<const WordVectors> words,
                              std::shared_ptr<const PosTagger> tagger) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  BinaryReader r(in);
  auto h = read_header(r);
  CompatModel model(h.cfg, std::move(words), std::move(tagger),
                    h.relation_count);
  model.metadata = std::move(h.metadata);
  model.params_.read(r);
  return model;
}

std::map<std::string, std::string> CompatModel::read_metadata(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  BinaryReader r(in);
  return read_header(r).metadata;
}

double predict_compat(std::string_view utterance, const Intent& intent,
                      const CompatModel& model,
                      const RelationFeaturizer* featurizer) {
  return model.probability(model.prepare(utterance, intent, featurizer));
}

Intent classify(std::string_view utterance,
                const std::vector<Intent>& candidates, const CompatModel& model,
                const RelationFeaturizer* featurizer) {
  if (candidates.empty()) bad_config("classify needs at least one candidate");
  std::vector<const Intent*> order;
  for (const auto& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const Intent* a, const Intent* b) { return a->raw < b->raw; });
  const Intent* best = nullptr;
  double best_p = -1.0;
  for (const Intent* c : order) {
    const double p = predict_compat(utterance, *c, model, featurizer);
    if (p > best_p) {
      best_p = p;
      best = c;
    }
  }
  return *best;
}

CompatTrainReport train_compat(const std::vector<TrainingExample>& examples,
                               CompatModel& model,
                               const RelationFeaturizer* featurizer) {
  const auto& cfg = model.config();
  std::vector<std::size_t> by_label[2];
  for (std::size_t i = 0; i < examples.size(); ++i) {
    by_label[examples[i].label == 1 ? 1 : 0].push_back(i);
  }
  if (by_label[0].size() < 2 || by_label[1].size() < 2) {
    bad_config("training needs at least two examples of each label");
  }
  Rng rng(cfg.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> valid_idx;
  for (auto& group : by_label) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(
            cfg.valid_fraction * static_cast<double>(group.size()))),
        1, group.size() - 1);
    valid_idx.insert(valid_idx.end(), group.begin(), group.begin() + k);
    train_idx.insert(train_idx.end(), group.begin() + k, group.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(valid_idx.begin(), valid_idx.end());

  std::vector<CompatInput> inputs;
  inputs.reserve(examples.size());
  for (const auto& ex : examples) {
    inputs.push_back(model.prepare(ex.utterance, ex.intent, featurizer));
  }
  std::vector<const CompatInput*> valid_in;
  std::vector<int> valid_y;
  for (auto i : valid_idx) {
    valid_in.push_back(&inputs[i]);
    valid_y.push_back(examples[i].label);
  }

  auto& params = model.params();
  Adam adam(params.size(), AdamConfig{cfg.learning_rate});
  PlateauScheduler scheduler(cfg.lr_factor, cfg.lr_patience);
  EarlyStopping stopper(cfg.early_stop_patience);
  CompatTrainReport report;
  Eigen::VectorXd best = params.values();
  double best_valid = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(train_idx.size(), start + cfg.batch_size);
      std::vector<const CompatInput*> batch;
      std::vector<int> y;
      for (std::size_t j = start; j < end; ++j) {
        batch.push_back(&inputs[train_idx[j]]);
        y.push_back(examples[train_idx[j]].label);
      }
      params.zero_grad();
      const double loss = model.batch_loss(batch, y, true, &rng);
      if (!std::isfinite(loss) || !params.grads().allFinite()) {
        throw TrainingDiverged(epoch + 1);
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      adam.step(std::span<double>(params.values().data(), params.size()),
                std::span<const double>(params.grads().data(), params.size()));
    }
    epoch_loss /= static_cast<double>(train_idx.size());
    const double valid = model.batch_loss(valid_in, valid_y, false, nullptr);
    if (!std::isfinite(valid)) throw TrainingDiverged(epoch + 1);
    report.train_loss.push_back(epoch_loss);
    report.valid_loss.push_back(valid);
    report.learning_rate.push_back(adam.learning_rate());
    if (valid < best_valid) {
      best_valid = valid;
      best = params.values();
      report.best_epoch = epoch + 1;
    }
    adam.set_learning_rate(scheduler.step(valid, adam.learning_rate()));
    stopper.update(valid);
    if (stopper.should_stop()) {
      report.stopped_early = true;
      break;
    }
  }
  params.values() = best;
  params.zero_grad();
  return report;
}

}  // namespace kgi
