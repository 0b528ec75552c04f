#include "kgi/pu.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "kgi/error.hpp"
#include "kgi/link_predictor.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

constexpr std::uint32_t kPUVersion = 1;

std::vector<Eigen::VectorXd> embed_all(const std::vector<std::string>& texts,
                                       const WordVectors& words) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  std::size_t oov = 0;
  for (const auto& t : texts) {
    auto e = sentence_embedding(t, words);
    oov += e.all_oov ? 1 : 0;
    out.push_back(std::move(e.vector));
  }
  if (oov > 0) {
    spdlog::warn("{} of {} utterances have no known word vectors", oov,
                 texts.size());
  }
  return out;
}

}  // namespace

SentenceEmbedding sentence_embedding(std::string_view utterance,
                                     const WordVectors& words) {
  const auto tokens = tokenize(utterance);
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyUtterance,
                "utterance '" + std::string(utterance) + "' has no tokens");
  }
  SentenceEmbedding out;
  out.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(words.dim()));
  std::size_t known = 0;
  for (const auto& t : tokens) {
    if (auto v = words.find(t)) {
      out.vector += *v;
      ++known;
    }
  }
  const double norm = out.vector.norm();
  if (known == 0 || norm == 0.0) {
    out.vector.setZero();
    out.all_oov = known == 0;
    return out;
  }
  out.vector /= norm;
  return out;
}

double LogisticRegression::objective(const std::vector<Eigen::VectorXd>& x,
                                     const std::vector<int>& y, double l2,
                                     const Eigen::VectorXd& w, double b,
                                     Eigen::VectorXd* grad_w,
                                     double* grad_b) {
  const double n = static_cast<double>(x.size());
  double loss = 0.0;
  if (grad_w != nullptr) *grad_w = l2 * w;
  if (grad_b != nullptr) *grad_b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = w.dot(x[i]) + b;
    const double sign = y[i] == 1 ? 1.0 : -1.0;
    loss += softplus(-sign * s) / n;
    const double d = (sigmoid(s) - (y[i] == 1 ? 1.0 : 0.0)) / n;
    if (grad_w != nullptr) *grad_w += d * x[i];
    if (grad_b != nullptr) *grad_b += d;
  }
  return loss + 0.5 * l2 * w.squaredNorm();
}

LogisticRegression LogisticRegression::fit(const std::vector<Eigen::VectorXd>& x,
                                           const std::vector<int>& y,
                                           const LogisticConfig& cfg) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::kConfiguration,
                "logistic regression needs matching non-empty inputs");
  }
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<long>(y.size())) {
    throw Error(ErrorCode::kConfiguration,
                "logistic regression needs both classes in the training data");
  }
  LogisticRegression lr(Eigen::VectorXd::Zero(x[0].size()), 0.0);
  Eigen::VectorXd gw;
  double gb = 0.0;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    objective(x, y, cfg.l2, lr.w_, lr.b_, &gw, &gb);
    lr.iterations_ = it + 1;
    if (std::sqrt(gw.squaredNorm() + gb * gb) < cfg.tolerance) break;
    lr.w_ -= cfg.learning_rate * gw;
    lr.b_ -= cfg.learning_rate * gb;
  }
  if (!lr.w_.allFinite() || !std::isfinite(lr.b_)) {
    throw TrainingDiverged(lr.iterations_);
  }
  return lr;
}

double LogisticRegression::predict(const Eigen::VectorXd& x) const {
  return sigmoid(w_.dot(x) + b_);
}

void LogisticRegression::write(BinaryWriter& out) const {
  out.vector(w_);
  out.f64(b_);
}

LogisticRegression LogisticRegression::read(BinaryReader& in) {
  auto w = in.vector();
  const double b = in.f64();
  return LogisticRegression(std::move(w), b);
}

double PUModel::probability(const Eigen::VectorXd& x) const {
  return std::min(1.0, g_.predict(x) / c_);
}

PUPrediction PUModel::predict(const Eigen::VectorXd& x) const {
  const double p = probability(x);
  return {p, p >= threshold_ ? Gate::kSeen : Gate::kUnseen};
}

void PUModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  BinaryWriter w(out);
  w.magic("KGIPU");
  w.u32(kPUVersion);
  g_.write(w);
  w.f64(c_);
  w.f64(threshold_);
  w.str(embedding_path);
}

PUModel PUModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  BinaryReader r(in);
  r.expect_magic("KGIPU");
  if (r.u32() != kPUVersion) {
    throw Error(ErrorCode::kParse, "unsupported PU checkpoint version");
  }
  auto g = LogisticRegression::read(r);
  const double c = r.f64();
  const double threshold = r.f64();
  PUModel model(std::move(g), c, threshold);
  model.embedding_path = r.str();
  return model;
}

PUModel pu_train(const std::vector<Eigen::VectorXd>& positives,
                 const std::vector<Eigen::VectorXd>& unlabeled,
                 const PUConfig& cfg) {
  if (positives.size() < 2 || unlabeled.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "PU training needs at least two positives and one unlabeled "
                "example");
  }
  if (!(cfg.calibration_fraction > 0.0 && cfg.calibration_fraction < 1.0) ||
      !(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
    throw Error(ErrorCode::kConfiguration,
                "calibration fraction and threshold must lie in (0, 1)");
  }
  Rng rng(cfg.seed);
  auto shuffled = [&](std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
  };
  auto held_count = [&](std::size_t n) {
    const auto k = static_cast<std::size_t>(
        std::llround(cfg.calibration_fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n - 1);
  };
  const auto pos_idx = shuffled(positives.size());
  const auto unl_idx = shuffled(unlabeled.size());
  const std::size_t pos_held = held_count(positives.size());
  const std::size_t unl_held =
      unlabeled.size() > 1 ? held_count(unlabeled.size()) : 0;

  std::vector<Eigen::VectorXd> x;
  std::vector<int> y;
  for (std::size_t i = pos_held; i < pos_idx.size(); ++i) {
    x.push_back(positives[pos_idx[i]]);
    y.push_back(1);
  }
  for (std::size_t i = unl_held; i < unl_idx.size(); ++i) {
    x.push_back(unlabeled[unl_idx[i]]);
    y.push_back(0);
  }
  auto g = LogisticRegression::fit(x, y, cfg.logistic);
  double c = 0.0;
  for (std::size_t i = 0; i < pos_held; ++i) {
    c += g.predict(positives[pos_idx[i]]);
  }
  c /= static_cast<double>(pos_held);
  if (!(c > cfg.min_c)) {
    throw Error(ErrorCode::kCalibrationFailed,
                "estimated label frequency " + std::to_string(c) +
                    " is degenerate");
  }
  return PUModel(std::move(g), std::min(c, 1.0), cfg.threshold);
}

PUModel pu_train(const std::vector<std::string>& positives,
                 const std::vector<std::string>& unlabeled,
                 const WordVectors& words, const PUConfig& cfg) {
  return pu_train(embed_all(positives, words), embed_all(unlabeled, words),
                  cfg);
}

PUPrediction predict_seen(std::string_view utterance, const PUModel& pu,
                          const WordVectors& words) {
  return pu.predict(sentence_embedding(utterance, words).vector);
}

IntentExistenceModel IntentExistenceModel::train(
    const std::vector<std::string>& with_intent,
    const std::vector<std::string>& without, const WordVectors& words,
    const LogisticConfig& cfg) {
  if (with_intent.empty() || without.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "intent existence training needs both kinds of utterance");
  }
  auto x = embed_all(with_intent, words);
  std::vector<int> y(x.size(), 1);
  for (auto& v : embed_all(without, words)) {
    x.push_back(std::move(v));
    y.push_back(0);
  }
  IntentExistenceModel m;
  m.lr_ = LogisticRegression::fit(x, y, cfg);
  return m;
}

IntentExistenceModel::Prediction IntentExistenceModel::predict(
    std::string_view utterance, const WordVectors& words) const {
  const double p = lr_.predict(sentence_embedding(utterance, words).vector);
  return {p >= 0.5, p};
}

}  // namespace kgi
