#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kgi/binary_io.hpp"
#include "kgi/embeddings.hpp"

namespace kgi {

struct SentenceEmbedding {
  Eigen::VectorXd vector;
  /// No token had a word vector; `vector` is zero.
  bool all_oov = false;
};

/// L2-normalized mean of the word vectors of the utterance's tokens.
/// Unknown tokens are skipped. Throws Error(kEmptyUtterance).
SentenceEmbedding sentence_embedding(std::string_view utterance,
                                     const WordVectors& words);

struct LogisticConfig {
  double l2 = 1e-3;
  double learning_rate = 1.0;
  std::size_t max_iterations = 5000;
  /// Stops once the gradient norm falls below this.
  double tolerance = 1e-7;
};

/// p(y = 1 | x) = sigmoid(w.x + b), fit by full-batch gradient descent on
/// mean log loss + l2/2 ||w||^2 (bias unpenalized).
class LogisticRegression {
 public:
  LogisticRegression() = default;
  LogisticRegression(Eigen::VectorXd weights, double bias)
      : w_(std::move(weights)), b_(bias) {}

  /// Throws Error(kConfiguration) unless both labels occur.
  static LogisticRegression fit(const std::vector<Eigen::VectorXd>& x,
                                const std::vector<int>& y,
                                const LogisticConfig& cfg);

  double predict(const Eigen::VectorXd& x) const;
  std::size_t dim() const { return static_cast<std::size_t>(w_.size()); }
  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return b_; }
  std::size_t iterations() const { return iterations_; }

  /// Loss and gradient (w then b) used by fit().
  static double objective(const std::vector<Eigen::VectorXd>& x,
                          const std::vector<int>& y, double l2,
                          const Eigen::VectorXd& w, double b,
                          Eigen::VectorXd* grad_w, double* grad_b);

  void write(BinaryWriter& out) const;
  static LogisticRegression read(BinaryReader& in);

 private:
  Eigen::VectorXd w_;
  double b_ = 0.0;
  std::size_t iterations_ = 0;
};

struct PUConfig {
  /// Share of the positives (and, to keep the labeled/unlabeled ratio of
  /// the fit fold unchanged, of the unlabeled set) held out of fitting.
  /// Only the held-out positives are used, to estimate c.
  double calibration_fraction = 0.2;
  double threshold = 0.5;
  double min_c = 1e-3;
  LogisticConfig logistic;
  std::uint64_t seed = 0;
};

enum class Gate { kSeen, kUnseen };

struct PUPrediction {
  double probability;
  Gate gate;
};

/// Positive-unlabeled classifier: g separates labeled positives from
/// unlabeled examples, c = E[g(x) | x labeled], f(x) = min(1, g(x) / c).
class PUModel {
 public:
  PUModel() = default;
  PUModel(LogisticRegression g, double c, double threshold)
      : g_(std::move(g)), c_(c), threshold_(threshold) {}

  double c() const { return c_; }
  double threshold() const { return threshold_; }
  const LogisticRegression& base() const { return g_; }

  double probability(const Eigen::VectorXd& x) const;
  PUPrediction predict(const Eigen::VectorXd& x) const;

  /// Word-vector file used to embed utterances; recorded for the CLI.
  std::string embedding_path;

  void save(const std::string& path) const;
  static PUModel load(const std::string& path);

 private:
  LogisticRegression g_;
  double c_ = 1.0;
  double threshold_ = 0.5;
};

/// Throws Error(kConfiguration) on empty inputs and
/// Error(kCalibrationFailed) when c <= cfg.min_c.
PUModel pu_train(const std::vector<Eigen::VectorXd>& positives,
                 const std::vector<Eigen::VectorXd>& unlabeled,
                 const PUConfig& cfg);

PUModel pu_train(const std::vector<std::string>& positives,
                 const std::vector<std::string>& unlabeled,
                 const WordVectors& words, const PUConfig& cfg);

PUPrediction predict_seen(std::string_view utterance, const PUModel& pu,
                          const WordVectors& words);

/// Binary pre-filter: does the utterance express any intent at all?
class IntentExistenceModel {
 public:
  struct Prediction {
    bool has_intent;
    double probability;
  };

  IntentExistenceModel() = default;

  /// Throws Error(kConfiguration) when either list is empty.
  static IntentExistenceModel train(const std::vector<std::string>& with_intent,
                                    const std::vector<std::string>& without,
                                    const WordVectors& words,
                                    const LogisticConfig& cfg);

  Prediction predict(std::string_view utterance,
                     const WordVectors& words) const;
  const LogisticRegression& classifier() const { return lr_; }

 private:
  LogisticRegression lr_;
};

}  // namespace kgi
