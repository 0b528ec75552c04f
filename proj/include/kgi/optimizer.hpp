#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace kgi {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over one flat parameter block.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig config)
      : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads);

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

/// ReduceLROnPlateau in "min" mode with a relative improvement threshold.
/// Like the PyTorch scheduler, the rate drops once more than `patience`
/// consecutive epochs have failed to improve on the best value seen.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor, std::size_t patience,
                   double threshold = 1e-4, double min_lr = 0.0)
      : factor_(factor),
        patience_(patience),
        threshold_(threshold),
        min_lr_(min_lr) {}

  /// Feeds one epoch's metric; returns the (possibly reduced) rate.
  double step(double metric, double lr);

  std::size_t bad_epochs() const { return bad_epochs_; }
  std::size_t reductions() const { return reductions_; }

 private:
  double factor_;
  std::size_t patience_;
  double threshold_;
  double min_lr_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
  std::size_t reductions_ = 0;
};

/// Counts epochs without improvement on a minimized metric.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience, double threshold = 1e-4)
      : patience_(patience), threshold_(threshold) {}

  /// Returns true when the metric improved on the best so far.
  bool update(double metric);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  double threshold_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
};

}  // namespace kgi
