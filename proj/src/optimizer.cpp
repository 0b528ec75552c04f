#include "kgi/optimizer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace kgi {
namespace {

bool improves(double metric, double best, double threshold) {
  if (std::isinf(best)) return std::isfinite(metric);
  return metric < best - threshold * std::abs(best);
}

}  // namespace

void Adam::step(std::span<double> params, std::span<const double> grads) {
  assert(params.size() == m_.size() && grads.size() == m_.size());
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

double PlateauScheduler::step(double metric, double lr) {
  if (improves(metric, best_, threshold_)) {
    best_ = metric;
    bad_epochs_ = 0;
    return lr;
  }
  if (++bad_epochs_ > patience_) {
    bad_epochs_ = 0;
    const double reduced = std::max(lr * factor_, min_lr_);
    if (reduced < lr) ++reductions_;
    return reduced;
  }
  return lr;
}

bool EarlyStopping::update(double metric) {
  if (improves(metric, best_, threshold_)) {
    best_ = metric;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

}  // namespace kgi
