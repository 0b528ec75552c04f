#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace kgi {

struct ClassMetrics {
  std::string label;
  std::size_t support = 0;  // gold count
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Share of the class's gold examples predicted correctly (equals recall).
  double accuracy = 0.0;
};

/// Support-weighted means over a group of classes.
struct WeightedMetrics {
  std::size_t support = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  /// Every label seen in gold or predictions, sorted.
  std::vector<ClassMetrics> classes;
  WeightedMetrics seen;
  WeightedMetrics unseen;
  WeightedMetrics overall;
};

/// Classes in `seen_labels` aggregate into `seen`, all others into
/// `unseen`. Throws Error(kConfiguration) on a length mismatch.
MetricsReport evaluate(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& gold,
                       const std::set<std::string>& seen_labels);

/// Aligned-column text table.
std::string format_report(const MetricsReport& report);

}  // namespace kgi
