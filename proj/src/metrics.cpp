#include "kgi/metrics.hpp"

#include <cstdio>
#include <map>

#include "kgi/error.hpp"

namespace kgi {
namespace {

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

void accumulate(WeightedMetrics& w, const ClassMetrics& c) {
  const auto s = static_cast<double>(c.support);
  w.support += c.support;
  w.accuracy += s * c.accuracy;
  w.precision += s * c.precision;
  w.recall += s * c.recall;
  w.f1 += s * c.f1;
}

void finish(WeightedMetrics& w) {
  if (w.support == 0) return;
  const auto s = static_cast<double>(w.support);
  w.accuracy /= s;
  w.precision /= s;
  w.recall /= s;
  w.f1 /= s;
}

}  // namespace

MetricsReport evaluate(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& gold,
                       const std::set<std::string>& seen_labels) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::kConfiguration,
                "predictions and gold labels differ in length");
  }
  std::map<std::string, ClassMetrics> by_label;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto& g = by_label[gold[i]];
    auto& p = by_label[predictions[i]];
    ++g.support;
    if (gold[i] == predictions[i]) {
      ++g.true_positives;
    } else {
      ++g.false_negatives;
      ++p.false_positives;
    }
  }
  MetricsReport report;
  for (auto& [label, c] : by_label) {
    c.label = label;
    c.precision = ratio(c.true_positives, c.true_positives + c.false_positives);
    c.recall = ratio(c.true_positives, c.support);
    c.f1 = ratio(2 * c.true_positives,
                 2 * c.true_positives + c.false_positives + c.false_negatives);
    c.accuracy = c.recall;
    accumulate(seen_labels.contains(label) ? report.seen : report.unseen, c);
    accumulate(report.overall, c);
    report.classes.push_back(c);
  }
  finish(report.seen);
  finish(report.unseen);
  finish(report.overall);
  return report;
}

std::string format_report(const MetricsReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %9s %9s %9s %9s\n", "class",
                "support", "accuracy", "precision", "recall", "f1");
  out += line;
  auto row = [&](const std::string& name, std::size_t support, double acc,
                 double p, double r, double f) {
    std::snprintf(line, sizeof line, "%-28s %8zu %9.4f %9.4f %9.4f %9.4f\n",
                  name.c_str(), support, acc, p, r, f);
    out += line;
  };
  for (const auto& c : report.classes) {
    row(c.label, c.support, c.accuracy, c.precision, c.recall, c.f1);
  }
  for (const auto& [name, w] :
       {std::pair{"[seen]", report.seen}, std::pair{"[unseen]", report.unseen},
        std::pair{"[all]", report.overall}}) {
    row(name, w.support, w.accuracy, w.precision, w.recall, w.f1);
  }
  return out;
}

}  // namespace kgi
