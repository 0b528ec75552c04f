#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kgi/intent.hpp"

namespace kgi {

/// One utterance and the intent label it implies.
struct Record {
  std::string text;
  std::string intent;

  bool operator==(const Record&) const = default;
};

struct DatasetStats {
  std::size_t size = 0;
  std::size_t vocab_size = 0;
  double avg_length = 0.0;
  std::size_t intent_count = 0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::vector<Record> records);

  /// JSON lines of the form {"text": ..., "intent": ...}; blank lines are
  /// skipped and extra keys ignored. Throws ParseError for malformed lines
  /// and Error(kUnparseableIntent) for bad labels.
  static Dataset parse_jsonl(std::istream& in, std::string name,
                             const CompoundLexicon& lexicon);
  static Dataset load(const std::string& path, const CompoundLexicon& lexicon);
  void write_jsonl(std::ostream& out) const;
  void save(const std::string& path) const;

  const std::string& name() const { return name_; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Recomputed from the records: token vocabulary, mean tokens per
  /// utterance and distinct intents.
  DatasetStats stats() const;
  /// Distinct labels, sorted.
  std::vector<std::string> intents() const;

 private:
  std::string name_;
  std::vector<Record> records_;
};

}  // namespace kgi
