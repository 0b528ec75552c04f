#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgi/dataset.hpp"
#include "kgi/intent.hpp"

namespace kgi {

/// kZeroShot: every utterance of a seen intent trains, every utterance of
/// an unseen intent is test data. kGeneralized: a share of the seen-intent
/// utterances trains and the test set holds the rest plus all
/// unseen-intent utterances.
enum class SplitMode { kZeroShot, kGeneralized };

const char* to_string(SplitMode m);
/// "zs" or "gzs". Throws Error(kConfiguration).
SplitMode parse_split_mode(std::string_view name);

struct SplitParams {
  SplitMode mode = SplitMode::kGeneralized;
  /// Number of seen intents; 0 means use seen_fraction instead.
  std::size_t seen_count = 0;
  double seen_fraction = 0.5;
  /// Share of seen-intent utterances used for training (GZS only).
  double train_fraction = 0.7;
  /// Share of the test pool moved out as the unlabeled PU training pool.
  double unlabeled_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
  std::vector<Record> train;
  std::vector<Record> test;
  /// Utterances of seen and unseen intents whose labels are withheld.
  std::vector<Record> unlabeled;
  std::uint64_t seed = 0;

  IntentCatalog catalog(const CompoundLexicon& lexicon) const;

  /// JSON object with the five lists and the seed.
  void save(const std::string& path) const;
  static Split load(const std::string& path);
};

/// Deterministic under params.seed. Throws Error(kConfiguration) when the
/// dataset has fewer than two intents or the seen count leaves no unseen
/// intent.
Split make_split(const Dataset& ds, const SplitParams& params);

}  // namespace kgi
