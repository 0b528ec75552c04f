#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgi/compat.hpp"
#include "kgi/config.hpp"
#include "kgi/metrics.hpp"
#include "kgi/pu.hpp"
#include "kgi/split.hpp"

namespace kgi {

struct GzsResult {
  Intent intent;
  /// Present when a PU model was consulted.
  std::optional<PUPrediction> gate;
};

/// Restricts the candidates to the seen intents when the PU gate says
/// seen, to the unseen ones when it says unseen, and uses all intents when
/// `pu` is null; then classifies. Throws Error(kConfiguration) on an empty
/// catalog.
GzsResult gzs_predict(std::string_view utterance, const PUModel* pu,
                      const WordVectors& words, const CompatModel& model,
                      const IntentCatalog& catalog,
                      const RelationFeaturizer* featurizer);

nlohmann::json to_json(const MetricsReport& report);

/// Everything run-experiment reads from its key = value config file.
/// Relative paths are resolved against `base_dir`.
struct ExperimentConfig {
  std::string base_dir = ".";
  std::string dataset;
  /// Link predictor checkpoint. When empty, one is trained on `kg`.
  std::string lp;
  std::string kg;
  std::string embeddings;
  std::string compounds;
  std::string lemma_rules;
  std::string pos_lexicon;
  /// Explicit split; overrides the split parameters and seeds' splits.
  std::string split_file;
  std::string out_dir;

  SplitParams split;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool use_pu = true;
  PUConfig pu;
  CompatConfig compat;
  LPTrainConfig lp_train;

  /// Unknown keys raise Error(kConfiguration).
  static ExperimentConfig from_key_values(const KeyValues& kv,
                                          std::string base_dir);
  static ExperimentConfig load(const std::string& path);
  KeyValues to_key_values() const;
  std::string resolve(const std::string& path) const;
};

/// Parses "0-9", "3" or "1,4,7".
std::vector<std::uint64_t> parse_seeds(std::string_view text);

/// Runs split, training and evaluation once per seed and returns the full
/// report. The JSON depends only on the inputs, never on timing.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

}  // namespace kgi
