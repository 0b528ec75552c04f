#include "kgi/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

namespace fs = std::filesystem;

nlohmann::json weighted_json(const WeightedMetrics& w) {
  return {{"support", w.support},     {"accuracy", w.accuracy},
          {"precision", w.precision}, {"recall", w.recall},
          {"f1", w.f1}};
}

struct Resources {
  CompoundLexicon lexicon;
  ConceptNormalizer normalizer;
  std::shared_ptr<const WordVectors> words;
  std::shared_ptr<const PosTagger> tagger;
  LinkPredictorModel lp;
};

Resources load_resources(const ExperimentConfig& cfg) {
  Resources r;
  r.lexicon = CompoundLexicon::load(cfg.resolve(cfg.compounds));
  r.normalizer =
      ConceptNormalizer(Lemmatizer::load(cfg.resolve(cfg.lemma_rules)));
  r.words = std::make_shared<const WordVectors>(
      WordVectors::load(cfg.resolve(cfg.embeddings)));
  r.tagger = std::make_shared<const PosTagger>(
      PosTagger::load(cfg.resolve(cfg.pos_lexicon)));
  if (cfg.compat.features == FeatureSet::kEmbeddingOnly) return r;
  if (!cfg.lp.empty()) {
    r.lp = LinkPredictorModel::load(cfg.resolve(cfg.lp));
  } else if (!cfg.kg.empty()) {
    const auto store = KnowledgeStore::load(cfg.resolve(cfg.kg));
    r.lp = lp_train(store.triples, store.vocab, cfg.lp_train);
    if (!cfg.out_dir.empty()) {
      fs::create_directories(cfg.resolve(cfg.out_dir));
      r.lp.save(cfg.resolve(cfg.out_dir) + "/lp.ckpt");
    }
  } else {
    throw Error(ErrorCode::kConfiguration,
                "config needs `lp` or `kg` for relationship meta-features");
  }
  return r;
}

/// Share of held-out seen-intent records whose true intent outscores one
/// corrupted intent.
double pair_ranking(const std::vector<Record>& test, const IntentCatalog& cat,
                    const CompatModel& model,
                    const RelationFeaturizer* featurizer, std::uint64_t seed) {
  Rng rng(seed);
  const std::array modes = {CorruptionMode::kAction, CorruptionMode::kObject,
                            CorruptionMode::kBoth};
  std::size_t total = 0;
  std::size_t wins = 0;
  for (const auto& r : test) {
    const Intent* intent = cat.find(r.intent);
    if (intent == nullptr || !cat.is_seen(r.intent)) continue;
    Intent neg;
    bool found = false;
    for (std::size_t k = 0; k < 3 && !found; ++k) {
      try {
        neg = corrupt_intent(*intent, cat, modes[(total + k) % 3], rng);
        found = true;
      } catch (const Error&) {
      }
    }
    if (!found) continue;
    ++total;
    if (predict_compat(r.text, *intent, model, featurizer) >
        predict_compat(r.text, neg, model, featurizer)) {
      ++wins;
    }
  }
  return total == 0 ? 0.0
                    : static_cast<double>(wins) / static_cast<double>(total);
}

nlohmann::json summarize(const std::vector<nlohmann::json>& runs,
                         const std::string& variant) {
  nlohmann::json mean;
  for (const char* group : {"seen", "unseen", "overall"}) {
    for (const char* metric : {"accuracy", "f1"}) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : runs) {
        if (!r.contains(variant)) continue;
        sum += r[variant][group][metric].get<double>();
        ++n;
      }
      if (n > 0) mean[group][metric] = sum / static_cast<double>(n);
    }
  }
  return mean;
}

}  // namespace

GzsResult gzs_predict(std::string_view utterance, const PUModel* pu,
                      const WordVectors& words, const CompatModel& model,
                      const IntentCatalog& catalog,
                      const RelationFeaturizer* featurizer) {
  if (catalog.total_count() == 0) {
    throw Error(ErrorCode::kConfiguration, "intent catalog is empty");
  }
  GzsResult out;
  std::vector<Intent> candidates;
  if (pu != nullptr) {
    out.gate = predict_seen(utterance, *pu, words);
    candidates =
        out.gate->gate == Gate::kSeen ? catalog.seen() : catalog.unseen();
  }
  if (candidates.empty()) candidates = catalog.all();
  out.intent = classify(utterance, candidates, model, featurizer);
  return out;
}

nlohmann::json to_json(const MetricsReport& report) {
  auto classes = nlohmann::json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"label", c.label},
                       {"support", c.support},
                       {"accuracy", c.accuracy},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1}});
  }
  return {{"classes", classes},
          {"seen", weighted_json(report.seen)},
          {"unseen", weighted_json(report.unseen)},
          {"overall", weighted_json(report.overall)}};
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    const auto p = trim(part);
    const auto dash = p.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_u64("seeds", p));
      continue;
    }
    const auto lo = parse_u64("seeds", p.substr(0, dash));
    const auto hi = parse_u64("seeds", p.substr(dash + 1));
    if (hi < lo) throw Error(ErrorCode::kConfiguration, "empty seed range");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::kConfiguration, "no seeds given");
  return out;
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv,
                                                   std::string base_dir) {
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  const std::string data = KGI_DATA_DIR;
  c.compounds = data + "/compounds.txt";
  c.lemma_rules = data + "/lemma_rules.txt";
  c.pos_lexicon = data + "/pos_lexicon.txt";
  for (const auto& [k, v] : kv) {
    if (k == "dataset") c.dataset = v;
    else if (k == "lp") c.lp = v;
    else if (k == "kg") c.kg = v;
    else if (k == "embeddings") c.embeddings = v;
    else if (k == "compounds") c.compounds = v;
    else if (k == "lemma_rules") c.lemma_rules = v;
    else if (k == "pos_lexicon") c.pos_lexicon = v;
    else if (k == "split_file") c.split_file = v;
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "mode") c.split.mode = parse_split_mode(v);
    else if (k == "seen_count") c.split.seen_count = parse_size(k, v);
    else if (k == "seen_fraction") c.split.seen_fraction = parse_real(k, v);
    else if (k == "train_fraction") c.split.train_fraction = parse_real(k, v);
    else if (k == "unlabeled_fraction") c.split.unlabeled_fraction = parse_real(k, v);
    else if (k == "seeds") c.seeds = parse_seeds(v);
    else if (k == "use_pu") c.use_pu = parse_flag(k, v);
    else if (k == "pu_threshold") c.pu.threshold = parse_real(k, v);
    else if (k == "pu_calibration_fraction") c.pu.calibration_fraction = parse_real(k, v);
    else if (k == "pu_l2") c.pu.logistic.l2 = parse_real(k, v);
    else if (k == "lp_dim") c.lp_train.dim = parse_size(k, v);
    else if (k == "lp_epochs") c.lp_train.epochs = parse_size(k, v);
    else if (k == "lp_neg_ratio") c.lp_train.neg_ratio = parse_size(k, v);
    else if (k == "lp_learning_rate") c.lp_train.learning_rate = parse_real(k, v);
    else if (k == "lp_l2") c.lp_train.l2_lambda = parse_real(k, v);
    else if (k == "lp_batch_size") c.lp_train.batch_size = parse_size(k, v);
    else if (k == "lp_seed") c.lp_train.seed = parse_u64(k, v);
    else if (!c.compat.set(k, v)) {
      throw Error(ErrorCode::kConfiguration, "unknown config key '" + k + "'");
    }
  }
  if (c.dataset.empty() && c.split_file.empty()) {
    throw Error(ErrorCode::kConfiguration, "config needs `dataset` or `split_file`");
  }
  if (c.embeddings.empty()) {
    throw Error(ErrorCode::kConfiguration, "config needs `embeddings`");
  }
  c.compat.validate();
  c.lp_train.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_key_values(load_key_values(path),
                         fs::path(path).parent_path().string());
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv = {
      {"dataset", dataset},
      {"lp", lp},
      {"kg", kg},
      {"embeddings", embeddings},
      {"split_file", split_file},
      {"mode", to_string(split.mode)},
      {"seen_count", std::to_string(split.seen_count)},
      {"seen_fraction", format_real(split.seen_fraction)},
      {"train_fraction", format_real(split.train_fraction)},
      {"unlabeled_fraction", format_real(split.unlabeled_fraction)},
      {"use_pu", use_pu ? "true" : "false"},
      {"pu_threshold", format_real(pu.threshold)},
      {"pu_calibration_fraction", format_real(pu.calibration_fraction)},
      {"pu_l2", format_real(pu.logistic.l2)},
  };
  if (lp.empty()) {
    kv.insert(kv.end(),
              {{"lp_dim", std::to_string(lp_train.dim)},
               {"lp_epochs", std::to_string(lp_train.epochs)},
               {"lp_neg_ratio", std::to_string(lp_train.neg_ratio)},
               {"lp_learning_rate", format_real(lp_train.learning_rate)},
               {"lp_l2", format_real(lp_train.l2_lambda)},
               {"lp_batch_size", std::to_string(lp_train.batch_size)},
               {"lp_seed", std::to_string(lp_train.seed)}});
  }
  for (auto& p : compat.to_pairs()) {
    if (p.first != "seed") kv.push_back(std::move(p));
  }
  return kv;
}

std::string ExperimentConfig::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir.empty() ? "." : base_dir) / path)
      .lexically_normal()
      .string();
}

nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  auto res = load_resources(cfg);
  std::optional<Dataset> ds;
  if (!cfg.dataset.empty()) ds = Dataset::load(cfg.resolve(cfg.dataset), res.lexicon);
  std::optional<Split> fixed;
  if (!cfg.split_file.empty()) fixed = Split::load(cfg.resolve(cfg.split_file));
  const bool relations = cfg.compat.features != FeatureSet::kEmbeddingOnly;
  std::optional<RelationFeaturizer> featurizer;
  if (relations) featurizer.emplace(res.lp, res.normalizer, cfg.compat.max_n);
  const RelationFeaturizer* feat = featurizer ? &*featurizer : nullptr;
  const std::size_t relation_count = relations ? res.lp.relation_count() : 0;
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.resolve(cfg.out_dir));

  nlohmann::json report;
  auto& config_json = report["config"];
  for (const auto& [k, v] : cfg.to_key_values()) config_json[k] = v;
  std::vector<nlohmann::json> runs;
  for (const auto seed : cfg.seeds) {
    auto params = cfg.split;
    params.seed = seed;
    const Split split = fixed ? *fixed : make_split(*ds, params);
    const auto catalog = split.catalog(res.lexicon);
    spdlog::info("seed {}: {} seen / {} unseen intents, {} train, {} test",
                 seed, split.seen.size(), split.unseen.size(),
                 split.train.size(), split.test.size());

    auto ccfg = cfg.compat;
    ccfg.seed = seed;
    Rng rng(seed);
    const auto examples =
        build_training_set(split.train, catalog, ccfg.neg_ratio, rng);
    CompatModel model(ccfg, res.words, res.tagger, relation_count);
    model.init(rng);
    const auto train_report = train_compat(examples, model, feat);

    nlohmann::json run;
    run["seed"] = seed;
    run["seen"] = split.seen;
    run["unseen"] = split.unseen;
    run["sizes"] = {{"train", split.train.size()},
                    {"test", split.test.size()},
                    {"unlabeled", split.unlabeled.size()},
                    {"examples", examples.size()}};
    run["training"] = {{"epochs_run", train_report.train_loss.size()},
                       {"best_epoch", train_report.best_epoch},
                       {"best_valid_loss",
                        train_report.valid_loss[train_report.best_epoch - 1]}};
    run["pair_ranking"] = pair_ranking(split.test, catalog, model, feat, seed);

    std::vector<std::string> gold;
    for (const auto& r : split.test) gold.push_back(r.intent);
    const std::set<std::string> seen_set(split.seen.begin(), split.seen.end());
    auto predict_all = [&](const PUModel* pu, const std::vector<Intent>* only) {
      std::vector<std::string> pred;
      for (const auto& r : split.test) {
        pred.push_back(only != nullptr
                           ? classify(r.text, *only, model, feat).raw
                           : gzs_predict(r.text, pu, *res.words, model,
                                         catalog, feat)
                                 .intent.raw);
      }
      return pred;
    };

    if (cfg.split.mode == SplitMode::kZeroShot) {
      const auto pred = predict_all(nullptr, &catalog.unseen());
      run["zero_shot"] = to_json(evaluate(pred, gold, seen_set));
    } else {
      const auto pred = predict_all(nullptr, nullptr);
      run["without_pu"] = to_json(evaluate(pred, gold, seen_set));
      if (cfg.use_pu) {
        std::vector<std::string> positives;
        std::vector<std::string> unlabeled;
        for (const auto& r : split.train) positives.push_back(r.text);
        for (const auto& r : split.unlabeled) unlabeled.push_back(r.text);
        auto pcfg = cfg.pu;
        pcfg.seed = seed;
        const auto pu = pu_train(positives, unlabeled, *res.words, pcfg);
        std::array<std::size_t, 2> gate_total{};
        std::array<std::size_t, 2> gate_ok{};
        for (const auto& r : split.test) {
          const bool truth = seen_set.contains(r.intent);
          const bool seen =
              predict_seen(r.text, pu, *res.words).gate == Gate::kSeen;
          ++gate_total[truth ? 0 : 1];
          gate_ok[truth ? 0 : 1] += seen == truth ? 1 : 0;
        }
        auto ratio = [](std::size_t a, std::size_t b) {
          return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
        };
        run["pu"] = {
            {"c", pu.c()},
            {"gate_accuracy", ratio(gate_ok[0] + gate_ok[1],
                                    gate_total[0] + gate_total[1])},
            {"seen_recall", ratio(gate_ok[0], gate_total[0])},
            {"unseen_recall", ratio(gate_ok[1], gate_total[1])}};
        const auto pred_pu = predict_all(&pu, nullptr);
        run["with_pu"] = to_json(evaluate(pred_pu, gold, seen_set));
        if (!cfg.out_dir.empty()) {
          pu.save(cfg.resolve(cfg.out_dir) + "/pu_seed" + std::to_string(seed) + ".ckpt");
        }
      }
    }
    if (!cfg.out_dir.empty()) {
      const auto dir = cfg.resolve(cfg.out_dir);
      split.save(dir + "/split_seed" + std::to_string(seed) + ".json");
      auto absolute = [&](const std::string& path) {
        return path.empty() ? path
                            : fs::absolute(cfg.resolve(path)).lexically_normal().string();
      };
      model.metadata = {
          {"embeddings", absolute(cfg.embeddings)},
          {"lp", absolute(cfg.lp.empty() ? cfg.out_dir + "/lp.ckpt" : cfg.lp)},
          {"kg", absolute(cfg.kg)},
          {"compounds", absolute(cfg.compounds)},
          {"lemma_rules", absolute(cfg.lemma_rules)},
          {"pos_lexicon", absolute(cfg.pos_lexicon)},
          {"seen", join(split.seen, ",")},
          {"unseen", join(split.unseen, ",")}};
      model.save(dir + "/compat_seed" + std::to_string(seed) + ".ckpt");
    }
    runs.push_back(std::move(run));
  }
  report["runs"] = runs;
  auto& mean = report["mean"];
  for (const char* variant : {"zero_shot", "without_pu", "with_pu"}) {
    auto m = summarize(runs, variant);
    if (!m.is_null()) mean[variant] = std::move(m);
  }
  return report;
}

}  // namespace kgi
