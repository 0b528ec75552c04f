#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgi/compat.hpp"
#include "kgi/error.hpp"
#include "kgi/kg_store.hpp"
#include "kgi/link_predictor.hpp"
#include "kgi/pipeline.hpp"
#include "kgi/pu.hpp"
#include "kgi/rmg.hpp"
#include "kgi/split.hpp"
#include "kgi/text.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kgi;

const std::string kData = KGI_DATA_DIR;

struct Shared {
  std::string compounds = kData + "/compounds.txt";
  std::string lemma_rules = kData + "/lemma_rules.txt";
  std::string pos_lexicon = kData + "/pos_lexicon.txt";
};

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

ConceptNormalizer make_normalizer(const std::string& rules) {
  return ConceptNormalizer(Lemmatizer::load(rules));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : split(s, ',')) {
    const auto p = trim(part);
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

std::vector<Intent> parse_intents(const std::vector<std::string>& labels,
                                  const CompoundLexicon& lexicon) {
  std::vector<Intent> out;
  for (const auto& l : labels) out.push_back(parse_intent(l, lexicon));
  std::sort(out.begin(), out.end());
  return out;
}

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << '\n';
}

/// A trained compat model with everything needed to run it again.
struct LoadedModel {
  std::map<std::string, std::string> meta;
  CompoundLexicon lexicon;
  ConceptNormalizer normalizer;
  std::shared_ptr<const WordVectors> words;
  std::unique_ptr<CompatModel> model;
  std::unique_ptr<LinkPredictorModel> lp;
  std::unique_ptr<RelationFeaturizer> featurizer;

  IntentCatalog catalog() const {
    return IntentCatalog(parse_intents(split_list(meta.at("seen")), lexicon),
                         parse_intents(split_list(meta.at("unseen")), lexicon));
  }
};

std::unique_ptr<LoadedModel> load_model(const std::string& path) {
  auto m = std::make_unique<LoadedModel>();
  m->meta = CompatModel::read_metadata(path);
  auto need = [&](const char* key) -> const std::string& {
    const auto it = m->meta.find(key);
    if (it == m->meta.end()) {
      throw Error(ErrorCode::kParse, path + " has no '" + key + "' metadata");
    }
    return it->second;
  };
  m->lexicon = CompoundLexicon::load(need("compounds"));
  m->normalizer = make_normalizer(need("lemma_rules"));
  m->words = std::make_shared<const WordVectors>(
      WordVectors::load(need("embeddings")));
  auto tagger = std::make_shared<const PosTagger>(
      PosTagger::load(need("pos_lexicon")));
  m->model = std::make_unique<CompatModel>(
      CompatModel::load(path, m->words, tagger));
  if (m->model->uses_relations()) {
    m->lp = std::make_unique<LinkPredictorModel>(
        LinkPredictorModel::load(need("lp")));
    m->featurizer = std::make_unique<RelationFeaturizer>(
        *m->lp, m->normalizer, m->model->config().max_n);
  }
  return m;
}

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--compounds", s.compounds, "compound lexicon")
      ->check(CLI::ExistingFile);
  app->add_option("--lemma-rules", s.lemma_rules, "lemmatizer rules")
      ->check(CLI::ExistingFile);
  app->add_option("--pos-lexicon", s.pos_lexicon, "POS lexicon")
      ->check(CLI::ExistingFile);
}

int run(int argc, char** argv) {
  CLI::App app{"Generalized zero-shot intent detection toolkit"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level,
                 "trace, debug, info, warn, error or off");
  Shared shared;

  // kg-import
  auto* kg_import = app.add_subcommand("kg-import", "normalize a TSV graph into a store");
  std::string triples_path, schema_path = kData + "/conceptnet_relations.schema",
                            store_out;
  kg_import->add_option("--triples", triples_path)->required()->check(CLI::ExistingFile);
  kg_import->add_option("--schema", schema_path)->check(CLI::ExistingFile);
  kg_import->add_option("--out", store_out)->required();
  add_shared(kg_import, shared);

  // lp-train
  auto* lp_train_cmd = app.add_subcommand("lp-train", "train the link predictor");
  std::string kg_path, lp_out;
  LPTrainConfig lp_cfg;
  lp_train_cmd->add_option("--kg", kg_path)->required()->check(CLI::ExistingFile);
  lp_train_cmd->add_option("--dim", lp_cfg.dim, "embedding size");
  lp_train_cmd->add_option("--epochs", lp_cfg.epochs);
  lp_train_cmd->add_option("--neg-ratio", lp_cfg.neg_ratio);
  lp_train_cmd->add_option("--learning-rate", lp_cfg.learning_rate);
  lp_train_cmd->add_option("--l2", lp_cfg.l2_lambda);
  lp_train_cmd->add_option("--batch-size", lp_cfg.batch_size);
  lp_train_cmd->add_option("--seed", lp_cfg.seed);
  lp_train_cmd->add_option("--out", lp_out)->required();

  // lp-score
  auto* lp_score = app.add_subcommand("lp-score", "probability of one triple");
  std::string lp_model, head, rel, tail;
  lp_score->add_option("--model", lp_model)->required()->check(CLI::ExistingFile);
  lp_score->add_option("--head", head)->required();
  lp_score->add_option("--rel", rel)->required();
  lp_score->add_option("--tail", tail)->required();
  add_shared(lp_score, shared);

  // rmg
  auto* rmg_cmd = app.add_subcommand("rmg", "relationship meta-features as JSON");
  std::string utterance, intent_label;
  std::size_t max_n = kDefaultMaxN;
  rmg_cmd->add_option("--model", lp_model)->required()->check(CLI::ExistingFile);
  rmg_cmd->add_option("--utterance", utterance)->required();
  rmg_cmd->add_option("--intent", intent_label)->required();
  rmg_cmd->add_option("--max-n", max_n);
  add_shared(rmg_cmd, shared);

  // split
  auto* split_cmd = app.add_subcommand("split", "seen/unseen split of a dataset");
  std::string data_path, split_out, mode = "gzs";
  SplitParams split_params;
  split_cmd->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--mode", mode, "zs or gzs");
  split_cmd->add_option("--seen-count", split_params.seen_count);
  split_cmd->add_option("--seen-fraction", split_params.seen_fraction);
  split_cmd->add_option("--train-fraction", split_params.train_fraction);
  split_cmd->add_option("--unlabeled-fraction", split_params.unlabeled_fraction);
  split_cmd->add_option("--seed", split_params.seed);
  split_cmd->add_option("--out", split_out)->required();
  add_shared(split_cmd, shared);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the compatibility model");
  std::string emb_path, config_path, model_out, unseen_list;
  train_cmd->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--kg", kg_path, "graph the link predictor was trained on");
  train_cmd->add_option("--lp", lp_model)->check(CLI::ExistingFile);
  train_cmd->add_option("--emb", emb_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", config_path)->check(CLI::ExistingFile);
  train_cmd->add_option("--unseen", unseen_list, "comma-separated unseen intents");
  train_cmd->add_option("--out", model_out)->required();
  add_shared(train_cmd, shared);

  // pu-train
  auto* pu_train_cmd = app.add_subcommand("pu-train", "train the seen/unseen gate");
  std::string positives_path, unlabeled_path, pu_out;
  PUConfig pu_cfg;
  pu_train_cmd->add_option("--positives", positives_path)->required()->check(CLI::ExistingFile);
  pu_train_cmd->add_option("--unlabeled", unlabeled_path)->required()->check(CLI::ExistingFile);
  pu_train_cmd->add_option("--emb", emb_path)->required()->check(CLI::ExistingFile);
  pu_train_cmd->add_option("--threshold", pu_cfg.threshold);
  pu_train_cmd->add_option("--seed", pu_cfg.seed);
  pu_train_cmd->add_option("--out", pu_out)->required();
  add_shared(pu_train_cmd, shared);

  // pu-predict
  auto* pu_predict_cmd = app.add_subcommand("pu-predict", "seen/unseen gate for one utterance");
  std::string pu_path;
  pu_predict_cmd->add_option("--model", pu_path)->required()->check(CLI::ExistingFile);
  pu_predict_cmd->add_option("--utterance", utterance)->required();
  pu_predict_cmd->add_option("--emb", emb_path, "overrides the stored vectors path");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "intent of one utterance");
  std::string model_path, candidates;
  predict_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--utterance", utterance)->required();
  predict_cmd->add_option("--candidates", candidates, "comma-separated intents");
  predict_cmd->add_option("--pu", pu_path, "gate model")->check(CLI::ExistingFile);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "metrics on a labeled set");
  std::string report_out;
  eval_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pu", pu_path, "gate model")->check(CLI::ExistingFile);
  eval_cmd->add_option("--json", report_out, "also write the report as JSON");

  // run-experiment
  auto* exp_cmd = app.add_subcommand("run-experiment", "full pipeline from a config file");
  std::string seeds;
  exp_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--seeds", seeds, "e.g. 0-9 or 1,3");
  exp_cmd->add_option("--out", report_out, "report path; stdout when omitted");

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("kgi");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  if (*kg_import) {
    const auto normalizer = make_normalizer(shared.lemma_rules);
    const auto vocab = RelationVocab::load(schema_path);
    std::ifstream in(triples_path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + triples_path);
    KnowledgeStore store{vocab, parse_triples(in, vocab, &normalizer)};
    const auto gaps = schema_closure_check(store.triples, vocab);
    if (!gaps.empty()) {
      spdlog::info("{} triples implied by the schema are absent", gaps.size());
    }
    store.save(store_out);
    std::cout << json{{"triples", store.triples.size()},
                      {"entities", store.triples.entities().size()},
                      {"relations", vocab.size()}}
                     .dump()
              << '\n';
  } else if (*lp_train_cmd) {
    const auto store = KnowledgeStore::load(kg_path);
    LPTrainReport report;
    const auto model = lp_train(store.triples, store.vocab, lp_cfg, &report);
    model.save(lp_out);
    std::cout << json{{"entities", model.entity_count()},
                      {"epochs", report.epoch_loss.size()},
                      {"final_loss", report.epoch_loss.back()}}
                     .dump()
              << '\n';
  } else if (*lp_score) {
    const auto normalizer = make_normalizer(shared.lemma_rules);
    const auto model = LinkPredictorModel::load(lp_model);
    const auto h = normalizer.normalize(head);
    const auto t = normalizer.normalize(tail);
    std::cout << json{{"head", h},
                      {"relation", rel},
                      {"tail", t},
                      {"score", model.score(h, rel, t)},
                      {"probability", model.probability(h, rel, t)}}
                     .dump()
              << '\n';
  } else if (*rmg_cmd) {
    const auto normalizer = make_normalizer(shared.lemma_rules);
    const auto lexicon = CompoundLexicon::load(shared.compounds);
    const auto model = LinkPredictorModel::load(lp_model);
    const auto intent = parse_intent(intent_label, lexicon);
    const auto phrases = utterance_phrases(utterance, max_n, normalizer);
    const auto v = relationship_meta_features(phrases, intent, model, normalizer);
    std::cout << json{{"relations", model.vocab().relations()},
                      {"layout", {"action_out", "object_out", "action_in", "object_in"}},
                      {"features", std::vector<double>(v.begin(), v.end())}}
                     .dump()
              << '\n';
  } else if (*split_cmd) {
    const auto lexicon = CompoundLexicon::load(shared.compounds);
    split_params.mode = parse_split_mode(mode);
    const auto s = make_split(Dataset::load(data_path, lexicon), split_params);
    s.save(split_out);
    std::cout << json{{"seen", s.seen},
                      {"unseen", s.unseen},
                      {"train", s.train.size()},
                      {"test", s.test.size()},
                      {"unlabeled", s.unlabeled.size()}}
                     .dump()
              << '\n';
  } else if (*train_cmd) {
    const auto lexicon = CompoundLexicon::load(shared.compounds);
    const auto normalizer = make_normalizer(shared.lemma_rules);
    const auto ds = Dataset::load(data_path, lexicon);
    CompatConfig cfg;
    if (!config_path.empty()) {
      for (const auto& [k, v] : load_key_values(config_path)) {
        if (!cfg.set(k, v)) {
          throw Error(ErrorCode::kConfiguration, "unknown config key '" + k + "'");
        }
      }
      cfg.validate();
    }
    const auto unseen_labels = split_list(unseen_list);
    std::vector<std::string> seen_labels;
    for (const auto& l : ds.intents()) {
      if (std::find(unseen_labels.begin(), unseen_labels.end(), l) ==
          unseen_labels.end()) {
        seen_labels.push_back(l);
      }
    }
    const IntentCatalog catalog(parse_intents(seen_labels, lexicon),
                                parse_intents(unseen_labels, lexicon));
    auto words = std::make_shared<const WordVectors>(WordVectors::load(emb_path));
    auto tagger = std::make_shared<const PosTagger>(PosTagger::load(shared.pos_lexicon));
    std::unique_ptr<LinkPredictorModel> lp;
    std::unique_ptr<RelationFeaturizer> featurizer;
    if (cfg.features != FeatureSet::kEmbeddingOnly) {
      if (lp_model.empty()) {
        throw Error(ErrorCode::kConfiguration,
                    "--lp is required unless features = embed-only");
      }
      lp = std::make_unique<LinkPredictorModel>(LinkPredictorModel::load(lp_model));
      featurizer = std::make_unique<RelationFeaturizer>(*lp, normalizer, cfg.max_n);
    }
    Rng rng(cfg.seed);
    const auto examples = build_training_set(ds.records(), catalog, cfg.neg_ratio, rng);
    CompatModel model(cfg, words, tagger, lp ? lp->relation_count() : 0);
    model.init(rng);
    const auto report = train_compat(examples, model, featurizer.get());
    model.metadata = {{"embeddings", absolute(emb_path)},
                      {"lp", absolute(lp_model)},
                      {"kg", absolute(kg_path)},
                      {"compounds", absolute(shared.compounds)},
                      {"lemma_rules", absolute(shared.lemma_rules)},
                      {"pos_lexicon", absolute(shared.pos_lexicon)},
                      {"seen", join(seen_labels, ",")},
                      {"unseen", join(unseen_labels, ",")}};
    model.save(model_out);
    std::cout << json{{"examples", examples.size()},
                      {"epochs_run", report.train_loss.size()},
                      {"best_epoch", report.best_epoch},
                      {"stopped_early", report.stopped_early}}
                     .dump()
              << '\n';
  } else if (*pu_train_cmd) {
    const auto lexicon = CompoundLexicon::load(shared.compounds);
    const auto words = WordVectors::load(emb_path);
    auto texts = [&](const std::string& path) {
      const auto ds = Dataset::load(path, lexicon);
      std::vector<std::string> out;
      for (const auto& r : ds.records()) out.push_back(r.text);
      return out;
    };
    auto pu = pu_train(texts(positives_path), texts(unlabeled_path), words, pu_cfg);
    pu.embedding_path = absolute(emb_path);
    pu.save(pu_out);
    std::cout << json{{"c", pu.c()}, {"threshold", pu.threshold()}}.dump() << '\n';
  } else if (*pu_predict_cmd) {
    const auto pu = PUModel::load(pu_path);
    const auto words =
        WordVectors::load(emb_path.empty() ? pu.embedding_path : emb_path);
    const auto p = predict_seen(utterance, pu, words);
    std::cout << json{{"probability", p.probability},
                      {"gate", p.gate == Gate::kSeen ? "seen" : "unseen"}}
                     .dump()
              << '\n';
  } else if (*predict_cmd) {
    const auto m = load_model(model_path);
    json out;
    if (!candidates.empty()) {
      const auto cands = parse_intents(split_list(candidates), m->lexicon);
      const auto best = classify(utterance, cands, *m->model, m->featurizer.get());
      out["intent"] = best.raw;
    } else {
      std::unique_ptr<PUModel> pu;
      if (!pu_path.empty()) pu = std::make_unique<PUModel>(PUModel::load(pu_path));
      const auto r = gzs_predict(utterance, pu.get(), *m->words, *m->model,
                                 m->catalog(), m->featurizer.get());
      out["intent"] = r.intent.raw;
      if (r.gate) {
        out["gate"] = r.gate->gate == Gate::kSeen ? "seen" : "unseen";
        out["gate_probability"] = r.gate->probability;
      }
    }
    out["probability"] =
        predict_compat(utterance, parse_intent(out["intent"].get<std::string>(), m->lexicon),
                       *m->model, m->featurizer.get());
    std::cout << out.dump() << '\n';
  } else if (*eval_cmd) {
    const auto m = load_model(model_path);
    const auto catalog = m->catalog();
    std::unique_ptr<PUModel> pu;
    if (!pu_path.empty()) pu = std::make_unique<PUModel>(PUModel::load(pu_path));
    const auto ds = Dataset::load(data_path, m->lexicon);
    std::vector<std::string> pred;
    std::vector<std::string> gold;
    for (const auto& r : ds.records()) {
      pred.push_back(gzs_predict(r.text, pu.get(), *m->words, *m->model, catalog,
                                 m->featurizer.get())
                         .intent.raw);
      gold.push_back(r.intent);
    }
    std::set<std::string> seen;
    for (const auto& i : catalog.seen()) seen.insert(i.raw);
    const auto report = evaluate(pred, gold, seen);
    std::cout << format_report(report);
    if (!report_out.empty()) emit(to_json(report), report_out);
  } else if (*exp_cmd) {
    auto cfg = ExperimentConfig::load(config_path);
    if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
    emit(run_experiment(cfg), report_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const kgi::Error& e) {
    std::cerr << "kgi: " << kgi::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kgi: " << e.what() << '\n';
    return 1;
  }
}
