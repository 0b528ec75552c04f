#include "kgi/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "kgi/error.hpp"
#include "kgi/link_predictor.hpp"

namespace kgi {
namespace {

nlohmann::json records_json(const std::vector<Record>& rs) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back({{"text", r.text}, {"intent", r.intent}});
  return arr;
}

std::vector<Record> records_from(const nlohmann::json& arr) {
  std::vector<Record> out;
  for (const auto& j : arr) {
    out.push_back({j.at("text").get<std::string>(),
                   j.at("intent").get<std::string>()});
  }
  return out;
}

}  // namespace

const char* to_string(SplitMode m) {
  return m == SplitMode::kZeroShot ? "zs" : "gzs";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "zs") return SplitMode::kZeroShot;
  if (name == "gzs") return SplitMode::kGeneralized;
  throw Error(ErrorCode::kConfiguration,
              "unknown split mode '" + std::string(name) + "' (zs or gzs)");
}

IntentCatalog Split::catalog(const CompoundLexicon& lexicon) const {
  std::vector<Intent> s;
  std::vector<Intent> u;
  for (const auto& l : seen) s.push_back(parse_intent(l, lexicon));
  for (const auto& l : unseen) u.push_back(parse_intent(l, lexicon));
  return IntentCatalog(std::move(s), std::move(u));
}

void Split::save(const std::string& path) const {
  const nlohmann::json j = {{"seed", seed},
                            {"seen", seen},
                            {"unseen", unseen},
                            {"train", records_json(train)},
                            {"test", records_json(test)},
                            {"unlabeled", records_json(unlabeled)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(1) << '\n';
}

Split Split::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open split " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    Split s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.seen = j.at("seen").get<std::vector<std::string>>();
    s.unseen = j.at("unseen").get<std::vector<std::string>>();
    s.train = records_from(j.at("train"));
    s.test = records_from(j.at("test"));
    if (j.contains("unlabeled")) s.unlabeled = records_from(j.at("unlabeled"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "bad split file " + path + ": " + e.what());
  }
}

Split make_split(const Dataset& ds, const SplitParams& params) {
  auto intents = ds.intents();
  const std::size_t n = intents.size();
  std::size_t k = params.seen_count;
  if (k == 0) {
    k = static_cast<std::size_t>(
        std::llround(params.seen_fraction * static_cast<double>(n)));
  }
  if (n < 2 || k == 0 || k >= n) {
    throw Error(ErrorCode::kConfiguration,
                "cannot place " + std::to_string(k) + " of " +
                    std::to_string(n) +
                    " intents in the seen set and keep one unseen");
  }
  if (!(params.train_fraction > 0.0 && params.train_fraction <= 1.0) ||
      !(params.unlabeled_fraction >= 0.0 && params.unlabeled_fraction < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "split fractions out of range");
  }
  Rng rng(params.seed);
  std::shuffle(intents.begin(), intents.end(), rng);
  Split s;
  s.seed = params.seed;
  s.seen.assign(intents.begin(), intents.begin() + static_cast<long>(k));
  s.unseen.assign(intents.begin() + static_cast<long>(k), intents.end());
  std::sort(s.seen.begin(), s.seen.end());
  std::sort(s.unseen.begin(), s.unseen.end());
  const std::set<std::string> seen(s.seen.begin(), s.seen.end());

  std::vector<Record> seen_recs;
  std::vector<Record> unseen_recs;
  for (const auto& r : ds.records()) {
    (seen.contains(r.intent) ? seen_recs : unseen_recs).push_back(r);
  }
  if (params.mode == SplitMode::kZeroShot) {
    s.train = std::move(seen_recs);
    s.test = std::move(unseen_recs);
  } else {
    std::shuffle(seen_recs.begin(), seen_recs.end(), rng);
    const auto t = static_cast<std::size_t>(std::llround(
        params.train_fraction * static_cast<double>(seen_recs.size())));
    s.train.assign(seen_recs.begin(), seen_recs.begin() + static_cast<long>(t));
    s.test.assign(seen_recs.begin() + static_cast<long>(t), seen_recs.end());
    s.test.insert(s.test.end(), unseen_recs.begin(), unseen_recs.end());
  }
  std::shuffle(s.test.begin(), s.test.end(), rng);
  const auto u = static_cast<std::size_t>(std::llround(
      params.unlabeled_fraction * static_cast<double>(s.test.size())));
  s.unlabeled.assign(s.test.begin(), s.test.begin() + static_cast<long>(u));
  s.test.erase(s.test.begin(), s.test.begin() + static_cast<long>(u));
  return s;
}

}  // namespace kgi
