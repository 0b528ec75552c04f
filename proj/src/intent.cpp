#include "kgi/intent.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

[[noreturn]] void unparseable(std::string_view label, const char* why) {
  throw Error(ErrorCode::kUnparseableIntent,
              "cannot parse intent '" + std::string(label) + "': " + why);
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

}  // namespace

CompoundLexicon CompoundLexicon::parse(std::istream& in) {
  std::set<std::string> entries;
  for (std::string line; std::getline(in, line);) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    entries.emplace(body);
  }
  return CompoundLexicon(std::move(entries));
}

CompoundLexicon CompoundLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open compound lexicon " + path);
  return parse(in);
}

std::string Intent::object() const {
  std::string out;
  for (const auto& p : object_parts) out += p;
  return out;
}

std::vector<std::string> Intent::label_tokens() const {
  return split_camel(raw);
}

std::string Intent::action_concept(const ConceptNormalizer& normalizer) const {
  return normalizer.normalize(join(split_camel(action), " "));
}

std::vector<std::string> Intent::object_concepts(
    const ConceptNormalizer& normalizer) const {
  std::vector<std::string> out;
  out.reserve(object_parts.size());
  for (const auto& part : object_parts) {
    out.push_back(normalizer.normalize(join(split_camel(part), " ")));
  }
  return out;
}

Intent parse_intent(std::string_view label, const CompoundLexicon& lexicon) {
  if (label.empty()) unparseable(label, "empty label");
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) == 0) {
      unparseable(label, "labels are ASCII camel case");
    }
  }
  if (std::isupper(static_cast<unsigned char>(label.front())) == 0) {
    unparseable(label, "label must start with a capital letter");
  }
  const auto segments = split_camel(label);
  if (segments.size() < 2) unparseable(label, "needs an Action and an Object");

  Intent intent;
  intent.raw = std::string(label);
  intent.action = segments[0];
  std::size_t i = 1;
  while (i < segments.size()) {
    std::size_t best_end = i + 1;
    std::string joined = segments[i];
    std::string best = joined;
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      joined += segments[j];
      if (lexicon.contains(joined)) {
        best = joined;
        best_end = j + 1;
      }
    }
    intent.object_parts.push_back(best);
    i = best_end;
  }
  return intent;
}

Intent compose_intent(std::string action,
                      std::vector<std::string> object_parts) {
  Intent intent;
  intent.action = std::move(action);
  intent.object_parts = std::move(object_parts);
  intent.raw = intent.action + intent.object();
  return intent;
}

IntentCatalog::IntentCatalog(std::vector<Intent> seen,
                             std::vector<Intent> unseen)
    : seen_(std::move(seen)), unseen_(std::move(unseen)) {
  std::set<std::string> labels;
  for (const auto* group : {&seen_, &unseen_}) {
    for (const auto& intent : *group) {
      if (!labels.insert(intent.raw).second) {
        throw Error(ErrorCode::kConfiguration,
                    "intent '" + intent.raw +
                        "' appears twice or in both seen and unseen sets");
      }
    }
  }
}

std::vector<Intent> IntentCatalog::all() const {
  std::vector<Intent> out = seen_;
  out.insert(out.end(), unseen_.begin(), unseen_.end());
  return out;
}

bool IntentCatalog::is_seen(std::string_view label) const {
  return std::any_of(seen_.begin(), seen_.end(),
                     [&](const Intent& i) { return i.raw == label; });
}

bool IntentCatalog::is_unseen(std::string_view label) const {
  return std::any_of(unseen_.begin(), unseen_.end(),
                     [&](const Intent& i) { return i.raw == label; });
}

const Intent* IntentCatalog::find(std::string_view label) const {
  for (const auto* group : {&seen_, &unseen_}) {
    for (const auto& intent : *group) {
      if (intent.raw == label) return &intent;
    }
  }
  return nullptr;
}

const char* to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::kAction: return "action";
    case CorruptionMode::kObject: return "object";
    case CorruptionMode::kBoth: return "both";
  }
  return "unknown";
}

Intent corrupt_intent(const Intent& src, const IntentCatalog& pool,
                      CorruptionMode mode, Rng& rng) {
  std::set<std::string> action_set;
  std::set<std::vector<std::string>> object_set;
  for (const auto& intent : pool.seen()) {
    if (intent.action != src.action) action_set.insert(intent.action);
    if (intent.object_parts != src.object_parts) {
      object_set.insert(intent.object_parts);
    }
  }
  const std::vector<std::string> actions(action_set.begin(), action_set.end());
  const std::vector<std::vector<std::string>> objects(object_set.begin(),
                                                      object_set.end());
  const bool new_action = mode != CorruptionMode::kObject;
  const bool new_object = mode != CorruptionMode::kAction;
  if ((new_action && actions.empty()) || (new_object && objects.empty())) {
    throw Error(ErrorCode::kCorruptionInfeasible,
                std::string("seen intents offer no alternative for ") +
                    to_string(mode) + " corruption of '" + src.raw + "'");
  }
  std::string action = new_action ? pick(actions, rng) : src.action;
  std::vector<std::string> object =
      new_object ? pick(objects, rng) : src.object_parts;
  return compose_intent(std::move(action), std::move(object));
}

}  // namespace kgi
