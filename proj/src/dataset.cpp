#include "kgi/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {

Dataset::Dataset(std::string name, std::vector<Record> records)
    : name_(std::move(name)), records_(std::move(records)) {}

Dataset Dataset::parse_jsonl(std::istream& in, std::string name,
                             const CompoundLexicon& lexicon) {
  std::vector<Record> records;
  std::unordered_set<std::string> checked;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
    for (const char* key : {"text", "intent"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        throw ParseError(line_no,
                         std::string("missing string field \"") + key + "\"");
      }
    }
    Record r{j["text"].get<std::string>(), j["intent"].get<std::string>()};
    if (checked.insert(r.intent).second) {
      try {
        parse_intent(r.intent, lexicon);
      } catch (const Error& e) {
        throw Error(e.code(),
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    records.push_back(std::move(r));
  }
  return Dataset(std::move(name), std::move(records));
}

Dataset Dataset::load(const std::string& path, const CompoundLexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path);
  return parse_jsonl(in, std::filesystem::path(path).stem().string(), lexicon);
}

void Dataset::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) {
    out << nlohmann::json{{"text", r.text}, {"intent", r.intent}}.dump()
        << '\n';
  }
}

void Dataset::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_jsonl(out);
}

DatasetStats Dataset::stats() const {
  DatasetStats s;
  s.size = records_.size();
  std::unordered_set<std::string> vocab;
  std::size_t tokens = 0;
  for (const auto& r : records_) {
    const auto toks = tokenize(r.text);
    tokens += toks.size();
    vocab.insert(toks.begin(), toks.end());
  }
  s.vocab_size = vocab.size();
  s.avg_length = s.size == 0 ? 0.0
                             : static_cast<double>(tokens) /
                                   static_cast<double>(s.size);
  s.intent_count = intents().size();
  return s;
}

std::vector<std::string> Dataset::intents() const {
  std::set<std::string> labels;
  for (const auto& r : records_) labels.insert(r.intent);
  return {labels.begin(), labels.end()};
}

}  // namespace kgi
