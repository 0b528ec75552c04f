#include "kgi/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

constexpr std::string_view kStoreMagic = "# kgi-store v1";
constexpr std::string_view kRelationPrefix = "#!relation ";

}  // namespace

RelationVocab::RelationVocab(
    std::vector<std::string> relations,
    const std::vector<std::string>& symmetric,
    const std::vector<std::pair<std::string, std::string>>& inverse_pairs)
    : relations_(std::move(relations)) {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].empty()) {
      throw Error(ErrorCode::kSchema, "empty relation name");
    }
    if (!index_.emplace(relations_[i], i).second) {
      throw Error(ErrorCode::kSchema,
                  "duplicate relation '" + relations_[i] + "'");
    }
  }
  symmetric_.assign(relations_.size(), false);
  for (const auto& name : symmetric) symmetric_[require(name)] = true;

  std::vector<bool> paired(relations_.size(), false);
  for (const auto& [a_name, b_name] : inverse_pairs) {
    std::size_t a = require(a_name);
    std::size_t b = require(b_name);
    if (a == b) {
      throw Error(ErrorCode::kSchema, "relation '" + a_name +
                                          "' cannot be its own inverse; "
                                          "mark it symmetric instead");
    }
    if (a > b) std::swap(a, b);
    const auto pair = std::make_pair(a, b);
    if (std::find(inverse_pairs_.begin(), inverse_pairs_.end(), pair) !=
        inverse_pairs_.end()) {
      continue;
    }
    for (std::size_t r : {a, b}) {
      if (symmetric_[r]) {
        throw Error(ErrorCode::kSchema, "relation '" + relations_[r] +
                                            "' is both symmetric and in an "
                                            "inverse pair");
      }
      if (paired[r]) {
        throw Error(ErrorCode::kSchema, "relation '" + relations_[r] +
                                            "' is in more than one inverse "
                                            "pair");
      }
      paired[r] = true;
    }
    inverse_pairs_.push_back(pair);
  }
  std::sort(inverse_pairs_.begin(), inverse_pairs_.end());
}

RelationVocab RelationVocab::parse(std::istream& in) {
  std::vector<std::string> relations;
  std::vector<std::string> symmetric;
  std::vector<std::pair<std::string, std::string>> inverse;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_whitespace(body);
    const std::string& name = fields[0];
    relations.push_back(name);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const std::string& marker = fields[i];
      if (marker == "[sym]") {
        symmetric.push_back(name);
      } else if (marker.size() > 6 && marker.starts_with("[inv:") &&
                 marker.back() == ']') {
        inverse.emplace_back(name, marker.substr(5, marker.size() - 6));
      } else {
        throw ParseError(line_no, "unknown relation marker '" + marker + "'");
      }
    }
  }
  return RelationVocab(std::move(relations), symmetric, inverse);
}

RelationVocab RelationVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open relation schema " + path);
  return parse(in);
}

void RelationVocab::write(std::ostream& out) const {
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    out << relations_[r];
    if (symmetric_[r]) out << " [sym]";
    for (const auto& [a, b] : inverse_pairs_) {
      // Written once, on the first member of the pair.
      if (a == r) out << " [inv:" << relations_[b] << "]";
    }
    out << '\n';
  }
}

std::optional<std::size_t> RelationVocab::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t RelationVocab::require(std::string_view name) const {
  if (auto i = index(name)) return *i;
  throw Error(ErrorCode::kSchema,
              "unknown relation '" + std::string(name) + "'");
}

std::optional<std::size_t> RelationVocab::inverse_of(std::size_t index) const {
  for (const auto& [a, b] : inverse_pairs_) {
    if (a == index) return b;
    if (b == index) return a;
  }
  return std::nullopt;
}

std::ostream& operator<<(std::ostream& out, const Triple& t) {
  return out << '<' << t.head << ", " << t.relation << ", " << t.tail << '>';
}

TripleSet::TripleSet(std::vector<Triple> triples)
    : triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  entities_.reserve(triples_.size() * 2);
  for (const auto& t : triples_) {
    entities_.push_back(t.head);
    entities_.push_back(t.tail);
  }
  std::sort(entities_.begin(), entities_.end());
  entities_.erase(std::unique(entities_.begin(), entities_.end()),
                  entities_.end());
}

bool TripleSet::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

std::optional<std::size_t> TripleSet::entity_index(
    std::string_view concept_id) const {
  auto it = std::lower_bound(entities_.begin(), entities_.end(), concept_id);
  if (it == entities_.end() || *it != concept_id) return std::nullopt;
  return static_cast<std::size_t>(it - entities_.begin());
}

TripleSet parse_triples(std::istream& in, const RelationVocab& vocab,
                        const ConceptNormalizer* normalizer) {
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  auto concept_of = [&](std::string_view raw) -> std::string {
    if (normalizer == nullptr) {
      auto body = trim(raw);
      if (body.empty()) throw ParseError(line_no, "empty concept");
      return std::string(body);
    }
    try {
      return normalizer->normalize(raw);
    } catch (const Error&) {
      throw ParseError(line_no, "empty concept");
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    const std::string relation(trim(fields[1]));
    if (!vocab.index(relation)) {
      throw Error(ErrorCode::kSchema, "line " + std::to_string(line_no) +
                                          ": unknown relation '" + relation +
                                          "'");
    }
    triples.push_back({concept_of(fields[0]), relation, concept_of(fields[2])});
  }
  return TripleSet(std::move(triples));
}

void write_triples(std::ostream& out, const TripleSet& ts) {
  for (const auto& t : ts.triples()) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
}

std::vector<ImpliedTriple> schema_closure_check(const TripleSet& ts,
                                                const RelationVocab& vocab) {
  std::vector<ImpliedTriple> missing;
  for (const auto& t : ts.triples()) {
    const std::size_t r = vocab.require(t.relation);
    std::optional<std::string> implied_relation;
    if (vocab.is_symmetric(r)) {
      implied_relation = t.relation;
    } else if (auto inv = vocab.inverse_of(r)) {
      implied_relation = vocab.name(*inv);
    }
    if (!implied_relation) continue;
    Triple implied{t.tail, *implied_relation, t.head};
    if (!ts.contains(implied)) missing.push_back({t, std::move(implied)});
  }
  std::sort(missing.begin(), missing.end(),
            [](const ImpliedTriple& a, const ImpliedTriple& b) {
              return std::tie(a.implied, a.source) <
                     std::tie(b.implied, b.source);
            });
  return missing;
}

void KnowledgeStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write store " + path);
  out << kStoreMagic << '\n';
  std::ostringstream schema;
  vocab.write(schema);
  std::istringstream lines(schema.str());
  for (std::string line; std::getline(lines, line);) {
    out << kRelationPrefix << line << '\n';
  }
  write_triples(out, triples);
  if (!out) throw Error(ErrorCode::kIo, "failed writing store " + path);
}

KnowledgeStore KnowledgeStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open store " + path);
  std::string header;
  std::getline(in, header);
  if (header != kStoreMagic) {
    throw Error(ErrorCode::kParse, path + " is not a kgi store");
  }
  std::ostringstream schema;
  std::ostringstream body;
  for (std::string line; std::getline(in, line);) {
    if (line.starts_with(kRelationPrefix)) {
      schema << line.substr(kRelationPrefix.size()) << '\n';
    } else {
      body << line << '\n';
    }
  }
  KnowledgeStore store;
  std::istringstream schema_in(schema.str());
  store.vocab = RelationVocab::parse(schema_in);
  std::istringstream body_in(body.str());
  store.triples = parse_triples(body_in, store.vocab, nullptr);
  return store;
}

}  // namespace kgi
