#include "kgi/lemmatizer.hpp"

#include <fstream>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Lemmatizer Lemmatizer::parse(std::istream& in) {
  Lemmatizer out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_whitespace(body);
    if (fields[0] == "=") {
      if (fields.size() != 3) {
        throw ParseError(line_no, "exception needs '= <word> <lemma>'");
      }
      out.exceptions_[fields[1]] = fields[2];
    } else if (fields[0] == "suffix") {
      if (fields.size() != 4 && fields.size() != 5) {
        throw ParseError(line_no,
                         "rule needs 'suffix <ending> <replacement> <min>'");
      }
      SuffixRule rule;
      rule.ending = fields[1];
      rule.replacement = fields[2] == "-" ? "" : fields[2];
      try {
        rule.min_stem = std::stoul(fields[3]);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad min_stem '" + fields[3] + "'");
      }
      if (fields.size() == 5) {
        if (fields[4] != "undouble") {
          throw ParseError(line_no, "unknown rule flag '" + fields[4] + "'");
        }
        rule.undouble = true;
      }
      const bool protective = rule.replacement == rule.ending;
      if (rule.ending.empty() ||
          (!protective && rule.replacement.size() >= rule.ending.size())) {
        throw ParseError(line_no, "rule must shorten the word or protect it");
      }
      out.rules_.push_back(std::move(rule));
    } else {
      throw ParseError(line_no, "unknown directive '" + fields[0] + "'");
    }
  }
  for (const auto& [word, target] : out.exceptions_) {
    if (out.lemma(target) != target) {
      throw Error(ErrorCode::kConfiguration,
                  "lemma table: exception target '" + target + "' for '" +
                      word + "' is not itself a lemma");
    }
  }
  return out;
}

Lemmatizer Lemmatizer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lemma table " + path);
  return parse(in);
}

std::string Lemmatizer::step(const std::string& word) const {
  if (auto it = exceptions_.find(word); it != exceptions_.end()) {
    return it->second;
  }
  for (const auto& rule : rules_) {
    if (!ends_with(word, rule.ending)) continue;
    const std::size_t stem_len = word.size() - rule.ending.size();
    if (stem_len < rule.min_stem) continue;
    std::string stem = word.substr(0, stem_len);
    if (rule.undouble && stem.size() >= 2) {
      const char last = stem.back();
      if (last == stem[stem.size() - 2] && !is_vowel(last) && last != 'l' &&
          last != 's' && last != 'z' && last != 'f') {
        stem.pop_back();
      }
    }
    return stem + rule.replacement;
  }
  return word;
}

std::string Lemmatizer::lemma(std::string_view word) const {
  std::string current(word);
  // Non-protective rules strictly shorten and exception targets are fixed
  // points, so the loop ends within |word| + 2 steps.
  for (std::size_t i = 0; i < word.size() + 2; ++i) {
    std::string next = step(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string ConceptNormalizer::normalize(std::string_view surface) const {
  std::string lowered = to_lower(surface);
  for (char& c : lowered) {
    if (c == '_') c = ' ';
  }
  const auto tokens = split_whitespace(lowered);
  if (tokens.empty()) {
    throw Error(ErrorCode::kInvalidConcept,
                "concept surface is empty or whitespace-only");
  }
  std::vector<std::string> lemmas;
  lemmas.reserve(tokens.size());
  for (const auto& t : tokens) lemmas.push_back(lemmatizer_.lemma(t));
  return join(lemmas, " ");
}

}  // namespace kgi
