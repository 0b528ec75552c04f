#include "kgi/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool is_count_header(const std::vector<std::string>& fields) {
  if (fields.size() != 2) return false;
  return std::all_of(fields.begin(), fields.end(), [](const std::string& f) {
    return !f.empty() && std::all_of(f.begin(), f.end(), [](char c) {
      return c >= '0' && c <= '9';
    });
  });
}

}  // namespace

WordVectors WordVectors::parse(std::istream& in) {
  WordVectors out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (line_no == 1 && is_count_header(fields)) continue;
    if (fields.size() < 2) throw ParseError(line_no, "word vector has no values");
    const std::size_t dim = fields.size() - 1;
    if (out.dim_ == 0) out.dim_ = dim;
    if (dim != out.dim_) {
      throw ParseError(line_no, "expected " + std::to_string(out.dim_) +
                                    " values, found " + std::to_string(dim));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], v[static_cast<Eigen::Index>(i)])) {
        throw ParseError(line_no, "bad number '" + fields[i + 1] + "'");
      }
    }
    out.add(fields[0], v);
  }
  return out;
}

WordVectors WordVectors::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open word vectors " + path);
  return parse(in);
}

void WordVectors::write(std::ostream& out) const {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (Eigen::Index j = 0; j < rows_[i].size(); ++j) out << ' ' << rows_[i][j];
    out << '\n';
  }
}

void WordVectors::add(std::string token, const Eigen::VectorXd& v) {
  if (dim_ == 0) dim_ = static_cast<std::size_t>(v.size());
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw Error(ErrorCode::kConfiguration,
                "word vector for '" + token + "' has the wrong dimension");
  }
  token = to_lower(token);
  const auto it = index_.find(token);
  if (it != index_.end()) {
    rows_[it->second] = v;
    return;
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  rows_.push_back(v);
}

bool WordVectors::contains(std::string_view token) const {
  return index_.contains(to_lower(token));
}

std::optional<Eigen::VectorXd> WordVectors::find(std::string_view token) const {
  const auto it = index_.find(to_lower(token));
  if (it == index_.end()) return std::nullopt;
  return rows_[it->second];
}

Eigen::VectorXd WordVectors::lookup(std::string_view token) const {
  auto v = find(token);
  return v ? *v : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
}

PosTag parse_pos_tag(std::string_view name) {
  for (std::size_t i = 0; i < kPosTagCount; ++i) {
    if (kPosTagNames[i] == name) return static_cast<PosTag>(i);
  }
  throw Error(ErrorCode::kTagVocabulary,
              "unknown POS tag '" + std::string(name) + "'");
}

PosTagger PosTagger::parse(std::istream& in) {
  PosTagger out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) throw ParseError(line_no, "expected `word TAG`");
    const PosTag tag = parse_pos_tag(fields[1]);
    if (fields[0].size() > 1 && fields[0].front() == '*') {
      out.suffixes_.emplace_back(to_lower(fields[0].substr(1)), tag);
    } else {
      out.lexicon_[to_lower(fields[0])] = tag;
    }
  }
  std::stable_sort(out.suffixes_.begin(), out.suffixes_.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
  return out;
}

PosTagger PosTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open POS lexicon " + path);
  return parse(in);
}

PosTag PosTagger::tag(std::string_view word) const {
  const auto w = to_lower(word);
  const auto it = lexicon_.find(w);
  if (it != lexicon_.end()) return it->second;
  for (const auto& [suffix, tag] : suffixes_) {
    if (w.size() > suffix.size() + 2 && w.ends_with(suffix)) return tag;
  }
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    return PosTag::kOther;
  }
  return PosTag::kNoun;
}

std::vector<PosTag> PosTagger::tag_all(
    const std::vector<std::string>& words) const {
  std::vector<PosTag> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(tag(w));
  return out;
}

}  // namespace kgi
