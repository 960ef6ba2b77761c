#include "lmol/smiles/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "lmol/error.hpp"

namespace lmol::smiles {

Vocabulary::Vocabulary() {
  for (std::string_view t : {kPadToken, kClsToken, kSepToken, kUnkToken}) add(std::string(t));
}

void Vocabulary::add(std::string token) {
  if (index_.contains(token)) return;
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const std::string& t : tokens) {
    if (t.empty()) throw FormatError("vocabulary tokens must be non-empty");
    v.add(t);
  }
  return v;
}

Vocabulary Vocabulary::from_corpus(std::span<const std::string> corpus) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& s : corpus) {
    for (std::string& t : split_tokens(s)) ++counts[std::move(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(ordered.size());
  for (auto& [t, n] : ordered) tokens.push_back(t);
  return from_tokens(tokens);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  const std::string_view reserved[] = {kPadToken, kClsToken, kSepToken, kUnkToken};
  if (lines.size() < kReservedCount) throw FormatError("vocabulary file is missing reserved tokens");
  for (std::size_t i = 0; i < kReservedCount; ++i) {
    if (lines[i] != reserved[i]) {
      throw FormatError("vocabulary line " + std::to_string(i + 1) + " must be " + std::string(reserved[i]));
    }
  }
  Vocabulary v;
  for (std::size_t i = kReservedCount; i < lines.size(); ++i) {
    if (lines[i].empty() || v.contains(lines[i])) {
      throw FormatError("vocabulary line " + std::to_string(i + 1) + " is empty or duplicated");
    }
    v.add(lines[i]);
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  for (const std::string& t : tokens_) out << t << '\n';
  if (!out) throw IoError("failed writing vocabulary file " + path.string());
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::vector<std::string> split_tokens(std::string_view text) {
  if (text.empty()) throw TokenizeError("empty SMILES", 0);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (c == '[') {
      const std::size_t close = text.find(']', i + 1);
      if (close == std::string_view::npos) throw TokenizeError("unterminated '['", i);
      out.emplace_back(text.substr(i, close - i + 1));
      i = close + 1;
    } else if ((c == 'C' || c == 'B') && i + 1 < text.size() &&
               text[i + 1] == (c == 'C' ? 'l' : 'r')) {
      out.emplace_back(text.substr(i, 2));
      i += 2;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const std::string& t : split_tokens(text)) ids.push_back(vocab.id(t));
  return ids;
}

std::string detokenize(std::span<const int> ids, const Vocabulary& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& t = vocab.token(id);
    if (!Vocabulary::is_reserved(id)) out += t;
  }
  return out;
}

}  // namespace lmol::smiles
