#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lmol::smiles {

inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kUnkId = 3;
inline constexpr std::size_t kReservedCount = 4;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kUnkToken = "[UNK]";

// Ordered token list; the id of a token is its line number in the vocabulary
// file. The first four ids are always [PAD], [CLS], [SEP], [UNK].
class Vocabulary {
 public:
  // Only the reserved tokens.
  Vocabulary();

  // Reserved tokens followed by `tokens` (duplicates and reserved names are
  // skipped, first occurrence wins).
  static Vocabulary from_tokens(std::span<const std::string> tokens);

  // Tokens of every string in `corpus`, ordered by descending frequency and
  // then lexicographically.
  static Vocabulary from_corpus(std::span<const std::string> corpus);

  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(int id) const;
  // kUnkId for unknown tokens.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  static bool is_reserved(int id) noexcept { return id >= 0 && id < static_cast<int>(kReservedCount); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  void add(std::string token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Splits SMILES text into tokens: a bracket group "[...]" is one token, Cl and
// Br are one token each, every other character is its own token. Throws
// TokenizeError for an unterminated '[' or empty input.
std::vector<std::string> split_tokens(std::string_view text);

std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab);

// Concatenates token text, dropping reserved ids. Throws IndexError for ids
// outside the vocabulary.
std::string detokenize(std::span<const int> ids, const Vocabulary& vocab);

}  // namespace lmol::smiles
