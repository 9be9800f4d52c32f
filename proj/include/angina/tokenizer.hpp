#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "angina/corpus.hpp"

namespace angina {

using TokenId = std::int32_t;

struct TokenizerConfig {
  std::size_t max_len = 512;
  std::size_t vocab_size = 4096;
  bool lowercase = true;

  void validate() const;
};

// Subword vocabulary with WordPiece-style "##" continuation pieces.
// Ids 0..3 are the reserved tokens in the order [PAD], [UNK], [CLS], [SEP].
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;
  static constexpr std::size_t kNumReserved = 4;
  static constexpr std::string_view kContinuation = "##";

  // `pieces` excludes the reserved tokens. Throws DataError on duplicates.
  explicit Vocabulary(std::vector<std::string> pieces);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  // -1 when the piece is unknown; never returns a reserved id.
  TokenId piece_id(std::string_view piece) const;
  static bool is_reserved(TokenId id) { return id >= 0 && id < static_cast<TokenId>(kNumReserved); }

  // One token per line, id = line number.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> lookup_;
};

struct TokenizedInput {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;
  bool truncated = false;

  std::size_t attended() const;
  bool operator==(const TokenizedInput&) const = default;
};

// Greedy most-frequent-pair merging over whitespace-split words until
// vocab_size is reached or nothing is left to merge. Every character seen
// gets both a word-initial and a continuation piece.
Vocabulary build_vocab(const std::vector<std::string>& texts, const TokenizerConfig& config);
Vocabulary build_vocab(const Corpus& corpus, const TokenizerConfig& config);

// Greedy longest-match pieces for one whitespace-free word; a word that
// cannot be covered becomes a single [UNK].
std::vector<TokenId> word_pieces(std::string_view word, const Vocabulary& vocab);

// [CLS] + pieces (head kept, at most max_len - 2) + [SEP] + [PAD]...
TokenizedInput encode(std::string_view text, const Vocabulary& vocab,
                      const TokenizerConfig& config);

// Drops reserved tokens and rejoins continuation pieces.
std::string decode(const TokenizedInput& input, const Vocabulary& vocab);

// Lowercases (when configured) and collapses whitespace runs to one space.
std::string normalize_text(std::string_view text, bool lowercase);

}  // namespace angina
