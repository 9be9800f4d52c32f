#include "angina/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "angina/error.hpp"

namespace angina {
namespace {

constexpr std::string_view kReserved[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

// Byte length of the code point starting at s[i]; malformed bytes count as one.
std::size_t code_point_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) len = 4;
  else if (lead >= 0xE0) len = 3;
  else if (lead >= 0xC2 && lead <= 0xDF) len = 2;
  if (lead >= 0xF5 || (lead >= 0x80 && lead < 0xC2)) return 1;
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k)
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  return len;
}

std::vector<std::string> code_points(std::string_view word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t len = code_point_length(word, i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

bool is_continuation(std::string_view piece) {
  return piece.size() > Vocabulary::kContinuation.size() &&
         piece.substr(0, Vocabulary::kContinuation.size()) == Vocabulary::kContinuation;
}

bool is_reserved_text(std::string_view piece) {
  return std::find(std::begin(kReserved), std::end(kReserved), piece) != std::end(kReserved);
}

std::string continuation(std::string_view body) {
  return std::string(Vocabulary::kContinuation) + std::string(body);
}

std::string merged_piece(const std::string& left, const std::string& right) {
  return left + right.substr(Vocabulary::kContinuation.size());
}

}  // namespace

void TokenizerConfig::validate() const {
  if (max_len < 3) throw ConfigError("max_len must be at least 3");
  if (vocab_size <= Vocabulary::kNumReserved)
    throw ConfigError("vocab_size must exceed the number of reserved tokens");
}

Vocabulary::Vocabulary(std::vector<std::string> pieces) {
  tokens_.reserve(kNumReserved + pieces.size());
  for (auto r : kReserved) tokens_.emplace_back(r);
  for (auto& p : pieces) tokens_.push_back(std::move(p));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty()) throw DataError("vocabulary has an empty token at id " + std::to_string(i));
    if (std::any_of(t.begin(), t.end(), is_space))
      throw DataError("vocabulary token contains whitespace at id " + std::to_string(i));
    if (!lookup_.emplace(t, static_cast<TokenId>(i)).second)
      throw DataError("duplicate vocabulary token '" + t + "'");
  }
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw DataError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::piece_id(std::string_view piece) const {
  const auto it = lookup_.find(std::string(piece));
  if (it == lookup_.end() || is_reserved(it->second)) return -1;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw DataError("failed writing vocabulary " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < kNumReserved) throw DataError("vocabulary file is missing reserved tokens");
  for (std::size_t i = 0; i < kNumReserved; ++i)
    if (lines[i] != kReserved[i])
      throw DataError("vocabulary line " + std::to_string(i + 1) + " must be " +
                      std::string(kReserved[i]));
  return Vocabulary(std::vector<std::string>(lines.begin() + kNumReserved, lines.end()));
}

std::size_t TokenizedInput::attended() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::string normalize_text(std::string_view text, bool lowercase) {
  std::string out;
  for (auto word : split_words(text)) {
    if (!out.empty()) out += ' ';
    for (char c : word) {
      if (lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      out += c;
    }
  }
  return out;
}

Vocabulary build_vocab(const std::vector<std::string>& texts, const TokenizerConfig& config) {
  config.validate();
  if (texts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  std::map<std::string, long> word_counts;
  for (const auto& text : texts) {
    const std::string normalized = normalize_text(text, config.lowercase);
    for (auto w : split_words(normalized)) ++word_counts[std::string(w)];
  }

  // Symbol table shared by every word split.
  std::vector<std::string> symbols;
  std::unordered_map<std::string, int> symbol_ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = symbol_ids.emplace(s, static_cast<int>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  std::set<std::string> initial_chars, continuation_chars;
  std::vector<std::vector<int>> splits;
  std::vector<long> freqs;
  for (const auto& [word, count] : word_counts) {
    const auto chars = code_points(word);
    std::vector<int> split;
    for (std::size_t i = 0; i < chars.size(); ++i) {
      initial_chars.insert(chars[i]);
      continuation_chars.insert(continuation(chars[i]));
      split.push_back(intern(i == 0 ? chars[i] : continuation(chars[i])));
    }
    splits.push_back(std::move(split));
    freqs.push_back(count);
  }

  std::vector<std::string> pieces(initial_chars.begin(), initial_chars.end());
  pieces.insert(pieces.end(), continuation_chars.begin(), continuation_chars.end());
  if (Vocabulary::kNumReserved + pieces.size() > config.vocab_size)
    throw ConfigError("vocab_size " + std::to_string(config.vocab_size) +
                      " cannot hold the reserved tokens and " + std::to_string(pieces.size()) +
                      " character pieces");
  std::set<std::string> in_vocab(pieces.begin(), pieces.end());

  auto mergeable = [&](int a, int b) {
    const std::string m = merged_piece(symbols[a], symbols[b]);
    return !is_continuation(m) || is_continuation(symbols[a]);
  };

  while (Vocabulary::kNumReserved + pieces.size() < config.vocab_size) {
    std::unordered_map<std::uint64_t, long> pair_counts;
    for (std::size_t w = 0; w < splits.size(); ++w) {
      const auto& s = splits[w];
      for (std::size_t i = 0; i + 1 < s.size(); ++i)
        pair_counts[(static_cast<std::uint64_t>(s[i]) << 32) | static_cast<std::uint32_t>(s[i + 1])] +=
            freqs[w];
    }
    int best_a = -1, best_b = -1;
    long best_count = 0;
    for (const auto& [key, count] : pair_counts) {
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      if (count < best_count) continue;
      if (count == best_count &&
          std::tie(symbols[a], symbols[b]) >= std::tie(symbols[best_a], symbols[best_b]))
        continue;
      if (!mergeable(a, b)) continue;
      if (is_reserved_text(merged_piece(symbols[a], symbols[b]))) continue;
      best_a = a;
      best_b = b;
      best_count = count;
    }
    if (best_a < 0) break;

    const std::string merged = merged_piece(symbols[best_a], symbols[best_b]);
    const int merged_id = intern(merged);
    if (in_vocab.insert(merged).second) pieces.push_back(merged);
    for (auto& s : splits) {
      std::vector<int> next;
      next.reserve(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == best_a && s[i + 1] == best_b) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(s[i]);
        }
      }
      s = std::move(next);
    }
  }
  return Vocabulary(std::move(pieces));
}

Vocabulary build_vocab(const Corpus& corpus, const TokenizerConfig& config) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& note : corpus) texts.push_back(note.hpi_text);
  return build_vocab(texts, config);
}

std::vector<TokenId> word_pieces(std::string_view word, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    TokenId found = -1;
    std::size_t found_end = pos;
    // Candidate ends fall on code point boundaries only.
    std::vector<std::size_t> ends;
    for (std::size_t i = pos; i < word.size();) {
      i += code_point_length(word, i);
      ends.push_back(i);
    }
    for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
      const std::string_view body = word.substr(pos, *it - pos);
      if (pos == 0 && is_continuation(body)) continue;
      const TokenId id = pos == 0 ? vocab.piece_id(body) : vocab.piece_id(continuation(body));
      if (id >= 0) {
        found = id;
        found_end = *it;
        break;
      }
    }
    if (found < 0) return {Vocabulary::kUnk};
    out.push_back(found);
    pos = found_end;
  }
  return out;
}

TokenizedInput encode(std::string_view text, const Vocabulary& vocab,
                      const TokenizerConfig& config) {
  config.validate();
  const std::size_t budget = config.max_len - 2;
  TokenizedInput input;
  input.ids.reserve(config.max_len);
  input.ids.push_back(Vocabulary::kCls);
  const std::string normalized = normalize_text(text, config.lowercase);
  for (auto word : split_words(normalized)) {
    for (TokenId id : word_pieces(word, vocab)) {
      if (input.ids.size() - 1 == budget) {
        input.truncated = true;
        break;
      }
      input.ids.push_back(id);
    }
    if (input.truncated) break;
  }
  input.ids.push_back(Vocabulary::kSep);
  input.mask.assign(input.ids.size(), 1);
  input.ids.resize(config.max_len, Vocabulary::kPad);
  input.mask.resize(config.max_len, 0);
  return input;
}

std::string decode(const TokenizedInput& input, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : input.ids) {
    const std::string& piece = vocab.token(id);
    if (Vocabulary::is_reserved(id)) continue;
    if (is_continuation(piece)) {
      out += piece.substr(Vocabulary::kContinuation.size());
    } else {
      if (!out.empty()) out += ' ';
      out += piece;
    }
  }
  return out;
}

}  // namespace angina
