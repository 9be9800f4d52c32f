#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace angina::rules {

// A word token. Offsets are bytes into the scanned text; ASCII-only
// lowercasing keeps them valid for the original text as well.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t sentence = 0;
  std::string text;
};

struct Sentence {
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // exclusive
};

struct ScannedText {
  std::string lowered;
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
};

std::string ascii_lower(std::string_view text);

// Word characters are ASCII alphanumerics, '/', '\'' and any non-ASCII
// byte; everything else separates tokens. A character from `delimiters`
// ends a sentence, except '.' inside a number ("1.5") or directly after a
// one-letter token ("w. out").
ScannedText scan_text(std::string_view text, std::string_view delimiters);

// Lowercased word tokens of a lexicon phrase.
std::vector<std::string> phrase_tokens(std::string_view phrase);

}  // namespace angina::rules
