#include "angina/text_scan.hpp"

#include <cctype>

namespace angina::rules {
namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c == '/' || c == '\'' || c >= 0x80;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

ScannedText scan_text(std::string_view text, std::string_view delimiters) {
  ScannedText out;
  out.lowered = ascii_lower(text);
  const std::string& s = out.lowered;
  std::size_t sentence = 0;
  std::size_t sentence_first = 0;
  bool sentence_has_tokens = false;

  auto close_sentence = [&] {
    if (!sentence_has_tokens) return;
    out.sentences.push_back({sentence_first, out.tokens.size()});
    ++sentence;
    sentence_first = out.tokens.size();
    sentence_has_tokens = false;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
      out.tokens.push_back({i, j, sentence, s.substr(i, j - i)});
      sentence_has_tokens = true;
      i = j;
      continue;
    }
    if (delimiters.find(static_cast<char>(c)) != std::string_view::npos) {
      bool splits = true;
      if (c == '.') {
        const bool in_number = i > 0 && i + 1 < s.size() && is_digit(s[i - 1]) && is_digit(s[i + 1]);
        const bool after_letter_abbrev = !out.tokens.empty() && out.tokens.back().end == i &&
                                         out.tokens.back().text.size() == 1 &&
                                         std::isalpha(static_cast<unsigned char>(out.tokens.back().text[0]));
        splits = !in_number && !after_letter_abbrev;
      }
      if (splits) close_sentence();
    }
    ++i;
  }
  close_sentence();
  return out;
}

std::vector<std::string> phrase_tokens(std::string_view phrase) {
  ScannedText scanned = scan_text(phrase, "");
  std::vector<std::string> tokens;
  tokens.reserve(scanned.tokens.size());
  for (auto& t : scanned.tokens) tokens.push_back(std::move(t.text));
  return tokens;
}

}  // namespace angina::rules
