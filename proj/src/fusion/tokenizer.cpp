#include "mmfnd/fusion/tokenizer.hpp"

#include <cctype>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"

namespace mmfnd::fusion {

namespace {

bool token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '#' || c == '@' || c == '_';
}

}  // namespace

HashTokenizer::HashTokenizer(int vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size <= 0) throw ConfigInvalidError("tokenizer vocab size must be positive");
}

std::vector<int> HashTokenizer::tokenize(const std::string& text, std::size_t max_tokens) const {
  std::vector<int> ids;
  std::string word;
  auto flush = [&] {
    if (word.empty() || ids.size() >= max_tokens) {
      word.clear();
      return;
    }
    ids.push_back(kNumSpecial +
                  static_cast<int>(fnv1a64(word) % static_cast<std::uint64_t>(vocab_size_)));
    word.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (token_char(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return ids;
}

}  // namespace mmfnd::fusion
