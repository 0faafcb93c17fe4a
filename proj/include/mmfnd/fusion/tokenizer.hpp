#pragma once

#include <string>
#include <vector>

namespace mmfnd::fusion {

// Deterministic hashing tokenizer: lowercased alphanumeric runs (plus '#',
// '@', '_') bucketed by FNV-1a. No vocabulary file, byte-stable everywhere.
class HashTokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSep = 1;
  static constexpr int kNumSpecial = 2;

  explicit HashTokenizer(int vocab_size);

  // Word-token ids in [kNumSpecial, kNumSpecial + vocab_size), at most
  // max_tokens of them.
  std::vector<int> tokenize(const std::string& text, std::size_t max_tokens) const;
  int vocab_size() const { return vocab_size_; }
  // Total embedding-table width: specials + buckets.
  int table_size() const { return vocab_size_ + kNumSpecial; }

 private:
  int vocab_size_;
};

}  // namespace mmfnd::fusion
