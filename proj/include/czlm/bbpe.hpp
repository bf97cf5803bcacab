#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "czlm/corpus.hpp"

namespace czlm::bbpe {

using TokenId = std::int32_t;

// Special tokens occupy the lowest ids; single bytes follow at kFirstByteId + b.
enum SpecialToken : TokenId { kBos = 0, kEos = 1, kPad = 2, kMask = 3, kUnk = 4 };
inline constexpr TokenId kNumSpecial = 5;
inline constexpr TokenId kFirstByteId = kNumSpecial;
inline constexpr TokenId kByteOnlySize = kNumSpecial + 256;

struct Merge {
  TokenId left;
  TokenId right;
  TokenId result;

  bool operator==(const Merge&) const = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidIdError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Encoding {
  std::vector<TokenId> ids;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;  // byte [start, end) per id
};

// Pre-token boundaries: maximal runs of non-whitespace bytes, each absorbing one
// preceding ASCII space; remaining whitespace forms its own pre-tokens.
std::vector<std::string_view> pretokenize(std::string_view text);

class ByteVocab {
 public:
  ByteVocab();  // byte-only vocabulary, no merges

  std::size_t size() const { return tokens_.size(); }
  const std::string& token_bytes(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Merge>& merges() const { return merges_; }
  static bool is_special(TokenId id) { return id >= 0 && id < kNumSpecial; }

  Encoding encode(std::string_view text) const;
  std::vector<TokenId> encode_ids(std::string_view text) const { return encode(text).ids; }
  std::string decode(const std::vector<TokenId>& ids) const;

  // Appends a merge of two existing tokens; returns the new token id.
  TokenId add_merge(TokenId left, TokenId right);

  bool operator==(const ByteVocab& other) const {
    return tokens_ == other.tokens_ && merges_ == other.merges_;
  }

 private:
  void encode_pretoken(std::string_view piece, std::size_t base, Encoding& out) const;

  std::vector<std::string> tokens_;
  std::vector<Merge> merges_;
  std::unordered_map<std::uint64_t, std::size_t> merge_rank_;
};

// Most-frequent-pair merging over the corpus' pre-tokens. Ties go to the pair whose
// newer operand was created earlier, then to lexicographic byte order. Pairs seen
// fewer than twice are never merged.
ByteVocab train_bbpe(const Corpus& corpus, std::size_t vocab_cap = 52000);
ByteVocab train_bbpe(const std::vector<std::string>& texts, std::size_t vocab_cap = 52000);

struct VocabFiles {
  std::string vocab;   // `id<TAB>hex-bytes` per token
  std::string merges;  // `left<TAB>right<TAB>result` per merge, in training order
};

VocabFiles save_vocab(const ByteVocab& vocab);
ByteVocab load_vocab(std::string_view vocab_stream, std::string_view merge_stream);

}  // namespace czlm::bbpe
