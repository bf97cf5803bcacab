#include "czlm/bbpe.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <tuple>

#include "czlm/utf8.hpp"

namespace czlm::bbpe {

namespace {

constexpr const char* kSpecialNames[kNumSpecial] = {"<s>", "</s>", "<pad>", "<mask>", "<unk>"};

std::uint64_t pair_key(TokenId left, TokenId right) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
         static_cast<std::uint32_t>(right);
}

}  // namespace

FormatError::FormatError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t start = i;
    if (utf8::is_space(text[i])) {
      std::size_t j = i;
      while (j < n && utf8::is_space(text[j])) ++j;
      if (j < n && text[j - 1] == ' ') {
        if (j - 1 > i) pieces.push_back(text.substr(i, j - 1 - i));
        start = j - 1;
        i = j;
      } else {
        pieces.push_back(text.substr(i, j - i));
        i = j;
        continue;
      }
    }
    while (i < n && !utf8::is_space(text[i])) ++i;
    pieces.push_back(text.substr(start, i - start));
  }
  return pieces;
}

ByteVocab::ByteVocab() {
  tokens_.reserve(kByteOnlySize);
  for (const char* name : kSpecialNames) tokens_.emplace_back(name);
  for (int b = 0; b < 256; ++b) tokens_.emplace_back(1, static_cast<char>(b));
}

const std::string& ByteVocab::token_bytes(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw InvalidIdError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId ByteVocab::add_merge(TokenId left, TokenId right) {
  const auto n = static_cast<TokenId>(tokens_.size());
  if (left < kFirstByteId || right < kFirstByteId || left >= n || right >= n)
    throw InvalidIdError("merge operand out of range");
  const TokenId result = n;
  tokens_.push_back(tokens_[left] + tokens_[right]);
  merge_rank_.emplace(pair_key(left, right), merges_.size());
  merges_.push_back({left, right, result});
  return result;
}

void ByteVocab::encode_pretoken(std::string_view piece, std::size_t base, Encoding& out) const {
  std::vector<TokenId> ids;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  ids.reserve(piece.size());
  for (std::size_t i = 0; i < piece.size(); ++i) {
    ids.push_back(kFirstByteId + static_cast<unsigned char>(piece[i]));
    spans.emplace_back(base + i, base + i + 1);
  }
  while (ids.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      auto it = merge_rank_.find(pair_key(ids[i], ids[i + 1]));
      if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    const Merge& m = merges_[best_rank];
    std::size_t w = 0;
    for (std::size_t r = 0; r < ids.size(); ++r, ++w) {
      if (r + 1 < ids.size() && ids[r] == m.left && ids[r + 1] == m.right) {
        ids[w] = m.result;
        spans[w] = {spans[r].first, spans[r + 1].second};
        ++r;
      } else {
        ids[w] = ids[r];
        spans[w] = spans[r];
      }
    }
    ids.resize(w);
    spans.resize(w);
  }
  out.ids.insert(out.ids.end(), ids.begin(), ids.end());
  out.offsets.insert(out.offsets.end(), spans.begin(), spans.end());
}

Encoding ByteVocab::encode(std::string_view text) const {
  Encoding out;
  for (auto piece : pretokenize(text))
    encode_pretoken(piece, static_cast<std::size_t>(piece.data() - text.data()), out);
  return out;
}

std::string ByteVocab::decode(const std::vector<TokenId>& ids) const {
  std::string bytes;
  for (TokenId id : ids) {
    const auto& tok = token_bytes(id);
    if (!is_special(id)) bytes += tok;
  }
  return utf8::sanitize(bytes);
}

ByteVocab train_bbpe(const std::vector<std::string>& texts, std::size_t vocab_cap) {
  if (vocab_cap < static_cast<std::size_t>(kByteOnlySize))
    throw TrainingError("vocabulary cap " + std::to_string(vocab_cap) + " is below the " +
                        std::to_string(kByteOnlySize) + " byte and special tokens");

  std::map<std::string, std::int64_t> piece_counts;
  for (const auto& text : texts)
    for (auto piece : pretokenize(text)) ++piece_counts[std::string(piece)];
  if (piece_counts.empty()) throw TrainingError("cannot train a tokenizer on an empty corpus");

  struct Word {
    std::vector<TokenId> ids;
    std::int64_t count;
  };
  std::vector<Word> words;
  words.reserve(piece_counts.size());
  for (const auto& [piece, count] : piece_counts) {
    Word w{{}, count};
    for (unsigned char c : piece) w.ids.push_back(kFirstByteId + c);
    words.push_back(std::move(w));
  }

  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  auto account = [&](const Word& w, std::int64_t sign) {
    for (std::size_t i = 0; i + 1 < w.ids.size(); ++i) {
      auto& c = pair_counts[pair_key(w.ids[i], w.ids[i + 1])];
      c += sign * w.count;
    }
  };
  for (const auto& w : words) account(w, +1);

  ByteVocab vocab;
  while (vocab.size() < vocab_cap) {
    std::uint64_t best = 0;
    std::int64_t best_count = 0;
    auto better = [&](std::uint64_t key, std::int64_t count) {
      if (count != best_count) return count > best_count;
      const auto l = static_cast<TokenId>(key >> 32), r = static_cast<TokenId>(key & 0xFFFFFFFFu);
      const auto bl = static_cast<TokenId>(best >> 32), br = static_cast<TokenId>(best & 0xFFFFFFFFu);
      if (std::max(l, r) != std::max(bl, br)) return std::max(l, r) < std::max(bl, br);
      return std::tie(vocab.token_bytes(l), vocab.token_bytes(r)) <
             std::tie(vocab.token_bytes(bl), vocab.token_bytes(br));
    };
    for (const auto& [key, count] : pair_counts)
      if (count >= 2 && better(key, count)) {
        best = key;
        best_count = count;
      }
    if (best_count < 2) break;

    const auto left = static_cast<TokenId>(best >> 32), right = static_cast<TokenId>(best & 0xFFFFFFFFu);
    const TokenId result = vocab.add_merge(left, right);
    for (auto& w : words) {
      bool present = false;
      for (std::size_t i = 0; i + 1 < w.ids.size() && !present; ++i)
        present = w.ids[i] == left && w.ids[i + 1] == right;
      if (!present) continue;
      account(w, -1);
      std::size_t out = 0;
      for (std::size_t i = 0; i < w.ids.size(); ++i, ++out) {
        if (i + 1 < w.ids.size() && w.ids[i] == left && w.ids[i + 1] == right) {
          w.ids[out] = result;
          ++i;
        } else {
          w.ids[out] = w.ids[i];
        }
      }
      w.ids.resize(out);
      account(w, +1);
    }
    std::erase_if(pair_counts, [](const auto& kv) { return kv.second <= 0; });
  }
  return vocab;
}

ByteVocab train_bbpe(const Corpus& corpus, std::size_t vocab_cap) {
  std::vector<std::string> texts;
  for (const auto& doc : corpus.documents)
    for (const auto& s : doc.sentences)
      if (!s.tokens.empty()) texts.push_back(s.text());
  return train_bbpe(texts, vocab_cap);
}

namespace {

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    lines.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_id(std::string_view s, TokenId& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size() && value >= 0;
}

}  // namespace

VocabFiles save_vocab(const ByteVocab& vocab) {
  std::ostringstream v, m;
  for (std::size_t id = 0; id < vocab.size(); ++id) v << id << '\t' << to_hex(vocab.tokens()[id]) << '\n';
  for (const auto& merge : vocab.merges()) m << merge.left << '\t' << merge.right << '\t' << merge.result << '\n';
  return {v.str(), m.str()};
}

ByteVocab load_vocab(std::string_view vocab_stream, std::string_view merge_stream) {
  const auto vocab_lines = lines_of(vocab_stream);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < vocab_lines.size(); ++i) {
    const auto fields = fields_of(vocab_lines[i]);
    TokenId id;
    if (fields.size() != 2 || !parse_id(fields[0], id)) throw FormatError(i + 1, "expected id<TAB>hex");
    if (static_cast<std::size_t>(id) != i) throw FormatError(i + 1, "token ids must be consecutive from 0");
    const auto hex = fields[1];
    if (hex.size() % 2 != 0) throw FormatError(i + 1, "odd-length hex string");
    std::string bytes;
    for (std::size_t k = 0; k < hex.size(); k += 2) {
      const int hi = hex_digit(hex[k]), lo = hex_digit(hex[k + 1]);
      if (hi < 0 || lo < 0) throw FormatError(i + 1, "invalid hex digit");
      bytes.push_back(static_cast<char>(hi * 16 + lo));
    }
    tokens.push_back(std::move(bytes));
  }

  ByteVocab vocab;
  if (tokens.size() < vocab.size())
    throw FormatError(tokens.size() + 1, "vocabulary lacks the special and byte tokens");
  for (std::size_t id = 0; id < vocab.size(); ++id)
    if (tokens[id] != vocab.tokens()[id]) throw FormatError(id + 1, "unexpected special or byte token");

  const auto merge_lines = lines_of(merge_stream);
  for (std::size_t i = 0; i < merge_lines.size(); ++i) {
    const auto fields = fields_of(merge_lines[i]);
    TokenId left, right, result;
    if (fields.size() != 3 || !parse_id(fields[0], left) || !parse_id(fields[1], right) ||
        !parse_id(fields[2], result))
      throw FormatError(i + 1, "expected left<TAB>right<TAB>result");
    const auto next = static_cast<TokenId>(vocab.size());
    if (result != next) throw FormatError(i + 1, "merge result id out of sequence");
    if (left < kFirstByteId || right < kFirstByteId || left >= next || right >= next)
      throw FormatError(i + 1, "merge references unknown token");
    if (static_cast<std::size_t>(result) >= tokens.size())
      throw FormatError(i + 1, "merge result missing from vocabulary");
    if (tokens[result] != vocab.tokens()[left] + vocab.tokens()[right])
      throw FormatError(i + 1, "merge result is not the concatenation of its operands");
    vocab.add_merge(left, right);
  }
  if (vocab.size() != tokens.size())
    throw FormatError(vocab.size() + 1, "vocabulary has tokens not produced by any merge");
  return vocab;
}

}  // namespace czlm::bbpe
