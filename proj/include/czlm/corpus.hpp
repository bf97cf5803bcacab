#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace czlm {

using Feature = std::pair<std::string, std::string>;

struct Token {
  std::string form;
  std::optional<std::string> lemma;
  std::optional<std::string> upos;
  std::optional<std::string> xpos;
  std::optional<std::vector<Feature>> ufeats;  // sorted by name, names unique
  std::optional<int> head;                     // 0 = artificial root
  std::optional<std::string> deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Token&) const = default;
};

struct EntitySpan {
  int start = 1;  // 1-based token index
  int end = 1;    // inclusive
  std::string label;

  auto operator<=>(const EntitySpan&) const = default;
};

// Multiword token range line (`3-4 form ...`), kept for lossless CoNLL-U output.
struct MultiwordToken {
  int first = 0;
  int last = 0;
  std::string form;
  std::string rest;  // columns 3..10 verbatim, tab-joined

  bool operator==(const MultiwordToken&) const = default;
};

// Empty node line (`3.1 ...`), kept verbatim; `after` is the preceding word index.
struct EmptyNode {
  int after = 0;
  std::string line;

  bool operator==(const EmptyNode&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<EntitySpan> entity_spans;
  std::vector<std::string> comments;  // verbatim, without the `# newdoc` line
  std::vector<MultiwordToken> multiword_tokens;
  std::vector<EmptyNode> empty_nodes;

  std::size_t size() const { return tokens.size(); }
  std::string text() const;  // forms joined by single spaces

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::optional<std::string> newdoc_line;  // verbatim `# newdoc ...` comment, when present

  std::size_t token_count() const;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t token_count() const;
  std::size_t sentence_count() const;

  bool operator==(const Corpus&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Documents are blank-line separated blocks; each non-empty line is a sentence and
// tokens are whitespace-delimited. Throws utf8::DecodeError on invalid input.
Corpus ingest_plaintext(std::string_view bytes);

Corpus ingest_conllu(std::string_view bytes);
std::string serialize_conllu(const Corpus& corpus);

std::string format_features(const std::vector<Feature>& feats);
std::vector<Feature> parse_features(std::string_view column);

// Greedy left-to-right grouping of sentences into blocks of at most
// `max_block_words` words, followed by a seeded permutation of the blocks.
Document block_shuffle(const Document& doc, std::size_t max_block_words, std::uint64_t seed);

// Sentence-index blocks used by block_shuffle, exposed for inspection.
std::vector<std::vector<std::size_t>> shuffle_blocks(const Document& doc, std::size_t max_block_words);

Corpus filter_min_tokens(const Corpus& corpus, std::size_t min_tokens = 400);

struct FoldSplit {
  std::size_t fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> dev_ids;
  std::vector<std::string> test_ids;

  bool operator==(const FoldSplit&) const = default;
};

std::vector<FoldSplit> kfold_split(const std::vector<std::string>& item_ids, std::size_t k,
                                   double dev_fraction, std::uint64_t seed);

// Line format: `fold<TAB>role<TAB>id`, role in {train, dev, test}.
std::string serialize_folds(const std::vector<FoldSplit>& folds);
std::vector<FoldSplit> parse_folds(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace czlm
