#include "czlm/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "czlm/rng.hpp"
#include "czlm/utf8.hpp"

namespace czlm {

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string Sentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i].form;
  }
  return out;
}

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.token_count();
  return n;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_lines(std::string_view s) {
  auto lines = split(s, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return utf8::is_space(c); });
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<std::string> optional_column(std::string_view column) {
  if (column == "_") return std::nullopt;
  return std::string(column);
}

std::string column_or_blank(const std::optional<std::string>& value) { return value ? *value : "_"; }

bool is_newdoc(std::string_view line) {
  return line.starts_with("# newdoc") && (line.size() == 8 || line[8] == ' ');
}

std::string newdoc_id(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return "";
  auto id = line.substr(eq + 1);
  while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
  while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
  return std::string(id);
}

}  // namespace

std::string format_features(const std::vector<Feature>& feats) {
  if (feats.empty()) return "_";
  std::string out;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (i) out.push_back('|');
    out += feats[i].first;
    out.push_back('=');
    out += feats[i].second;
  }
  return out;
}

std::vector<Feature> parse_features(std::string_view column) {
  std::vector<Feature> feats;
  if (column == "_" || column.empty()) return feats;
  for (auto part : split(column, '|')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument("malformed feature '" + std::string(part) + "'");
    feats.emplace_back(std::string(part.substr(0, eq)), std::string(part.substr(eq + 1)));
  }
  std::stable_sort(feats.begin(), feats.end(),
                   [](const Feature& a, const Feature& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < feats.size(); ++i)
    if (feats[i].first == feats[i - 1].first)
      throw std::invalid_argument("duplicate feature '" + feats[i].first + "'");
  return feats;
}

Corpus ingest_plaintext(std::string_view bytes) {
  utf8::validate(bytes);
  Corpus corpus;
  Document* doc = nullptr;
  for (auto line : split_lines(bytes)) {
    if (is_blank(line)) {
      doc = nullptr;
      continue;
    }
    if (!doc) {
      corpus.documents.emplace_back();
      doc = &corpus.documents.back();
      doc->id = "doc" + std::to_string(corpus.documents.size());
    }
    Sentence sentence;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && utf8::is_space(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && !utf8::is_space(line[j])) ++j;
      if (j > i) {
        Token tok;
        tok.form = std::string(line.substr(i, j - i));
        sentence.tokens.push_back(std::move(tok));
      }
      i = j;
    }
    doc->sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus ingest_conllu(std::string_view bytes) {
  if (auto bad = utf8::first_invalid(bytes)) {
    const auto line = std::count(bytes.begin(), bytes.begin() + *bad, '\n') + 1;
    throw ParseError(line, "invalid UTF-8 at byte offset " + std::to_string(*bad));
  }
  Corpus corpus;
  Sentence pending;
  std::vector<std::size_t> head_lines;  // line number of each word, for range errors
  bool in_sentence = false;

  auto current_doc = [&]() -> Document& {
    if (corpus.documents.empty()) corpus.documents.emplace_back();
    return corpus.documents.back();
  };

  auto finish_sentence = [&](std::size_t line_no) {
    if (!in_sentence) return;
    if (pending.tokens.empty()) throw ParseError(line_no, "sentence without words");
    const int n = static_cast<int>(pending.tokens.size());
    for (std::size_t i = 0; i < pending.tokens.size(); ++i) {
      const auto& head = pending.tokens[i].head;
      if (head && (*head < 0 || *head > n))
        throw ParseError(head_lines[i], "HEAD " + std::to_string(*head) + " out of range");
    }
    for (const auto& mwt : pending.multiword_tokens)
      if (mwt.last > n) throw ParseError(line_no, "multiword token range beyond sentence");
    current_doc().sentences.push_back(std::move(pending));
    pending = Sentence{};
    head_lines.clear();
    in_sentence = false;
  };

  const auto lines = split_lines(bytes);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::size_t line_no = idx + 1;
    const auto line = lines[idx];
    if (line.empty()) {
      finish_sentence(line_no);
      continue;
    }
    if (line.front() == '#') {
      if (is_newdoc(line)) {
        Document doc;
        doc.id = newdoc_id(line);
        doc.newdoc_line = std::string(line);
        corpus.documents.push_back(std::move(doc));
      } else {
        pending.comments.emplace_back(line);
        in_sentence = true;
      }
      continue;
    }
    in_sentence = true;
    const auto cols = split(line, '\t');
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 columns, found " + std::to_string(cols.size()));
    const auto id = cols[0];
    if (const auto dash = id.find('-'); dash != std::string_view::npos) {
      auto first = parse_int(id.substr(0, dash));
      auto last = parse_int(id.substr(dash + 1));
      if (!first || !last || *first < 1 || *last < *first)
        throw ParseError(line_no, "malformed multiword range '" + std::string(id) + "'");
      std::string rest;
      for (std::size_t c = 2; c < 10; ++c) {
        if (c > 2) rest.push_back('\t');
        rest += cols[c];
      }
      pending.multiword_tokens.push_back({*first, *last, std::string(cols[1]), std::move(rest)});
      continue;
    }
    if (const auto dot = id.find('.'); dot != std::string_view::npos) {
      auto after = parse_int(id.substr(0, dot));
      if (!after) throw ParseError(line_no, "malformed empty node id '" + std::string(id) + "'");
      pending.empty_nodes.push_back({*after, std::string(line)});
      continue;
    }
    const auto word_id = parse_int(id);
    if (!word_id || *word_id != static_cast<int>(pending.tokens.size()) + 1)
      throw ParseError(line_no, "unexpected word id '" + std::string(id) + "'");
    if (cols[1].empty()) throw ParseError(line_no, "empty FORM");

    Token token;
    token.form = std::string(cols[1]);
    token.lemma = optional_column(cols[2]);
    token.upos = optional_column(cols[3]);
    token.xpos = optional_column(cols[4]);
    if (cols[5] != "_") {
      try {
        token.ufeats = parse_features(cols[5]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
    }
    if (cols[6] != "_") {
      const auto head = parse_int(cols[6]);
      if (!head) throw ParseError(line_no, "non-integer HEAD '" + std::string(cols[6]) + "'");
      token.head = *head;
    }
    token.deprel = optional_column(cols[7]);
    token.deps = std::string(cols[8]);
    token.misc = std::string(cols[9]);
    pending.tokens.push_back(std::move(token));
    head_lines.push_back(line_no);
  }
  finish_sentence(lines.size() + 1);
  return corpus;
}

std::string serialize_conllu(const Corpus& corpus) {
  std::ostringstream out;
  for (const auto& doc : corpus.documents) {
    if (doc.newdoc_line) out << *doc.newdoc_line << '\n';
    for (const auto& s : doc.sentences) {
      for (const auto& c : s.comments) out << c << '\n';
      auto emit_empty = [&](int after) {
        for (const auto& e : s.empty_nodes)
          if (e.after == after) out << e.line << '\n';
      };
      emit_empty(0);
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        for (const auto& m : s.multiword_tokens)
          if (m.first == id) out << m.first << '-' << m.last << '\t' << m.form << '\t' << m.rest << '\n';
        const auto& t = s.tokens[i];
        out << id << '\t' << t.form << '\t' << column_or_blank(t.lemma) << '\t'
            << column_or_blank(t.upos) << '\t' << column_or_blank(t.xpos) << '\t'
            << (t.ufeats ? format_features(*t.ufeats) : "_") << '\t'
            << (t.head ? std::to_string(*t.head) : "_") << '\t' << column_or_blank(t.deprel) << '\t'
            << t.deps << '\t' << t.misc << '\n';
        emit_empty(id);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::vector<std::vector<std::size_t>> shuffle_blocks(const Document& doc, std::size_t max_block_words) {
  if (max_block_words < 1) throw std::invalid_argument("max_block_words must be at least 1");
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t words = 0;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const std::size_t n = doc.sentences[i].size();
    if (blocks.empty() || words + n > max_block_words) {
      blocks.emplace_back();
      words = 0;
    }
    blocks.back().push_back(i);
    words += n;
  }
  return blocks;
}

Document block_shuffle(const Document& doc, std::size_t max_block_words, std::uint64_t seed) {
  auto blocks = shuffle_blocks(doc, max_block_words);
  Rng rng(seed);
  rng.shuffle(blocks);
  Document out;
  out.id = doc.id;
  out.newdoc_line = doc.newdoc_line;
  for (const auto& block : blocks)
    for (std::size_t i : block) out.sentences.push_back(doc.sentences[i]);
  return out;
}

Corpus filter_min_tokens(const Corpus& corpus, std::size_t min_tokens) {
  Corpus out;
  for (const auto& doc : corpus.documents)
    if (doc.token_count() >= min_tokens) out.documents.push_back(doc);
  return out;
}

std::vector<FoldSplit> kfold_split(const std::vector<std::string>& item_ids, std::size_t k,
                                   double dev_fraction, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be at least 2");
  if (item_ids.size() < k)
    throw std::invalid_argument("kfold_split: " + std::to_string(item_ids.size()) +
                                " items cannot fill " + std::to_string(k) + " folds");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0)
    throw std::invalid_argument("kfold_split: dev_fraction must lie in [0, 1)");

  const std::size_t n = item_ids.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> fold_of(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) fold_of[order[pos++]] = f;
  }

  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    auto& split = folds[f];
    split.fold_index = f;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f)
        split.test_ids.push_back(item_ids[i]);
      else
        rest.push_back(i);
    }
    Rng fold_rng(derive_seed(seed, f));
    auto shuffled = rest;
    fold_rng.shuffle(shuffled);
    const auto dev_size = static_cast<std::size_t>(std::lround(dev_fraction * static_cast<double>(rest.size())));
    std::vector<bool> is_dev(n, false);
    for (std::size_t j = 0; j < dev_size; ++j) is_dev[shuffled[j]] = true;
    for (std::size_t i : rest) (is_dev[i] ? split.dev_ids : split.train_ids).push_back(item_ids[i]);
  }
  return folds;
}

std::string serialize_folds(const std::vector<FoldSplit>& folds) {
  std::ostringstream out;
  for (const auto& f : folds) {
    for (const auto& id : f.train_ids) out << f.fold_index << "\ttrain\t" << id << '\n';
    for (const auto& id : f.dev_ids) out << f.fold_index << "\tdev\t" << id << '\n';
    for (const auto& id : f.test_ids) out << f.fold_index << "\ttest\t" << id << '\n';
  }
  return out.str();
}

std::vector<FoldSplit> parse_folds(std::string_view text) {
  std::map<std::size_t, FoldSplit> folds;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 3) throw ParseError(i + 1, "expected fold<TAB>role<TAB>id");
    const auto fold = parse_int(cols[0]);
    if (!fold || *fold < 0) throw ParseError(i + 1, "malformed fold index");
    auto& split = folds[static_cast<std::size_t>(*fold)];
    split.fold_index = static_cast<std::size_t>(*fold);
    const std::string id(cols[2]);
    if (cols[1] == "train") split.train_ids.push_back(id);
    else if (cols[1] == "dev") split.dev_ids.push_back(id);
    else if (cols[1] == "test") split.test_ids.push_back(id);
    else throw ParseError(i + 1, "unknown role '" + std::string(cols[1]) + "'");
  }
  std::vector<FoldSplit> out;
  for (auto& [_, f] : folds) out.push_back(std::move(f));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace czlm
