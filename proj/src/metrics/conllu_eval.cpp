#include "czlm/metrics/conllu_eval.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "czlm/utf8.hpp"

namespace czlm::metrics {

const std::vector<std::string>& universal_features() {
  static const std::vector<std::string> v = {
      "PronType", "NumType", "Poss",     "Reflex", "Foreign", "Abbr",  "Gender",  "Animacy", "Number", "Case", "Definite",
      "Degree",   "VerbForm", "Mood",    "Tense",  "Aspect",  "Voice", "Evident", "Polarity", "Person", "Polite"};
  return v;
}

const std::vector<std::string>& content_deprels() {
  static const std::vector<std::string> v = {
      "nsubj", "obj",   "iobj",  "csubj",    "ccomp",    "xcomp",  "obl",      "vocative", "expl",    "dislocated",
      "advcl", "advmod", "discourse", "nmod", "appos",    "nummod", "acl",      "amod",     "conj",    "fixed",
      "flat",  "compound", "list", "parataxis", "orphan", "goeswith", "reparandum", "root",  "dep"};
  return v;
}

const std::vector<std::string>& functional_deprels() {
  static const std::vector<std::string> v = {"aux", "cop", "mark", "det", "clf", "case", "cc"};
  return v;
}

std::vector<std::pair<std::string, PrfCounts>> ConlluEvalReport::metrics() const {
  return {{"UPOS", upos}, {"XPOS", xpos}, {"UFeats", ufeats}, {"Lemmas", lemmas},
          {"UAS", uas},   {"LAS", las},   {"MLAS", mlas},     {"BLEX", blex}};
}

namespace {

bool contains(const std::vector<std::string>& set, const std::string& s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

struct Word {
  std::u32string form;  // lowercased
  std::size_t start = 0, end = 0;
  bool multiword = false;
  std::string upos, xpos, feats, lemma, deprel;
  long parent = -1;  // -1 root
  std::vector<std::size_t> functional_children;
  bool content = false, functional = false;
};

struct Loaded {
  std::u32string chars;
  std::vector<Word> words;
};

std::u32string strip_spaces(const std::string& form) {
  std::u32string out;
  for (char32_t c : utf8::decode(form))
    if (!(c < 0x80 && utf8::is_space(static_cast<unsigned char>(c))) && c != 0xA0 && c != 0x3000 && c != 0x202F)
      out.push_back(c);
  return out;
}

std::string universal_feats(const Token& t) {
  std::vector<std::string> kept;
  if (t.ufeats)
    for (const auto& [name, value] : *t.ufeats)
      if (contains(universal_features(), name)) kept.push_back(name + "=" + value);
  std::sort(kept.begin(), kept.end());
  if (kept.empty()) return "_";
  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) out += (i ? "|" : "") + kept[i];
  return out;
}

Loaded load(const Corpus& corpus) {
  Loaded ud;
  for (const auto& doc : corpus.documents)
    for (const auto& sent : doc.sentences) {
      const std::size_t base = ud.words.size();
      std::size_t mwt = 0;
      std::size_t span_end_word = 0, span_start = 0, span_end = 0;
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        const auto& t = sent.tokens[i];
        const int id = static_cast<int>(i) + 1;
        Word w;
        if (mwt < sent.multiword_tokens.size() && sent.multiword_tokens[mwt].first == id) {
          const auto& m = sent.multiword_tokens[mwt++];
          span_start = ud.chars.size();
          ud.chars += strip_spaces(m.form);
          span_end = ud.chars.size();
          span_end_word = static_cast<std::size_t>(m.last);
        }
        if (span_end_word >= static_cast<std::size_t>(id)) {
          w.multiword = true;
          w.start = span_start;
          w.end = span_end;
        } else {
          w.start = ud.chars.size();
          ud.chars += strip_spaces(t.form);
          w.end = ud.chars.size();
        }
        w.form = utf8::to_lower(strip_spaces(t.form));
        w.upos = t.upos.value_or("_");
        w.xpos = t.xpos.value_or("_");
        w.feats = universal_feats(t);
        w.lemma = t.lemma.value_or("_");
        const auto deprel = t.deprel.value_or("_");
        w.deprel = deprel.substr(0, deprel.find(':'));
        w.content = contains(content_deprels(), w.deprel);
        w.functional = contains(functional_deprels(), w.deprel);
        if (t.head && *t.head > 0) w.parent = static_cast<long>(base) + *t.head - 1;
        ud.words.push_back(std::move(w));
      }
      for (std::size_t i = base; i < ud.words.size(); ++i)
        if (ud.words[i].parent >= 0 && ud.words[i].functional)
          ud.words[static_cast<std::size_t>(ud.words[i].parent)].functional_children.push_back(i);
    }
  return ud;
}

bool beyond_end(const std::vector<Word>& words, std::size_t i, std::size_t end) {
  if (i >= words.size()) return true;
  if (words[i].multiword) return words[i].start >= end;
  return words[i].end > end;
}

std::size_t extend_end(const Word& w, std::size_t end) { return w.multiword && w.end > end ? w.end : end; }

class Aligner {
 public:
  Aligner(const std::vector<Word>& g, const std::vector<Word>& s) : g_(g), s_(s) {}

  // system index -> gold index
  std::map<std::size_t, std::size_t> run() {
    std::size_t gi = 0, si = 0;
    while (gi < g_.size() && si < s_.size()) {
      if (g_[gi].multiword || s_[si].multiword) {
        std::size_t gs, ss;
        find_multiword_span(gi, si, gs, ss);
        if (si > ss && gi > gs) align_lcs(gs, ss, gi, si);
      } else if (g_[gi].start == s_[si].start && g_[gi].end == s_[si].end) {
        matched_[si++] = gi++;
      } else if (g_[gi].start <= s_[si].start) {
        ++gi;
      } else {
        ++si;
      }
    }
    return matched_;
  }

 private:
  void find_multiword_span(std::size_t& gi, std::size_t& si, std::size_t& gs, std::size_t& ss) {
    std::size_t end;
    if (g_[gi].multiword) {
      end = g_[gi].end;
      if (!s_[si].multiword && s_[si].start < g_[gi].start) ++si;
    } else {
      end = s_[si].end;
      if (!g_[gi].multiword && g_[gi].start < s_[si].start) ++gi;
    }
    gs = gi;
    ss = si;
    while (!beyond_end(g_, gi, end) || !beyond_end(s_, si, end)) {
      if (gi < g_.size() && (si >= s_.size() || g_[gi].start <= s_[si].start)) {
        end = extend_end(g_[gi], end);
        ++gi;
      } else {
        end = extend_end(s_[si], end);
        ++si;
      }
    }
  }

  void align_lcs(std::size_t gs, std::size_t ss, std::size_t gi, std::size_t si) {
    const std::size_t G = gi - gs, S = si - ss;
    std::vector<std::vector<std::size_t>> lcs(G + 1, std::vector<std::size_t>(S + 1, 0));
    for (std::size_t g = G; g-- > 0;)
      for (std::size_t s = S; s-- > 0;) {
        if (g_[gs + g].form == s_[ss + s].form) lcs[g][s] = 1 + lcs[g + 1][s + 1];
        lcs[g][s] = std::max({lcs[g][s], lcs[g + 1][s], lcs[g][s + 1]});
      }
    std::size_t g = 0, s = 0;
    while (g < G && s < S) {
      if (g_[gs + g].form == s_[ss + s].form) {
        matched_[ss + s] = gs + g;
        ++g;
        ++s;
      } else if (lcs[g][s] == lcs[g + 1][s]) {
        ++g;
      } else {
        ++s;
      }
    }
  }

  const std::vector<Word>& g_;
  const std::vector<Word>& s_;
  std::map<std::size_t, std::size_t> matched_;
};

}  // namespace

ConlluEvalReport eval_conllu(const Corpus& gold_corpus, const Corpus& system_corpus) {
  const auto gold = load(gold_corpus);
  const auto sys = load(system_corpus);
  if (gold.chars != sys.chars) {
    std::size_t i = 0;
    while (i < gold.chars.size() && i < sys.chars.size() && gold.chars[i] == sys.chars[i]) ++i;
    throw AlignmentError("gold and system texts differ at character " + std::to_string(i));
  }
  const auto matched = Aligner(gold.words, sys.words).run();

  // Gold index of a system word's parent: -1 root, -2 not aligned.
  auto sys_parent = [&](const Word& w) -> long {
    if (w.parent < 0) return -1;
    auto it = matched.find(static_cast<std::size_t>(w.parent));
    return it == matched.end() ? -2 : static_cast<long>(it->second);
  };
  auto sys_gold_index = [&](std::size_t s) -> long {
    auto it = matched.find(s);
    return it == matched.end() ? -2 : static_cast<long>(it->second);
  };

  ConlluEvalReport r;
  std::size_t gold_content = 0, sys_content = 0;
  for (const auto& w : gold.words) gold_content += w.content;
  for (const auto& w : sys.words) sys_content += w.content;
  const std::size_t G = gold.words.size(), S = sys.words.size();
  r.words = {matched.size(), S, G};
  for (auto* c : {&r.upos, &r.xpos, &r.ufeats, &r.lemmas, &r.uas, &r.las}) *c = {0, S, G};
  r.mlas = {0, sys_content, gold_content};
  r.blex = {0, sys_content, gold_content};

  for (const auto& [si, gi] : matched) {
    const auto& g = gold.words[gi];
    const auto& s = sys.words[si];
    const std::string s_lemma = g.lemma != "_" ? s.lemma : "_";
    r.upos.correct += g.upos == s.upos;
    r.xpos.correct += g.xpos == s.xpos;
    r.ufeats.correct += g.feats == s.feats;
    r.lemmas.correct += g.lemma == s_lemma;
    const bool head_ok = g.parent == sys_parent(s);
    r.uas.correct += head_ok;
    const bool las_ok = head_ok && g.deprel == s.deprel;
    r.las.correct += las_ok;
    if (!g.content) continue;
    r.blex.correct += las_ok && g.lemma == s_lemma;

    using Child = std::tuple<long, std::string, std::string, std::string>;
    std::vector<Child> gc, sc;
    for (auto c : g.functional_children) {
      const auto& w = gold.words[c];
      gc.emplace_back(static_cast<long>(c), w.deprel, w.upos, w.feats);
    }
    for (auto c : s.functional_children) {
      const auto& w = sys.words[c];
      sc.emplace_back(sys_gold_index(c), w.deprel, w.upos, w.feats);
    }
    r.mlas.correct += las_ok && g.upos == s.upos && g.feats == s.feats && gc == sc;
  }
  return r;
}

}  // namespace czlm::metrics
