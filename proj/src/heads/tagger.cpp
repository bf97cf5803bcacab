#include "czlm/heads/tagger.hpp"

#include <algorithm>
#include <numeric>

#include "czlm/heads/parser.hpp"
#include "czlm/nn/adam.hpp"
#include "czlm/nn/layers.hpp"
#include "czlm/nn/ops.hpp"
#include "czlm/utf8.hpp"

namespace czlm::heads {

using nn::Tensor;

Labels::Labels(bool with_unknown) : with_unknown_(with_unknown) {
  if (with_unknown_) add("<unk>");
}

std::size_t Labels::add(const std::string& s) {
  auto [it, inserted] = ids_.try_emplace(s, names_.size());
  if (inserted) names_.push_back(s);
  return it->second;
}

long Labels::find(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? -1 : static_cast<long>(it->second);
}

long Labels::lookup(const std::string& s) const {
  const long id = find(s);
  return id < 0 && with_unknown_ ? 0 : id;
}

namespace {

std::string column(const std::optional<std::string>& v) { return v ? *v : "_"; }

std::string feats_column(const Token& t) { return t.ufeats ? format_features(*t.ufeats) : "_"; }

}  // namespace

TaggerVocab TaggerVocab::build(const std::vector<Sentence>& train) {
  TaggerVocab v;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& s : train)
    for (const auto& t : s.tokens) {
      v.words.add(t.form);
      for (char32_t c : utf8::decode(t.form)) v.chars.add(utf8::encode(std::u32string(1, c)));
      v.upos.add(column(t.upos));
      v.xpos.add(column(t.xpos));
      v.feats.add(feats_column(t));
      v.deprels.add(column(t.deprel));
      pairs.emplace_back(t.form, t.lemma && *t.lemma != "_" ? *t.lemma : t.form);
    }
  v.lemmas = LemmaInventory::build(pairs);
  return v;
}

SentenceFeatures contextual_features(const nn::TransformerConfig& config, const nn::ParameterSet& params,
                                     const bbpe::ByteVocab& vocab, const Sentence& sentence) {
  std::string text;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& t : sentence.tokens) {
    if (!text.empty()) text += ' ';
    spans.emplace_back(text.size(), text.size() + t.form.size());
    text += t.form;
  }
  auto enc = vocab.encode(text);
  const std::size_t limit = config.max_positions >= 2 ? config.max_positions - 2 : 0;
  if (enc.ids.size() > limit) {
    enc.ids.resize(limit);
    enc.offsets.resize(limit);
  }
  std::vector<int> ids = {bbpe::kBos};
  ids.insert(ids.end(), enc.ids.begin(), enc.ids.end());
  ids.push_back(bbpe::kEos);

  SentenceFeatures f;
  {
    nn::NoGradGuard guard;
    auto out = nn::forward_transformer(config, params, ids, 1, ids.size());
    for (auto& h : out.hidden) f.layers.push_back(h.detach());
  }
  f.groups.resize(sentence.tokens.size());
  for (std::size_t k = 0; k < enc.offsets.size(); ++k) {
    const auto [s, e] = enc.offsets[k];
    for (std::size_t t = 0; t < spans.size(); ++t)
      if (s < spans[t].second && spans[t].first < e) {
        f.groups[t].push_back(k + 1);
        break;
      }
  }
  // Tokens cut off by truncation fall back to the </s> row.
  for (auto& g : f.groups)
    if (g.empty()) g.push_back(ids.size() - 1);
  return f;
}

JointTagger::JointTagger(TaggerConfig config, TaggerVocab vocab, std::size_t contextual_dim,
                         std::size_t contextual_layers, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), contextual_layers_(contextual_layers) {
  Rng rng(seed);
  auto& p = params_;
  p.add("word_emb", nn::init_uniform({vocab_.words.size(), config_.word_dim}, config_.word_dim, rng));
  p.add("char_emb", nn::init_uniform({vocab_.chars.size(), config_.char_dim}, config_.char_dim, rng));
  nn::add_birnn(p, "char_rnn", config_.char_dim, config_.char_hidden, rng);
  std::size_t in = config_.word_dim + 2 * config_.char_hidden;
  if (contextual_layers_ > 0) {
    p.add("ctx.mix", Tensor::zeros({contextual_layers_}, true));
    p.add("ctx.gamma", Tensor::scalar(1.0, true));
    nn::add_layer_norm(p, "ctx.ln", contextual_dim);
    in += contextual_dim;
  }
  for (std::size_t l = 0; l < config_.rnn_layers; ++l) {
    nn::add_birnn(p, "rnn" + std::to_string(l), in, config_.hidden, rng);
    in = 2 * config_.hidden;
  }
  nn::add_linear(p, "upos", in, vocab_.upos.size(), rng);
  nn::add_linear(p, "xpos", in, vocab_.xpos.size(), rng);
  nn::add_linear(p, "feats", in, vocab_.feats.size(), rng);
  nn::add_linear(p, "lemma", in, vocab_.lemmas.size(), rng);
  if (config_.parse) {
    const std::size_t a = config_.arc_dim, l = config_.label_dim, R = vocab_.deprels.size();
    p.add("root", nn::init_uniform({1, in}, in, rng));
    nn::add_linear(p, "arc_h", in, a, rng);
    nn::add_linear(p, "arc_d", in, a, rng);
    nn::add_linear(p, "lab_h", in, l, rng);
    nn::add_linear(p, "lab_d", in, l, rng);
    p.add("arc.U", nn::init_uniform({1, a, a}, a, rng));
    p.add("arc.u", Tensor::zeros({1, a}, true));
    p.add("arc.v", Tensor::zeros({1, a}, true));
    p.add("arc.b", Tensor::zeros({1}, true));
    p.add("lab.U", nn::init_uniform({R, l, l}, l, rng));
    p.add("lab.u", nn::init_uniform({R, l}, l, rng));
    p.add("lab.v", nn::init_uniform({R, l}, l, rng));
    p.add("lab.b", Tensor::zeros({R}, true));
  }
}

Tensor JointTagger::trunk(const Sentence& sentence, const SentenceFeatures* features) const {
  const auto& p = params_;
  const std::size_t n = sentence.tokens.size();
  if (n == 0) throw std::invalid_argument("cannot tag an empty sentence");
  std::vector<int> word_ids;
  std::vector<Tensor> char_vectors;
  for (const auto& t : sentence.tokens) {
    word_ids.push_back(static_cast<int>(vocab_.words.lookup(t.form)));
    std::vector<int> cids;
    for (char32_t c : utf8::decode(t.form))
      cids.push_back(static_cast<int>(vocab_.chars.lookup(utf8::encode(std::u32string(1, c)))));
    // Forward state after the last character, backward state after the first.
    const auto chars = nn::embedding(p["char_emb"], cids);
    const auto fw = nn::apply_gru(p, "char_rnn.fw", chars, false);
    const auto bw = nn::apply_gru(p, "char_rnn.bw", chars, true);
    char_vectors.push_back(nn::concat_cols({nn::slice_rows(fw, cids.size() - 1, 1), nn::slice_rows(bw, 0, 1)}));
  }
  std::vector<Tensor> parts = {nn::embedding(p["word_emb"], word_ids), nn::concat_rows(char_vectors)};
  if (contextual_layers_ > 0) {
    if (!features || features->layers.size() != contextual_layers_)
      throw std::invalid_argument("tagger expects " + std::to_string(contextual_layers_) + " contextual layers");
    if (features->groups.size() != n) throw std::invalid_argument("contextual features cover a different token count");
    auto mixed = nn::scalar_mix(features->layers, p["ctx.mix"], p["ctx.gamma"]);
    parts.push_back(nn::apply_layer_norm(p, "ctx.ln", nn::pool_subwords(mixed, features->groups)));
  }
  Tensor x = nn::concat_cols(parts);
  for (std::size_t l = 0; l < config_.rnn_layers; ++l) x = nn::birnn_layer(p, "rnn" + std::to_string(l), x);
  return x;
}

JointTagger::Output JointTagger::forward(const Sentence& sentence, const SentenceFeatures* features) const {
  const auto& p = params_;
  Output out;
  auto x = trunk(sentence, features);
  out.upos = nn::apply_linear(p, "upos", x);
  out.xpos = nn::apply_linear(p, "xpos", x);
  out.feats = nn::apply_linear(p, "feats", x);
  out.lemma = nn::apply_linear(p, "lemma", x);
  if (config_.parse) {
    auto with_root = nn::concat_rows({p["root"], x});
    auto ah = nn::tanh(nn::apply_linear(p, "arc_h", with_root));
    auto ad = nn::tanh(nn::apply_linear(p, "arc_d", x));
    out.arcs = biaffine(ah, ad, p["arc.U"], p["arc.u"], p["arc.v"], p["arc.b"]);
    auto lh = nn::tanh(nn::apply_linear(p, "lab_h", with_root));
    auto ld = nn::tanh(nn::apply_linear(p, "lab_d", x));
    out.labels = biaffine(lh, ld, p["lab.U"], p["lab.u"], p["lab.v"], p["lab.b"]);
  }
  return out;
}

Tensor JointTagger::loss(const Sentence& gold, const SentenceFeatures* features) const {
  const auto out = forward(gold, features);
  const std::size_t n = gold.tokens.size();
  std::vector<int> upos, xpos, feats, lemma, heads, rels;
  for (const auto& t : gold.tokens) {
    upos.push_back(static_cast<int>(vocab_.upos.find(column(t.upos))));
    xpos.push_back(static_cast<int>(vocab_.xpos.find(column(t.xpos))));
    feats.push_back(static_cast<int>(vocab_.feats.find(feats_column(t))));
    const auto script = derive_edit_script(t.form, t.lemma && *t.lemma != "_" ? *t.lemma : t.form);
    lemma.push_back(static_cast<int>(vocab_.lemmas.find(script)));
    heads.push_back(t.head ? *t.head : -1);
    rels.push_back(static_cast<int>(vocab_.deprels.find(column(t.deprel))));
  }
  for (auto* v : {&upos, &xpos, &feats, &lemma, &heads, &rels})
    for (auto& x : *v)
      if (x < 0) x = nn::kIgnoreIndex;
  Tensor total = nn::add(nn::softmax_cross_entropy(out.upos, upos), nn::softmax_cross_entropy(out.xpos, xpos));
  total = nn::add(total, nn::softmax_cross_entropy(out.feats, feats));
  total = nn::add(total, nn::softmax_cross_entropy(out.lemma, lemma));
  if (config_.parse) {
    total = nn::add(total, nn::softmax_cross_entropy(out.arcs, heads));
    const std::size_t R = vocab_.deprels.size();
    std::vector<std::size_t> rows;
    std::vector<int> targets;
    for (std::size_t j = 0; j < n; ++j)
      if (heads[j] != nn::kIgnoreIndex) {
        rows.push_back(j * (n + 1) + static_cast<std::size_t>(heads[j]));
        targets.push_back(rels[j]);
      }
    if (!rows.empty()) {
      auto per_arc = nn::reshape(out.labels, {n * (n + 1), R});
      total = nn::add(total, nn::softmax_cross_entropy(nn::gather_rows(per_arc, rows), targets));
    }
  }
  return total;
}

namespace {

std::vector<std::size_t> ranked(std::span<const double> row) {
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return idx;
}

std::size_t argmax_row(const Tensor& t, std::size_t i) {
  const std::size_t c = t.dim(1);
  const auto row = t.values().subspan(i * c, c);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::optional<std::string> from_column(const std::string& s) {
  if (s == "_") return std::nullopt;
  return s;
}

}  // namespace

Sentence JointTagger::predict(const Sentence& sentence, const SentenceFeatures* features) const {
  nn::NoGradGuard guard;
  const auto out = forward(sentence, features);
  Sentence result = sentence;
  const std::size_t n = sentence.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = result.tokens[i];
    t.upos = from_column(vocab_.upos.name(argmax_row(out.upos, i)));
    t.xpos = from_column(vocab_.xpos.name(argmax_row(out.xpos, i)));
    const auto& f = vocab_.feats.name(argmax_row(out.feats, i));
    t.ufeats = f == "_" ? std::nullopt : std::optional(parse_features(f));
    const std::size_t c = out.lemma.dim(1);
    t.lemma = t.form;
    for (std::size_t k : ranked(out.lemma.values().subspan(i * c, c))) {
      try {
        t.lemma = apply_edit_script(t.form, vocab_.lemmas.script(k));
        break;
      } catch (const EditScriptError&) {
      }
    }
  }
  if (config_.parse) {
    const auto tree = decode_tree(DepArcScores::from_biaffine(out.arcs, out.labels), config_.single_root);
    for (std::size_t i = 0; i < n; ++i) {
      result.tokens[i].head = static_cast<int>(tree.heads[i]);
      result.tokens[i].deprel = from_column(vocab_.deprels.name(tree.labels[i]));
    }
  }
  return result;
}

void train_tagger(JointTagger& model, const std::vector<Sentence>& train,
                  const std::vector<SentenceFeatures>& features, const TaggerTrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_step) {
  if (train.empty()) throw std::invalid_argument("no training sentences");
  if (!features.empty() && features.size() != train.size())
    throw std::invalid_argument("one feature set per training sentence");
  nn::Adam adam(model.params(), nn::AdamConfig{});
  const std::size_t batch = std::min(config.batch_size, train.size());
  std::vector<std::size_t> order(train.size());
  std::size_t cursor = order.size(), pass = 0;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    model.params().zero_grad();
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.seed, pass++));
        rng.shuffle(order);
        cursor = 0;
      }
      const std::size_t i = order[cursor++];
      auto l = nn::scale(model.loss(train[i], features.empty() ? nullptr : &features[i]),
                         1.0 / static_cast<double>(batch));
      total += l.item();
      l.backward();
    }
    adam.step(config.lr);
    if (on_step) on_step(step, total);
  }
  model.params().zero_grad();
}

}  // namespace czlm::heads
