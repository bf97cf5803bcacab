#include "czlm/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace czlm::cli {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration (" + std::to_string(problems.size()) + " problem" +
                    (problems.size() == 1 ? "" : "s") + "):";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const std::vector<SchemaEntry>& config_schema() {
  using O = DefaultOrigin;
  static const std::vector<SchemaEntry> schema = {
      {"run.seed", "1", O::Local, "master seed"},
      {"run.threads", "1", O::Local, "worker threads; 1 is bit-reproducible"},
      {"run.out", "runs/default", O::Local, "output directory"},
      {"data.corpus", "", O::Local, "plain-text pretraining corpus"},
      {"data.treebank_train", "", O::Local, "CoNLL-U training treebank"},
      {"data.treebank_dev", "", O::Local, "CoNLL-U evaluation treebank"},
      {"data.sentiment", "", O::Local, "sentiment TSV"},
      {"tokenizer.vocab_cap", "52000", O::Reference, "vocabulary size cap"},
      {"tokenizer.dir", "", O::Local, "directory with vocab.tsv and merges.tsv; empty trains a tokenizer"},
      {"model.layers", "12", O::Reference, "transformer layers"},
      {"model.hidden", "768", O::Reference, "hidden size"},
      {"model.heads", "12", O::Reference, "attention heads"},
      {"model.ffn", "3072", O::Reference, "feed-forward size"},
      {"model.max_positions", "512", O::Reference, "position embeddings"},
      {"model.ln_eps", "1e-5", O::Local, "layer norm epsilon"},
      {"pretrain.steps", "91075", O::Reference, "optimization steps"},
      {"pretrain.batch_size", "8192", O::Reference, "sequences per step"},
      {"pretrain.max_len", "512", O::Reference, "sample length cap"},
      {"pretrain.mask_prob", "0.15", O::Local, "masking selection probability"},
      {"pretrain.schedule", "polynomial_decay", O::Reference, "learning-rate schedule"},
      {"pretrain.warmup_steps", "10000", O::Reference, "warmup steps"},
      {"pretrain.peak_lr", "7e-4", O::Reference, "peak learning rate"},
      {"pretrain.total_steps", "91075", O::Reference, "schedule length"},
      {"pretrain.end_lr", "0", O::Local, "final learning rate"},
      {"pretrain.power", "1", O::Local, "polynomial decay power"},
      {"pretrain.beta1", "0.9", O::Reference, "Adam beta1"},
      {"pretrain.beta2", "0.98", O::Reference, "Adam beta2"},
      {"pretrain.adam_eps", "1e-6", O::Local, "Adam epsilon"},
      {"probe.task", "tagger", O::Local, "tagger or sentiment"},
      {"probe.checkpoint", "", O::Local, "pretrained checkpoint; empty runs without contextual input"},
      {"tagger.word_dim", "32", O::Local, "word embedding size"},
      {"tagger.char_dim", "16", O::Local, "character embedding size"},
      {"tagger.char_hidden", "16", O::Local, "character GRU size"},
      {"tagger.hidden", "32", O::Local, "recurrent size"},
      {"tagger.rnn_layers", "3", O::Reference, "bidirectional recurrent layers"},
      {"tagger.parse", "true", O::Reference, "train the parser jointly"},
      {"tagger.steps", "300", O::Local, "training steps"},
      {"tagger.batch_size", "32", O::Local, "sentences per step"},
      {"tagger.lr", "3e-3", O::Local, "Adam learning rate"},
      {"sentiment.lr_grid", "1e-5,2e-5,3e-5,5e-5", O::Reference, "peak learning rates"},
      {"sentiment.folds", "10", O::Reference, "cross-validation folds"},
      {"sentiment.dev_fraction", "0.1", O::Reference, "development share of training items"},
      {"sentiment.frozen_epochs", "1", O::Reference, "classifier-only epochs"},
      {"sentiment.frozen_lr", "1e-3", O::Reference, "classifier-only learning rate"},
      {"sentiment.batch_size", "64", O::Reference, "items per step"},
      {"sentiment.warmup_epochs", "4", O::Reference, "cosine warmup epochs"},
      {"sentiment.decay_epochs", "10", O::Reference, "cosine decay epochs"},
  };
  return schema;
}

std::string environment_name(const std::string& key) {
  std::string name = "CZLM_";
  for (char c : key) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

RawConfig::RawConfig() {
  for (const auto& e : config_schema()) values_[e.key] = {e.default_value, Source::Default, ""};
}

void RawConfig::merge_ini(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    problems_.push_back(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
    return;
  }
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) {
      problems_.push_back(origin + ": key '" + section + "' outside a section");
      continue;
    }
    for (const auto& [name, value] : entries) {
      const auto key = section + "." + name;
      if (!values_.count(key)) {
        problems_.push_back(origin + ": unknown key '" + key + "'");
        continue;
      }
      values_[key] = {value.data(), Source::File, origin};
    }
  }
}

void RawConfig::merge_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    problems_.push_back("cannot read config file '" + path + "'");
    return;
  }
  std::ostringstream text;
  text << in.rdbuf();
  merge_ini(text.str(), path);
}

void RawConfig::apply_environment(const std::map<std::string, std::string>& env) {
  for (const auto& e : config_schema()) {
    const auto name = environment_name(e.key);
    if (auto it = env.find(name); it != env.end()) values_[e.key] = {it->second, Source::Environment, name};
  }
}

void RawConfig::set(const std::string& key, const std::string& value, Source source, const std::string& detail) {
  if (!values_.count(key)) {
    problems_.push_back(detail + ": unknown key '" + key + "'");
    return;
  }
  values_[key] = {value, source, detail};
}

const Setting& RawConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  return it->second;
}

std::string RawConfig::resolved_ini() const {
  std::string out;
  std::string section;
  for (const auto& e : config_schema()) {
    const auto dot = e.key.find('.');
    const auto sec = e.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    const auto& s = values_.at(e.key);
    std::string source;
    switch (s.source) {
      case Source::Default:
        source = e.origin == DefaultOrigin::Reference ? "default, reference setup" : "default, local choice";
        break;
      case Source::File: source = "file " + s.detail; break;
      case Source::Environment: source = "environment " + s.detail; break;
      case Source::Flag: source = s.detail; break;
    }
    out += "; " + e.help + " [" + source + "]\n";
    out += e.key.substr(dot + 1) + " = " + s.value + "\n";
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw), problems_(raw.problems()) {}

  std::string text(const std::string& key) { return raw_.get(key).value; }

  std::size_t count(const std::string& key, std::size_t min = 0) {
    const auto& v = raw_.get(key).value;
    std::size_t out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
      fail(key, "expected a non-negative integer, got '" + v + "'");
      return 0;
    }
    if (out < min) fail(key, "must be at least " + std::to_string(min));
    return out;
  }

  double real(const std::string& key) {
    const auto& v = raw_.get(key).value;
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used == v.size() && std::isfinite(out)) return out;
    } catch (const std::exception&) {
    }
    fail(key, "expected a number, got '" + v + "'");
    return 0.0;
  }

  double positive(const std::string& key) {
    const double v = real(key);
    if (!(v > 0)) fail(key, "must be positive");
    return v;
  }

  double unit(const std::string& key, bool allow_one) {
    const double v = real(key);
    if (v < 0 || v > 1 || (!allow_one && v == 1)) fail(key, allow_one ? "must lie in [0, 1]" : "must lie in [0, 1)");
    return v;
  }

  bool flag(const std::string& key) {
    auto v = raw_.get(key).value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + raw_.get(key).value + "'");
    return false;
  }

  std::string path(const std::string& key) {
    const auto v = raw_.get(key).value;
    if (!v.empty() && !std::filesystem::exists(v)) fail(key, "path '" + v + "' does not exist");
    return v;
  }

  void fail(const std::string& key, const std::string& message) {
    const auto& s = raw_.get(key);
    std::string where = s.source == Source::Default ? "" : " (from " + (s.detail.empty() ? "default" : s.detail) + ")";
    problems_.push_back(key + ": " + message + where);
  }

  void problem(const std::string& message) { problems_.push_back(message); }
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  const RawConfig& raw_;
  std::vector<std::string> problems_;
};

}  // namespace

ExperimentConfig resolve_config(const RawConfig& raw) {
  Reader r(raw);
  ExperimentConfig c;
  c.seed = r.count("run.seed");
  c.threads = r.count("run.threads", 1);
  c.out = r.text("run.out");
  if (c.out.empty()) r.fail("run.out", "must not be empty");

  c.corpus = r.path("data.corpus");
  c.treebank_train = r.path("data.treebank_train");
  c.treebank_dev = r.path("data.treebank_dev");
  c.sentiment_data = r.path("data.sentiment");

  c.vocab_cap = r.count("tokenizer.vocab_cap", static_cast<std::size_t>(bbpe::kByteOnlySize));
  c.tokenizer_dir = r.path("tokenizer.dir");

  auto& m = c.pretrain.model;
  m.layers = r.count("model.layers", 1);
  m.hidden = r.count("model.hidden", 1);
  m.heads = r.count("model.heads", 1);
  m.ffn = r.count("model.ffn", 1);
  m.max_positions = r.count("model.max_positions", 1);
  m.ln_eps = r.positive("model.ln_eps");
  if (m.heads && m.hidden % m.heads != 0) r.fail("model.hidden", "must be divisible by model.heads");

  auto& p = c.pretrain;
  p.steps = r.count("pretrain.steps", 1);
  p.batch_size = r.count("pretrain.batch_size", 1);
  c.max_len = r.count("pretrain.max_len", 8);
  if (c.max_len > m.max_positions) r.fail("pretrain.max_len", "exceeds model.max_positions");
  p.mask_prob = r.unit("pretrain.mask_prob", true);
  try {
    p.schedule.kind = nn::parse_schedule_kind(r.text("pretrain.schedule"));
  } catch (const std::exception& e) {
    r.fail("pretrain.schedule", e.what());
  }
  p.schedule.warmup_steps = static_cast<double>(r.count("pretrain.warmup_steps"));
  p.schedule.peak_lr = r.positive("pretrain.peak_lr");
  p.schedule.total_steps = static_cast<double>(r.count("pretrain.total_steps", 1));
  p.schedule.end_lr = r.real("pretrain.end_lr");
  p.schedule.power = r.positive("pretrain.power");
  if (p.schedule.warmup_steps > p.schedule.total_steps)
    r.fail("pretrain.warmup_steps", "exceeds pretrain.total_steps");
  p.adam.beta1 = r.unit("pretrain.beta1", false);
  p.adam.beta2 = r.unit("pretrain.beta2", false);
  p.adam.eps = r.positive("pretrain.adam_eps");
  p.seed = c.seed;

  c.task = r.text("probe.task");
  if (c.task != "tagger" && c.task != "sentiment") r.fail("probe.task", "must be tagger or sentiment");
  c.checkpoint = r.path("probe.checkpoint");

  auto& t = c.tagger;
  t.word_dim = r.count("tagger.word_dim", 1);
  t.char_dim = r.count("tagger.char_dim", 1);
  t.char_hidden = r.count("tagger.char_hidden", 1);
  t.hidden = r.count("tagger.hidden", 1);
  t.rnn_layers = r.count("tagger.rnn_layers", 1);
  t.parse = r.flag("tagger.parse");
  c.tagger_train.steps = r.count("tagger.steps", 1);
  c.tagger_train.batch_size = r.count("tagger.batch_size", 1);
  c.tagger_train.lr = r.positive("tagger.lr");
  c.tagger_train.seed = c.seed;

  auto& s = c.sentiment;
  s.lr_grid.clear();
  {
    std::istringstream in(r.text("sentiment.lr_grid"));
    for (std::string item; std::getline(in, item, ',');) {
      try {
        std::size_t used = 0;
        const double lr = std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos || !(lr > 0)) throw std::invalid_argument(item);
        s.lr_grid.push_back(lr);
      } catch (const std::exception&) {
        r.fail("sentiment.lr_grid", "invalid learning rate '" + item + "'");
      }
    }
    if (s.lr_grid.empty()) r.fail("sentiment.lr_grid", "must list at least one learning rate");
  }
  s.folds = r.count("sentiment.folds", 2);
  s.dev_fraction = r.unit("sentiment.dev_fraction", false);
  s.frozen_epochs = r.count("sentiment.frozen_epochs");
  s.frozen_lr = r.positive("sentiment.frozen_lr");
  s.batch_size = r.count("sentiment.batch_size", 1);
  s.schedule.warmup_epochs = r.positive("sentiment.warmup_epochs");
  s.schedule.decay_epochs = r.positive("sentiment.decay_epochs");
  s.seed = c.seed;
  s.threads = c.threads;

  if (!r.problems().empty()) throw ConfigError(r.problems());
  return c;
}

}  // namespace czlm::cli
