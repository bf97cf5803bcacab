#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "czlm/heads/sentiment.hpp"
#include "czlm/heads/tagger.hpp"
#include "czlm/nn/pretrain.hpp"

namespace czlm::cli {

// Carries every problem found, one per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Where a default comes from: the original training setup, or a choice made here.
enum class DefaultOrigin { Reference, Local };

struct SchemaEntry {
  std::string key;  // section.name
  std::string default_value;
  DefaultOrigin origin;
  std::string help;
};

const std::vector<SchemaEntry>& config_schema();

enum class Source { Default, File, Environment, Flag };

struct Setting {
  std::string value;
  Source source = Source::Default;
  std::string detail;  // file path or variable name
};

// Key/value settings layered as defaults < file < environment < flags.
class RawConfig {
 public:
  RawConfig();

  // INI text (`[section]` headers, `key = value`). Unknown keys are recorded as problems.
  void merge_ini(const std::string& text, const std::string& origin);
  void merge_file(const std::string& path);
  // Variables named CZLM_<SECTION>_<KEY>, upper case.
  void apply_environment(const std::map<std::string, std::string>& env);
  void set(const std::string& key, const std::string& value, Source source = Source::Flag,
           const std::string& detail = "command line");

  const Setting& get(const std::string& key) const;
  const std::vector<std::string>& problems() const { return problems_; }

  // INI snapshot with one provenance comment per key.
  std::string resolved_ini() const;

 private:
  std::map<std::string, Setting> values_;
  std::vector<std::string> problems_;
};

std::string environment_name(const std::string& key);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;

  std::string corpus;
  std::string treebank_train;
  std::string treebank_dev;
  std::string sentiment_data;

  std::size_t vocab_cap = 52000;
  std::string tokenizer_dir;

  nn::PretrainConfig pretrain;
  std::size_t max_len = 512;

  std::string task;
  std::string checkpoint;
  heads::TaggerConfig tagger;
  heads::TaggerTrainConfig tagger_train;
  heads::SentimentConfig sentiment;
};

// Parses and cross-checks every setting; throws ConfigError listing all violations.
ExperimentConfig resolve_config(const RawConfig& raw);

}  // namespace czlm::cli
