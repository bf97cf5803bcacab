#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "czlm/bbpe.hpp"
#include "czlm/corpus.hpp"
#include "czlm/nn/schedule.hpp"
#include "czlm/nn/tensor.hpp"
#include "czlm/nn/transformer.hpp"

namespace czlm::heads {

enum Polarity : int { kNegative = 0, kNeutral = 1, kPositive = 2 };
inline constexpr std::size_t kPolarityCount = 3;

struct SentimentItem {
  int label = kNeutral;
  std::string text;
};

// TSV `label<TAB>text` with labels n, 0, p.
std::vector<SentimentItem> parse_sentiment_tsv(std::string_view text);
std::string format_sentiment_tsv(const std::vector<SentimentItem>& items);

struct SentimentConfig {
  std::vector<double> lr_grid = {1e-5, 2e-5, 3e-5, 5e-5};
  std::size_t folds = 10;
  double dev_fraction = 0.10;
  std::size_t frozen_epochs = 1;
  double frozen_lr = 1e-3;
  std::size_t batch_size = 64;
  // Cosine warmup/decay over the epochs after the frozen ones; its peak_lr is replaced
  // by each grid value.
  nn::ScheduleConfig schedule{.kind = nn::ScheduleKind::CosineWarmupDecay, .warmup_epochs = 4, .decay_epochs = 10};
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  std::size_t total_epochs() const {
    return frozen_epochs + static_cast<std::size_t>(schedule.warmup_epochs + schedule.decay_epochs);
  }
};

// Encoder copy plus a zero-initialized linear classifier on the final-layer <s> vector.
class SentimentModel {
 public:
  SentimentModel(const nn::TransformerConfig& config, const nn::ParameterSet& encoder);

  // (items, 3) logits.
  nn::Tensor logits(const std::vector<std::vector<int>>& ids) const;
  std::vector<int> predict(const std::vector<std::vector<int>>& ids) const;
  void set_encoder_trainable(bool on);

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  bool is_encoder(const std::string& name) const { return name.rfind("cls.", 0) != 0; }

 private:
  nn::TransformerConfig config_;
  nn::ParameterSet params_;
};

// Token ids <s> text </s>, truncated to the encoder's positions.
std::vector<int> encode_for_classifier(const bbpe::ByteVocab& vocab, const nn::TransformerConfig& config,
                                       const std::string& text);

struct StepTrace {
  std::size_t epoch = 0;  // 1-based
  double position = 0.0;  // schedule position (fractional epoch), frozen epochs report 0
  double lr = 0.0;
};

struct FoldHooks {
  std::function<void(std::size_t epoch, const SentimentModel&)> after_epoch;
  std::function<void(const StepTrace&)> on_step;
};

struct FoldOutcome {
  double dev_f1 = 0.0;
  double test_f1 = 0.0;
};

// Trains and scores one fold at one peak lr.
FoldOutcome run_sentiment_fold(const std::vector<std::vector<int>>& ids, const std::vector<int>& labels,
                               const FoldSplit& split, const nn::TransformerConfig& config,
                               const nn::ParameterSet& encoder, const SentimentConfig& protocol, double peak_lr,
                               std::uint64_t seed, const FoldHooks& hooks = {});

struct LrOutcome {
  double lr = 0.0;
  std::vector<FoldOutcome> folds;
  double mean_dev = 0.0;
};

struct SentimentReport {
  std::vector<LrOutcome> grid;
  std::size_t selected = 0;
  double selected_lr = 0.0;
  double test_mean = 0.0;
  double test_std = 0.0;
};

SentimentReport run_sentiment_protocol(const std::vector<SentimentItem>& data, const nn::TransformerConfig& config,
                                       const nn::ParameterSet& encoder, const bbpe::ByteVocab& vocab,
                                       const SentimentConfig& protocol);

}  // namespace czlm::heads
