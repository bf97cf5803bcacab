#include "czlm/heads/sentiment.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <thread>

#include "czlm/metrics/basic.hpp"
#include "czlm/nn/adam.hpp"
#include "czlm/nn/ops.hpp"
#include "czlm/rng.hpp"

namespace czlm::heads {

using nn::Tensor;

std::vector<SentimentItem> parse_sentiment_tsv(std::string_view text) {
  std::vector<SentimentItem> items;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(line_no, "expected label<TAB>text");
    const auto label = line.substr(0, tab);
    SentimentItem item;
    if (label == "n")
      item.label = kNegative;
    else if (label == "0")
      item.label = kNeutral;
    else if (label == "p")
      item.label = kPositive;
    else
      throw ParseError(line_no, "unknown sentiment label '" + std::string(label) + "'");
    item.text = std::string(line.substr(tab + 1));
    items.push_back(std::move(item));
  }
  return items;
}

std::string format_sentiment_tsv(const std::vector<SentimentItem>& items) {
  static const char* names[] = {"n", "0", "p"};
  std::string out;
  for (const auto& it : items) out += std::string(names[it.label]) + "\t" + it.text + "\n";
  return out;
}

SentimentModel::SentimentModel(const nn::TransformerConfig& config, const nn::ParameterSet& encoder)
    : config_(config), params_(encoder.clone()) {
  params_.add("cls.w", Tensor::zeros({config.hidden, kPolarityCount}, true));
  params_.add("cls.b", Tensor::zeros({kPolarityCount}, true));
}

Tensor SentimentModel::logits(const std::vector<std::vector<int>>& ids) const {
  std::size_t seq = 0;
  for (const auto& row : ids) seq = std::max(seq, row.size());
  std::vector<int> flat(ids.size() * seq, bbpe::kPad);
  std::vector<std::size_t> lengths, first_rows;
  for (std::size_t b = 0; b < ids.size(); ++b) {
    std::copy(ids[b].begin(), ids[b].end(), flat.begin() + static_cast<std::ptrdiff_t>(b * seq));
    lengths.push_back(ids[b].size());
    first_rows.push_back(b * seq);
  }
  auto enc = nn::forward_transformer(config_, params_, flat, ids.size(), seq, lengths);
  return nn::linear(nn::gather_rows(enc.hidden.back(), first_rows), params_["cls.w"], params_["cls.b"]);
}

std::vector<int> SentimentModel::predict(const std::vector<std::vector<int>>& ids) const {
  nn::NoGradGuard guard;
  std::vector<int> out;
  if (ids.empty()) return out;
  const auto l = logits(ids);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = l.values().subspan(i * kPolarityCount, kPolarityCount);
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

void SentimentModel::set_encoder_trainable(bool on) {
  for (auto& [name, t] : params_)
    if (is_encoder(name)) t.set_requires_grad(on);
}

std::vector<int> encode_for_classifier(const bbpe::ByteVocab& vocab, const nn::TransformerConfig& config,
                                       const std::string& text) {
  auto body = vocab.encode_ids(text);
  if (body.size() + 2 > config.max_positions) body.resize(config.max_positions - 2);
  std::vector<int> ids = {bbpe::kBos};
  ids.insert(ids.end(), body.begin(), body.end());
  ids.push_back(bbpe::kEos);
  return ids;
}

namespace {

double score(const SentimentModel& model, const std::vector<std::vector<int>>& ids, const std::vector<int>& labels,
             const std::vector<std::size_t>& items) {
  if (items.empty()) throw std::invalid_argument("empty evaluation fold");
  std::vector<std::vector<int>> batch;
  std::vector<int> gold;
  for (auto i : items) {
    batch.push_back(ids[i]);
    gold.push_back(labels[i]);
  }
  return metrics::macro_f1(metrics::confusion_matrix(gold, model.predict(batch), kPolarityCount));
}

std::vector<std::size_t> to_indices(const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  for (const auto& s : ids) out.push_back(std::stoul(s));
  return out;
}

}  // namespace

FoldOutcome run_sentiment_fold(const std::vector<std::vector<int>>& ids, const std::vector<int>& labels,
                               const FoldSplit& split, const nn::TransformerConfig& config,
                               const nn::ParameterSet& encoder, const SentimentConfig& protocol, double peak_lr,
                               std::uint64_t seed, const FoldHooks& hooks) {
  const auto train = to_indices(split.train_ids), dev = to_indices(split.dev_ids), test = to_indices(split.test_ids);
  if (train.empty() || dev.empty() || test.empty())
    throw std::invalid_argument("fold " + std::to_string(split.fold_index) + " has an empty part");

  SentimentModel model(config, encoder);
  nn::AdamConfig adam_config;
  adam_config.lazy = true;
  nn::Adam adam(model.params(), adam_config);
  auto schedule = protocol.schedule;
  schedule.peak_lr = peak_lr;

  const std::size_t batches = (train.size() + protocol.batch_size - 1) / protocol.batch_size;
  std::vector<std::size_t> order = train;
  for (std::size_t epoch = 1; epoch <= protocol.total_epochs(); ++epoch) {
    const bool frozen = epoch <= protocol.frozen_epochs;
    model.set_encoder_trainable(!frozen);
    order = train;
    Rng rng(derive_seed(seed, epoch));
    rng.shuffle(order);
    for (std::size_t b = 0; b < batches; ++b) {
      StepTrace trace{epoch, 0.0, protocol.frozen_lr};
      if (!frozen) {
        trace.position = static_cast<double>(epoch - protocol.frozen_epochs - 1) +
                         static_cast<double>(b) / static_cast<double>(batches);
        trace.lr = nn::schedule_lr(schedule, trace.position);
      }
      std::vector<std::vector<int>> batch;
      std::vector<int> gold;
      for (std::size_t k = b * protocol.batch_size; k < std::min(order.size(), (b + 1) * protocol.batch_size); ++k) {
        batch.push_back(ids[order[k]]);
        gold.push_back(labels[order[k]]);
      }
      model.params().zero_grad();
      nn::softmax_cross_entropy(model.logits(batch), gold).backward();
      adam.step(trace.lr);
      if (hooks.on_step) hooks.on_step(trace);
    }
    if (hooks.after_epoch) hooks.after_epoch(epoch, model);
  }
  model.params().zero_grad();
  return {score(model, ids, labels, dev), score(model, ids, labels, test)};
}

SentimentReport run_sentiment_protocol(const std::vector<SentimentItem>& data, const nn::TransformerConfig& config,
                                       const nn::ParameterSet& encoder, const bbpe::ByteVocab& vocab,
                                       const SentimentConfig& protocol) {
  if (protocol.lr_grid.empty()) throw std::invalid_argument("empty learning-rate grid");
  if (protocol.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  std::vector<std::string> item_ids;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ids.push_back(encode_for_classifier(vocab, config, data[i].text));
    labels.push_back(data[i].label);
    item_ids.push_back(std::to_string(i));
  }
  const auto folds = kfold_split(item_ids, protocol.folds, protocol.dev_fraction, protocol.seed);

  SentimentReport report;
  for (double lr : protocol.lr_grid) report.grid.push_back({lr, std::vector<FoldOutcome>(folds.size()), 0.0});

  // Jobs are (lr, fold) pairs; each fold's seed depends only on the master seed.
  const std::size_t jobs = protocol.lr_grid.size() * folds.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next++) < jobs;) {
      const std::size_t g = j / folds.size(), f = j % folds.size();
      report.grid[g].folds[f] = run_sentiment_fold(ids, labels, folds[f], config, encoder, protocol,
                                                   protocol.lr_grid[g], derive_seed(protocol.seed, f + 1));
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(protocol.threads, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    auto& entry = report.grid[g];
    for (const auto& f : entry.folds) entry.mean_dev += f.dev_f1;
    entry.mean_dev /= static_cast<double>(entry.folds.size());
    if (entry.mean_dev > report.grid[report.selected].mean_dev) report.selected = g;
  }
  const auto& chosen = report.grid[report.selected];
  report.selected_lr = chosen.lr;
  std::vector<double> tests;
  for (const auto& f : chosen.folds) tests.push_back(f.test_f1);
  const auto agg = metrics::aggregate_folds(tests);
  report.test_mean = agg.mean;
  report.test_std = agg.stddev;
  return report;
}

}  // namespace czlm::heads
