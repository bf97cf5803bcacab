#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "czlm/bbpe.hpp"
#include "czlm/corpus.hpp"
#include "czlm/heads/edit_script.hpp"
#include "czlm/nn/tensor.hpp"
#include "czlm/nn/transformer.hpp"

namespace czlm::heads {

// String <-> id table; id 0 is reserved for unknown entries when `with_unknown`.
class Labels {
 public:
  explicit Labels(bool with_unknown = false);
  std::size_t add(const std::string& s);
  long find(const std::string& s) const;  // -1 when absent
  // find(), or 0 for tables with an unknown entry.
  long lookup(const std::string& s) const;
  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> ids_;
  bool with_unknown_;
};

struct TaggerVocab {
  Labels words{true};
  Labels chars{true};
  Labels upos, xpos, feats, deprels;
  LemmaInventory lemmas;

  static TaggerVocab build(const std::vector<Sentence>& train);
};

struct TaggerConfig {
  std::size_t word_dim = 32;
  std::size_t char_dim = 16;
  std::size_t char_hidden = 16;
  std::size_t hidden = 32;
  std::size_t rnn_layers = 3;
  std::size_t arc_dim = 32;
  std::size_t label_dim = 16;
  bool parse = true;
  bool single_root = true;
};

// Frozen encoder layers for one sentence plus the subword rows of every token.
struct SentenceFeatures {
  std::vector<nn::Tensor> layers;  // (subwords, d), no gradient
  std::vector<std::vector<std::size_t>> groups;
};

// Encodes the sentence's forms joined by spaces inside <s> ... </s>.
SentenceFeatures contextual_features(const nn::TransformerConfig& config, const nn::ParameterSet& params,
                                     const bbpe::ByteVocab& vocab, const Sentence& sentence);

class JointTagger {
 public:
  // contextual_layers = 0 disables the frozen contextual input.
  JointTagger(TaggerConfig config, TaggerVocab vocab, std::size_t contextual_dim, std::size_t contextual_layers,
              std::uint64_t seed);

  struct Output {
    nn::Tensor upos, xpos, feats, lemma;  // (n, classes)
    nn::Tensor arcs;                      // (n, n+1)
    nn::Tensor labels;                    // (n, (n+1)*R)
  };

  Output forward(const Sentence& sentence, const SentenceFeatures* features) const;
  // Sum of the per-head mean cross-entropies.
  nn::Tensor loss(const Sentence& gold, const SentenceFeatures* features) const;
  // Copy of the sentence with predicted annotation columns.
  Sentence predict(const Sentence& sentence, const SentenceFeatures* features) const;

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const TaggerVocab& vocab() const { return vocab_; }
  const TaggerConfig& config() const { return config_; }

 private:
  nn::Tensor trunk(const Sentence& sentence, const SentenceFeatures* features) const;

  TaggerConfig config_;
  TaggerVocab vocab_;
  std::size_t contextual_layers_;
  nn::ParameterSet params_;
};

struct TaggerTrainConfig {
  std::size_t steps = 300;
  std::size_t batch_size = 32;
  double lr = 3e-3;
  std::uint64_t seed = 1;
};

// Adam over all parameters; each step averages the loss over a batch drawn in a seeded order.
void train_tagger(JointTagger& model, const std::vector<Sentence>& train,
                  const std::vector<SentenceFeatures>& features, const TaggerTrainConfig& config,
                  const std::function<void(std::size_t step, double loss)>& on_step = {});

}  // namespace czlm::heads
