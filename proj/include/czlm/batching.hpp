#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "czlm/bbpe.hpp"
#include "czlm/corpus.hpp"

namespace czlm::batching {

using bbpe::TokenId;

inline constexpr TokenId kIgnore = -100;

struct Sample {
  std::vector<TokenId> ids;  // <s> ... </s>
  std::vector<std::size_t> doc_boundary_positions;
  bool truncated = false;

  bool operator==(const Sample&) const = default;
};

// FULL-SENTENCES packing: sentences are appended in corpus order, crossing document
// boundaries, until the next one would push the sample past max_len.
std::vector<Sample> pack_full_sentences(const Corpus& corpus, const bbpe::ByteVocab& vocab,
                                        std::size_t max_len = 512);

// Same packing over pre-encoded sentences; doc_ids[i] identifies sentence i's document.
std::vector<Sample> pack_encoded(const std::vector<std::vector<TokenId>>& sentences,
                                 const std::vector<std::size_t>& doc_ids, std::size_t max_len);

struct MaskingPolicy {
  double mask = 0.8;
  double random = 0.1;
  double keep = 0.1;
};

struct MlmRow {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;  // kIgnore where not selected
  std::vector<std::size_t> mask_positions;
};

MlmRow apply_dynamic_masking(const Sample& sample, std::size_t vocab_size, double mask_prob,
                             const MaskingPolicy& policy, std::uint64_t seed);

struct MlmBatch {
  std::size_t rows = 0;
  std::size_t max_len = 0;
  std::vector<TokenId> input_ids;   // rows x max_len, padded with <pad>
  std::vector<TokenId> target_ids;  // rows x max_len, kIgnore on padding
  std::vector<std::vector<std::size_t>> mask_positions;
  std::vector<std::size_t> lengths;
};

// Row r is masked with derive_seed(seed, r).
MlmBatch make_mlm_batch(const std::vector<Sample>& samples, std::size_t vocab_size, double mask_prob,
                        const MaskingPolicy& policy, std::uint64_t seed);

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary stream: "CZSM", version byte, then per sample a little-endian u32 length
// followed by that many little-endian u32 ids.
std::string serialize_samples(const std::vector<Sample>& samples);
std::vector<Sample> deserialize_samples(std::string_view bytes);

}  // namespace czlm::batching
