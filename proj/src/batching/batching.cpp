#include "czlm/batching.hpp"

#include <algorithm>

#include "czlm/rng.hpp"

namespace czlm::batching {

namespace {

constexpr char kMagic[4] = {'C', 'Z', 'S', 'M'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::vector<Sample> pack_encoded(const std::vector<std::vector<TokenId>>& sentences,
                                 const std::vector<std::size_t>& doc_ids, std::size_t max_len) {
  if (max_len < 8) throw std::invalid_argument("max_len must be at least 8");
  if (sentences.size() != doc_ids.size()) throw std::invalid_argument("one document id per sentence");
  const std::size_t capacity = max_len - 2;
  std::vector<Sample> samples;
  Sample current;
  std::size_t last_doc = 0;

  auto close = [&] {
    if (current.ids.empty()) return;
    current.ids.push_back(bbpe::kEos);
    samples.push_back(std::move(current));
    current = Sample{};
  };

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& sent = sentences[i];
    if (sent.empty()) continue;
    if (!current.ids.empty() && current.ids.size() - 1 + sent.size() > capacity) close();
    if (current.ids.empty()) {
      current.ids.push_back(bbpe::kBos);
    } else if (doc_ids[i] != last_doc) {
      current.doc_boundary_positions.push_back(current.ids.size());
    }
    if (sent.size() > capacity) {
      current.ids.insert(current.ids.end(), sent.begin(), sent.begin() + static_cast<std::ptrdiff_t>(capacity));
      current.truncated = true;
    } else {
      current.ids.insert(current.ids.end(), sent.begin(), sent.end());
    }
    last_doc = doc_ids[i];
  }
  close();
  return samples;
}

std::vector<Sample> pack_full_sentences(const Corpus& corpus, const bbpe::ByteVocab& vocab, std::size_t max_len) {
  std::vector<std::vector<TokenId>> sentences;
  std::vector<std::size_t> doc_ids;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    for (const auto& s : corpus.documents[d].sentences) {
      sentences.push_back(vocab.encode_ids(s.text()));
      doc_ids.push_back(d);
    }
  return pack_encoded(sentences, doc_ids, max_len);
}

MlmRow apply_dynamic_masking(const Sample& sample, std::size_t vocab_size, double mask_prob,
                             const MaskingPolicy& policy, std::uint64_t seed) {
  if (sample.ids.empty()) throw std::invalid_argument("cannot mask an empty sample");
  if (vocab_size <= static_cast<std::size_t>(bbpe::kNumSpecial))
    throw std::invalid_argument("vocabulary has no non-special tokens");
  Rng rng(seed);
  MlmRow row;
  row.input_ids = sample.ids;
  row.target_ids.assign(sample.ids.size(), kIgnore);
  const auto n_regular = vocab_size - static_cast<std::size_t>(bbpe::kNumSpecial);
  const double total = policy.mask + policy.random + policy.keep;
  for (std::size_t i = 0; i < sample.ids.size(); ++i) {
    const TokenId id = sample.ids[i];
    if (bbpe::ByteVocab::is_special(id)) continue;
    if (!(rng.uniform01() < mask_prob)) continue;
    row.mask_positions.push_back(i);
    row.target_ids[i] = id;
    const double u = rng.uniform01() * total;
    if (u < policy.mask) {
      row.input_ids[i] = bbpe::kMask;
    } else if (u < policy.mask + policy.random) {
      row.input_ids[i] = bbpe::kNumSpecial + static_cast<TokenId>(rng.uniform(n_regular));
    }
  }
  return row;
}

MlmBatch make_mlm_batch(const std::vector<Sample>& samples, std::size_t vocab_size, double mask_prob,
                        const MaskingPolicy& policy, std::uint64_t seed) {
  MlmBatch batch;
  batch.rows = samples.size();
  for (const auto& s : samples) batch.max_len = std::max(batch.max_len, s.ids.size());
  batch.input_ids.assign(batch.rows * batch.max_len, bbpe::kPad);
  batch.target_ids.assign(batch.rows * batch.max_len, kIgnore);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    auto row = apply_dynamic_masking(samples[r], vocab_size, mask_prob, policy, derive_seed(seed, r));
    std::copy(row.input_ids.begin(), row.input_ids.end(), batch.input_ids.begin() + r * batch.max_len);
    std::copy(row.target_ids.begin(), row.target_ids.end(), batch.target_ids.begin() + r * batch.max_len);
    batch.mask_positions.push_back(std::move(row.mask_positions));
    batch.lengths.push_back(samples[r].ids.size());
  }
  return batch;
}

std::string serialize_samples(const std::vector<Sample>& samples) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  for (const auto& s : samples) {
    put_u32(out, static_cast<std::uint32_t>(s.ids.size()));
    for (TokenId id : s.ids) put_u32(out, static_cast<std::uint32_t>(id));
  }
  return out;
}

std::vector<Sample> deserialize_samples(std::string_view bytes) {
  if (bytes.size() < 5 || bytes.substr(0, 4) != std::string_view(kMagic, 4))
    throw FormatError("missing sample stream magic");
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) throw FormatError("unsupported sample stream version");
  std::vector<Sample> samples;
  std::size_t pos = 5;
  while (pos < bytes.size()) {
    if (pos + 4 > bytes.size()) throw FormatError("truncated sample length");
    const std::uint32_t len = get_u32(bytes, pos);
    pos += 4;
    if (pos + 4ULL * len > bytes.size()) throw FormatError("truncated sample ids");
    Sample s;
    for (std::uint32_t i = 0; i < len; ++i, pos += 4) s.ids.push_back(static_cast<TokenId>(get_u32(bytes, pos)));
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace czlm::batching
