#include "czlm/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

namespace czlm::nn {

namespace {

constexpr char kMagic[4] = {'C', 'Z', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const TransformerConfig& config, const ParameterSet& params) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  for (std::size_t v : {config.layers, config.hidden, config.heads, config.ffn, config.vocab, config.max_positions})
    put_le(out, static_cast<std::uint32_t>(v));
  put_le(out, std::bit_cast<std::uint64_t>(config.ln_eps));
  put_le(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_le(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_le(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) throw CheckpointError("not a checkpoint (bad magic)");
  if (in.get<std::uint8_t>() != kVersion) throw CheckpointError("unsupported checkpoint version");
  Checkpoint ck;
  ck.config.layers = in.get<std::uint32_t>();
  ck.config.hidden = in.get<std::uint32_t>();
  ck.config.heads = in.get<std::uint32_t>();
  ck.config.ffn = in.get<std::uint32_t>();
  ck.config.vocab = in.get<std::uint32_t>();
  ck.config.max_positions = in.get<std::uint32_t>();
  ck.config.ln_eps = std::bit_cast<double>(in.get<std::uint64_t>());
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t r = 0; r < count; ++r) {
    std::string name(in.take(in.get<std::uint32_t>()));
    Shape shape(in.get<std::uint32_t>());
    for (auto& d : shape) d = in.get<std::uint32_t>();
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = std::bit_cast<float>(in.get<std::uint32_t>());
    ck.params.add(name, Tensor::from(std::move(shape), std::move(values), true));
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint records");
  return ck;
}

}  // namespace czlm::nn
