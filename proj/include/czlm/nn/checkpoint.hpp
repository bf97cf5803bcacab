#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "czlm/nn/tensor.hpp"
#include "czlm/nn/transformer.hpp"

namespace czlm::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  TransformerConfig config;
  ParameterSet params;
};

// "CZCK", version byte, config block (six u32 fields and the f64 layer-norm epsilon),
// u32 record count, then per parameter: u32 name length, name, u32 rank, u32 dims,
// float32 values. All integers and floats little-endian.
std::string serialize_checkpoint(const TransformerConfig& config, const ParameterSet& params);
Checkpoint deserialize_checkpoint(std::string_view bytes);

}  // namespace czlm::nn
