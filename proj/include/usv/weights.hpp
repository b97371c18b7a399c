#pragma once

#include <cstdint>
#include <string>

#include "usv/cnn.hpp"
#include "usv/scalogram.hpp"

namespace usv::cnn {

// Trained parameter set plus provenance metadata.
struct Weights {
  NetworkConfig config;
  NetParams<float> params;
  std::uint64_t training_seed = 0;
  std::uint32_t epochs = 0;
};

Weights random_weights(const NetworkConfig& cfg, std::uint64_t seed);

// Weight file: magic "MNV2", u16 version, 32-byte config hash, u64 training
// seed, u32 epoch count, u32 tensor count, then per-tensor blocks
// (u32 name length + name + u32 ndims + u32 dims... + little-endian f32 data).
void save_weights(const Weights& w, const std::string& path);
Weights load_weights(const std::string& path,
                     const NetworkConfig& expected = NetworkConfig::standard());

NetParams<double> params_to_double(const NetParams<float>& p);

// Softmax class probabilities for one scalogram. Pure function of inputs.
ClassProbs forward(const Weights& w, const Scalogram& s);

}  // namespace usv::cnn
