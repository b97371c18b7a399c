#include "usv/weights.hpp"

#include <cstdio>
#include <cstring>

namespace usv::cnn {
namespace {

constexpr char kMagic[4] = {'M', 'N', 'V', '2'};
constexpr std::uint16_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_bytes(std::FILE* f, const void* p, std::size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw IoError("weight file write failed");
}

void put_u16(std::FILE* f, std::uint16_t v) {
  const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
  put_bytes(f, b, 2);
}

void put_u32(std::FILE* f, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  put_bytes(f, b, 4);
}

void put_u64(std::FILE* f, std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  put_bytes(f, b, 8);
}

void get_bytes(std::FILE* f, void* p, std::size_t n, const char* what) {
  if (std::fread(p, 1, n, f) != n) {
    throw WeightsError(std::string("truncated weight file while reading ") + what);
  }
}

std::uint16_t get_u16(std::FILE* f, const char* what) {
  std::uint8_t b[2];
  get_bytes(f, b, 2, what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::FILE* f, const char* what) {
  std::uint8_t b[4];
  get_bytes(f, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::FILE* f, const char* what) {
  std::uint8_t b[8];
  get_bytes(f, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

Weights random_weights(const NetworkConfig& cfg, std::uint64_t seed) {
  Weights w;
  w.config = cfg;
  w.params = make_params<float>(cfg);
  init_params(w.params, cfg, seed);
  w.training_seed = seed;
  w.epochs = 0;
  return w;
}

void save_weights(const Weights& w, const std::string& path) {
  w.config.validate();
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot write weight file: " + path);

  put_bytes(f.get(), kMagic, 4);
  put_u16(f.get(), kVersion);
  const auto hash = w.config.hash();
  put_bytes(f.get(), hash.data(), hash.size());
  put_u64(f.get(), w.training_seed);
  put_u32(f.get(), w.epochs);

  auto params = const_cast<NetParams<float>&>(w.params);
  const auto tensors = tensor_list(params);
  const auto names = tensor_names(w.config);
  const auto shapes = tensor_shapes(w.config);
  put_u32(f.get(), static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    put_u32(f.get(), static_cast<std::uint32_t>(names[i].size()));
    put_bytes(f.get(), names[i].data(), names[i].size());
    put_u32(f.get(), static_cast<std::uint32_t>(shapes[i].size()));
    std::size_t n = 1;
    for (const std::uint32_t d : shapes[i]) {
      put_u32(f.get(), d);
      n *= d;
    }
    if (n != tensors[i]->size()) throw WeightsError("tensor/shape mismatch while saving");
    for (const float x : *tensors[i]) {
      std::uint32_t bits;
      std::memcpy(&bits, &x, 4);
      put_u32(f.get(), bits);
    }
  }
  if (std::fflush(f.get()) != 0) throw IoError("weight file flush failed");
}

Weights load_weights(const std::string& path, const NetworkConfig& expected) {
  expected.validate();
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open weight file: " + path);

  char magic[4];
  get_bytes(f.get(), magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw WeightsError("bad magic in weight file");
  const std::uint16_t version = get_u16(f.get(), "version");
  if (version != kVersion) {
    throw WeightsError("unsupported weight file version " + std::to_string(version));
  }
  std::array<std::uint8_t, 32> hash{};
  get_bytes(f.get(), hash.data(), hash.size(), "config hash");
  if (hash != expected.hash()) {
    throw WeightsError("config_hash mismatch: file was trained for a different network config");
  }

  Weights w;
  w.config = expected;
  w.params = make_params<float>(expected);
  w.training_seed = get_u64(f.get(), "training seed");
  w.epochs = get_u32(f.get(), "epoch count");

  const auto tensors = tensor_list(w.params);
  const auto names = tensor_names(expected);
  const auto shapes = tensor_shapes(expected);
  const std::uint32_t count = get_u32(f.get(), "tensor count");
  if (count != tensors.size()) {
    throw WeightsError("tensor count mismatch: " + std::to_string(count));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::uint32_t name_len = get_u32(f.get(), "tensor name length");
    std::string name(name_len, '\0');
    get_bytes(f.get(), name.data(), name_len, "tensor name");
    if (name != names[i]) {
      throw WeightsError("unexpected tensor '" + name + "', want '" + names[i] + "'");
    }
    const std::uint32_t ndims = get_u32(f.get(), "tensor rank");
    if (ndims != shapes[i].size()) throw WeightsError("tensor rank mismatch for " + name);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndims; ++d) {
      const std::uint32_t dim = get_u32(f.get(), "tensor dim");
      if (dim != shapes[i][d]) throw WeightsError("tensor shape mismatch for " + name);
      n *= dim;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t bits = get_u32(f.get(), "tensor data");
      float x;
      std::memcpy(&x, &bits, 4);
      if (!std::isfinite(x)) throw WeightsError("non-finite value in tensor " + name);
      (*tensors[i])[j] = x;
    }
  }
  // Nothing may trail the last tensor.
  std::uint8_t extra;
  if (std::fread(&extra, 1, 1, f.get()) == 1) {
    throw WeightsError("trailing bytes after final tensor");
  }
  return w;
}

NetParams<double> params_to_double(const NetParams<float>& p) {
  NetParams<double> out;
  auto src = tensor_list(const_cast<NetParams<float>&>(p));
  // Build the structure first, then copy in fixed order.
  out.stem.w.resize(p.stem.w.size());
  out.stem.scale.resize(p.stem.scale.size());
  out.stem.bias.resize(p.stem.bias.size());
  out.blocks.resize(p.blocks.size());
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    out.blocks[i].expand.w.resize(p.blocks[i].expand.w.size());
    out.blocks[i].expand.scale.resize(p.blocks[i].expand.scale.size());
    out.blocks[i].expand.bias.resize(p.blocks[i].expand.bias.size());
    out.blocks[i].dw.w.resize(p.blocks[i].dw.w.size());
    out.blocks[i].dw.scale.resize(p.blocks[i].dw.scale.size());
    out.blocks[i].dw.bias.resize(p.blocks[i].dw.bias.size());
    out.blocks[i].project.w.resize(p.blocks[i].project.w.size());
    out.blocks[i].project.scale.resize(p.blocks[i].project.scale.size());
    out.blocks[i].project.bias.resize(p.blocks[i].project.bias.size());
  }
  out.head_w.resize(p.head_w.size());
  out.head_b.resize(p.head_b.size());
  auto dst = tensor_list(out);
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < src[i]->size(); ++j) {
      (*dst[i])[j] = static_cast<double>((*src[i])[j]);
    }
  }
  return out;
}

ClassProbs forward(const Weights& w, const Scalogram& s) {
  if (w.config.in_channels != Scalogram::kChannels || w.config.in_h != Scalogram::kHeight ||
      w.config.in_w != Scalogram::kWidth || w.config.num_classes != 4) {
    throw ContractViolation("weights config does not accept scalogram input");
  }
  NetCache<float> cache;
  const auto logits = net_forward(w.config, w.params, std::span<const float>(s.v), cache);
  const auto p = softmax(logits);
  ClassProbs out{};
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace usv::cnn
