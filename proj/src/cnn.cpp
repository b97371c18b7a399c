#include "usv/cnn.hpp"

#include <sstream>

#include "usv/digest.hpp"

namespace usv::cnn {

int argmax_index(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

NetworkConfig NetworkConfig::standard() {
  NetworkConfig c;
  c.in_channels = 6;
  c.in_h = 150;
  c.in_w = 192;
  c.stem_channels = 16;
  c.blocks = {{6, 16, 1, false}, {6, 24, 2, false}, {6, 24, 1, true}, {6, 32, 2, false}};
  c.num_classes = 4;
  return c;
}

NetworkConfig NetworkConfig::reduced() {
  NetworkConfig c;
  c.in_channels = 6;
  c.in_h = 10;
  c.in_w = 12;
  c.stem_channels = 8;
  c.blocks = {{6, 8, 1, false}, {6, 12, 2, false}, {6, 12, 1, true}, {6, 16, 2, false}};
  c.num_classes = 4;
  return c;
}

void NetworkConfig::validate() const {
  if (in_channels < 1 || in_h < 1 || in_w < 1 || stem_channels < 1 || num_classes < 2) {
    throw ContractViolation("network config has non-positive dimensions");
  }
  int cin = stem_channels;
  int h = conv_out_dim(in_h, 2);
  int w = conv_out_dim(in_w, 2);
  for (const auto& b : blocks) {
    if (b.expansion < 1 || b.out_channels < 1 || (b.stride != 1 && b.stride != 2)) {
      throw ContractViolation("bad block spec");
    }
    if (b.residual && (b.stride != 1 || b.out_channels != cin)) {
      throw ContractViolation("residual requires stride 1 and matching channels");
    }
    h = conv_out_dim(h, b.stride);
    w = conv_out_dim(w, b.stride);
    if (h < 1 || w < 1) throw ContractViolation("spatial dims collapse to zero");
    cin = b.out_channels;
  }
}

std::string NetworkConfig::canonical() const {
  std::ostringstream os;
  os << "mnv2-mini|in:" << in_channels << "x" << in_h << "x" << in_w
     << "|stem:" << stem_channels;
  for (const auto& b : blocks) {
    os << "|b:" << b.expansion << "," << b.out_channels << "," << b.stride << ","
       << (b.residual ? 1 : 0);
  }
  os << "|classes:" << num_classes;
  return os.str();
}

std::array<std::uint8_t, 32> NetworkConfig::hash() const {
  const std::string c = canonical();
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(c.data()), c.size()));
}

std::vector<std::string> tensor_names(const NetworkConfig& cfg) {
  std::vector<std::string> out = {"stem.w", "stem.scale", "stem.bias"};
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const std::string b = "block" + std::to_string(i);
    for (const char* part : {".expand", ".dw", ".project"}) {
      out.push_back(b + part + ".w");
      out.push_back(b + part + ".scale");
      out.push_back(b + part + ".bias");
    }
  }
  out.push_back("head.w");
  out.push_back("head.b");
  return out;
}

std::vector<std::vector<std::uint32_t>> tensor_shapes(const NetworkConfig& cfg) {
  using Shape = std::vector<std::uint32_t>;
  auto u = [](int x) { return static_cast<std::uint32_t>(x); };
  std::vector<Shape> out;
  out.push_back({u(cfg.stem_channels), u(cfg.in_channels), 3, 3});
  out.push_back({u(cfg.stem_channels)});
  out.push_back({u(cfg.stem_channels)});
  int cin = cfg.stem_channels;
  for (const auto& b : cfg.blocks) {
    const int e = b.expansion * cin;
    out.push_back({u(e), u(cin)});
    out.push_back({u(e)});
    out.push_back({u(e)});
    out.push_back({u(e), 3, 3});
    out.push_back({u(e)});
    out.push_back({u(e)});
    out.push_back({u(b.out_channels), u(e)});
    out.push_back({u(b.out_channels)});
    out.push_back({u(b.out_channels)});
    cin = b.out_channels;
  }
  out.push_back({u(cfg.num_classes), u(cfg.feature_channels())});
  out.push_back({u(cfg.num_classes)});
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  double m = logits[0];
  for (const double l : logits) m = std::max(m, l);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (auto& x : p) x /= z;
  return p;
}

double softmax_cross_entropy(std::span<const double> logits, int target,
                             std::span<double> dlogits) {
  double m = logits[0];
  for (const double l : logits) m = std::max(m, l);
  double z = 0.0;
  for (const double l : logits) z += std::exp(l - m);
  const double loss = std::log(z) - (logits[static_cast<std::size_t>(target)] - m);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(logits[i] - m) / z;
    dlogits[i] = p - (static_cast<int>(i) == target ? 1.0 : 0.0);
  }
  return loss;
}

}  // namespace usv::cnn
