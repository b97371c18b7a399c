#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usv/error.hpp"
#include "usv/rng.hpp"

namespace usv::cnn {

// Four-class softmax output indexed by the ImpactLabel encoding.
using ClassProbs = std::array<double, 4>;

// Argmax with ties broken toward the lowest index.
int argmax_index(std::span<const double> v);

// One inverted residual block: 1x1 expansion -> depthwise 3x3 -> 1x1 linear
// projection, ReLU6 after the first two stages. Batch norm is folded into a
// per-channel scale+bias after every convolution.
struct BlockSpec {
  int expansion = 6;
  int out_channels = 0;
  int stride = 1;
  bool residual = false;
};

struct NetworkConfig {
  int in_channels = 6;
  int in_h = 150;
  int in_w = 192;
  int stem_channels = 16;
  std::vector<BlockSpec> blocks;
  int num_classes = 4;

  static NetworkConfig standard();
  // Small instance for gradient checks and fast trainer tests.
  static NetworkConfig reduced();

  void validate() const;  // throws ContractViolation
  int feature_channels() const {
    return blocks.empty() ? stem_channels : blocks.back().out_channels;
  }
  std::string canonical() const;
  std::array<std::uint8_t, 32> hash() const;

  bool operator==(const NetworkConfig&) const = default;
};

inline int conv_out_dim(int in, int stride) { return (in - 1) / stride + 1; }  // 3x3, pad 1

// Planar CHW activation buffer.
template <typename T>
struct Image {
  int c = 0, h = 0, w = 0;
  std::vector<T> v;

  Image() = default;
  Image(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, T(0)) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  T* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * plane_size(); }
  const T* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * plane_size(); }
  T at(int ch, int y, int x) const { return plane(ch)[static_cast<std::size_t>(y) * w + x]; }
  T& at(int ch, int y, int x) { return plane(ch)[static_cast<std::size_t>(y) * w + x]; }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
  void resize(int c_, int h_, int w_) {
    c = c_; h = h_; w = w_;
    v.assign(static_cast<std::size_t>(c_) * h_ * w_, T(0));
  }
};

// Convolution weights plus the folded batch-norm scale/bias.
template <typename T>
struct ConvBn {
  std::vector<T> w;
  std::vector<T> scale;
  std::vector<T> bias;
};

template <typename T>
struct BlockParams {
  ConvBn<T> expand;   // w: [E][Cin]
  ConvBn<T> dw;       // w: [E][3][3]
  ConvBn<T> project;  // w: [Cout][E]
};

template <typename T>
struct NetParams {
  ConvBn<T> stem;  // w: [Cout][Cin][3][3]
  std::vector<BlockParams<T>> blocks;
  std::vector<T> head_w;  // [classes][feat]
  std::vector<T> head_b;  // [classes]
};

// Tensor enumeration in a fixed order shared by the optimizer, the weight
// file, and the gradient check.
template <typename T>
std::vector<std::vector<T>*> tensor_list(NetParams<T>& p) {
  std::vector<std::vector<T>*> out;
  out.push_back(&p.stem.w);
  out.push_back(&p.stem.scale);
  out.push_back(&p.stem.bias);
  for (auto& b : p.blocks) {
    out.push_back(&b.expand.w);
    out.push_back(&b.expand.scale);
    out.push_back(&b.expand.bias);
    out.push_back(&b.dw.w);
    out.push_back(&b.dw.scale);
    out.push_back(&b.dw.bias);
    out.push_back(&b.project.w);
    out.push_back(&b.project.scale);
    out.push_back(&b.project.bias);
  }
  out.push_back(&p.head_w);
  out.push_back(&p.head_b);
  return out;
}

std::vector<std::string> tensor_names(const NetworkConfig& cfg);
// Tensor shapes in the same order (for the weight file and validation).
std::vector<std::vector<std::uint32_t>> tensor_shapes(const NetworkConfig& cfg);

template <typename T>
NetParams<T> make_params(const NetworkConfig& cfg) {
  cfg.validate();
  NetParams<T> p;
  p.stem.w.assign(static_cast<std::size_t>(cfg.stem_channels) * cfg.in_channels * 9, T(0));
  p.stem.scale.assign(static_cast<std::size_t>(cfg.stem_channels), T(0));
  p.stem.bias.assign(static_cast<std::size_t>(cfg.stem_channels), T(0));
  int cin = cfg.stem_channels;
  for (const auto& b : cfg.blocks) {
    BlockParams<T> bp;
    const int e = b.expansion * cin;
    bp.expand.w.assign(static_cast<std::size_t>(e) * cin, T(0));
    bp.expand.scale.assign(static_cast<std::size_t>(e), T(0));
    bp.expand.bias.assign(static_cast<std::size_t>(e), T(0));
    bp.dw.w.assign(static_cast<std::size_t>(e) * 9, T(0));
    bp.dw.scale.assign(static_cast<std::size_t>(e), T(0));
    bp.dw.bias.assign(static_cast<std::size_t>(e), T(0));
    bp.project.w.assign(static_cast<std::size_t>(b.out_channels) * e, T(0));
    bp.project.scale.assign(static_cast<std::size_t>(b.out_channels), T(0));
    bp.project.bias.assign(static_cast<std::size_t>(b.out_channels), T(0));
    p.blocks.push_back(std::move(bp));
    cin = b.out_channels;
  }
  p.head_w.assign(static_cast<std::size_t>(cfg.num_classes) * cfg.feature_channels(), T(0));
  p.head_b.assign(static_cast<std::size_t>(cfg.num_classes), T(0));
  return p;
}

// He-style init; scales start at 1, biases at 0. Deterministic in seed.
template <typename T>
void init_params(NetParams<T>& p, const NetworkConfig& cfg, std::uint64_t seed) {
  GaussianRng rng(seed);
  auto fill_normal = [&rng](std::vector<T>& t, double stddev) {
    for (auto& x : t) x = static_cast<T>(stddev * rng.normal());
  };
  auto fill_const = [](std::vector<T>& t, double v) {
    std::fill(t.begin(), t.end(), static_cast<T>(v));
  };
  fill_normal(p.stem.w, std::sqrt(2.0 / (cfg.in_channels * 9.0)));
  fill_const(p.stem.scale, 1.0);
  fill_const(p.stem.bias, 0.0);
  int cin = cfg.stem_channels;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    auto& bp = p.blocks[i];
    const int e = cfg.blocks[i].expansion * cin;
    fill_normal(bp.expand.w, std::sqrt(2.0 / cin));
    fill_const(bp.expand.scale, 1.0);
    fill_const(bp.expand.bias, 0.0);
    fill_normal(bp.dw.w, std::sqrt(2.0 / 9.0));
    fill_const(bp.dw.scale, 1.0);
    fill_const(bp.dw.bias, 0.0);
    fill_normal(bp.project.w, std::sqrt(2.0 / e));
    fill_const(bp.project.scale, 1.0);
    fill_const(bp.project.bias, 0.0);
    cin = cfg.blocks[i].out_channels;
  }
  fill_normal(p.head_w, std::sqrt(1.0 / cfg.feature_channels()));
  fill_const(p.head_b, 0.0);
}

namespace detail {

// out(co,y,x) = sum_{ci,ky,kx} w[co][ci][ky][kx] * in(ci, s*y+ky-1, s*x+kx-1),
// zero padding of 1.
template <typename T>
void conv3x3(const Image<T>& in, std::span<const T> w, int co_n, int stride, Image<T>& out) {
  const int ho = conv_out_dim(in.h, stride);
  const int wo = conv_out_dim(in.w, stride);
  out.resize(co_n, ho, wo);
  for (int co = 0; co < co_n; ++co) {
    T* op = out.plane(co);
    for (int ci = 0; ci < in.c; ++ci) {
      const T* ip = in.plane(ci);
      const T* wp = w.data() + (static_cast<std::size_t>(co) * in.c + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const T wv = wp[ky * 3 + kx];
          for (int y = 0; y < ho; ++y) {
            const int iy = y * stride + ky - 1;
            if (iy < 0 || iy >= in.h) continue;
            const T* irow = ip + static_cast<std::size_t>(iy) * in.w;
            T* orow = op + static_cast<std::size_t>(y) * wo;
            const int x_lo = std::max(0, (1 - kx + stride - 1) / stride);
            for (int x = x_lo; x < wo; ++x) {
              const int ix = x * stride + kx - 1;
              if (ix >= in.w) break;
              orow[x] += wv * irow[ix];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3x3_backward(const Image<T>& in, std::span<const T> w, int co_n, int stride,
                      const Image<T>& dout, std::span<T> dw, Image<T>& din) {
  din.resize(in.c, in.h, in.w);
  for (int co = 0; co < co_n; ++co) {
    const T* dop = dout.plane(co);
    for (int ci = 0; ci < in.c; ++ci) {
      const T* ip = in.plane(ci);
      T* dip = din.plane(ci);
      T* dwp = dw.data() + (static_cast<std::size_t>(co) * in.c + ci) * 9;
      const T* wp = w.data() + (static_cast<std::size_t>(co) * in.c + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const T wv = wp[ky * 3 + kx];
          T wacc = T(0);
          for (int y = 0; y < dout.h; ++y) {
            const int iy = y * stride + ky - 1;
            if (iy < 0 || iy >= in.h) continue;
            const T* irow = ip + static_cast<std::size_t>(iy) * in.w;
            T* dirow = dip + static_cast<std::size_t>(iy) * in.w;
            const T* dorow = dop + static_cast<std::size_t>(y) * dout.w;
            const int x_lo = std::max(0, (1 - kx + stride - 1) / stride);
            for (int x = x_lo; x < dout.w; ++x) {
              const int ix = x * stride + kx - 1;
              if (ix >= in.w) break;
              wacc += dorow[x] * irow[ix];
              dirow[ix] += wv * dorow[x];
            }
          }
          dwp[ky * 3 + kx] += wacc;
        }
      }
    }
  }
}

template <typename T>
void conv1x1(const Image<T>& in, std::span<const T> w, int co_n, Image<T>& out) {
  out.resize(co_n, in.h, in.w);
  const std::size_t n = in.plane_size();
  for (int co = 0; co < co_n; ++co) {
    T* op = out.plane(co);
    const T* wrow = w.data() + static_cast<std::size_t>(co) * in.c;
    for (int ci = 0; ci < in.c; ++ci) {
      const T wv = wrow[ci];
      const T* ip = in.plane(ci);
      for (std::size_t p = 0; p < n; ++p) op[p] += wv * ip[p];
    }
  }
}

template <typename T>
void conv1x1_backward(const Image<T>& in, std::span<const T> w, int co_n,
                      const Image<T>& dout, std::span<T> dw, Image<T>& din) {
  din.resize(in.c, in.h, in.w);
  const std::size_t n = in.plane_size();
  for (int co = 0; co < co_n; ++co) {
    const T* dop = dout.plane(co);
    const T* wrow = w.data() + static_cast<std::size_t>(co) * in.c;
    T* dwrow = dw.data() + static_cast<std::size_t>(co) * in.c;
    for (int ci = 0; ci < in.c; ++ci) {
      const T* ip = in.plane(ci);
      T* dip = din.plane(ci);
      const T wv = wrow[ci];
      T wacc = T(0);
      for (std::size_t p = 0; p < n; ++p) {
        wacc += dop[p] * ip[p];
        dip[p] += wv * dop[p];
      }
      dwrow[ci] += wacc;
    }
  }
}

template <typename T>
void depthwise3x3(const Image<T>& in, std::span<const T> w, int stride, Image<T>& out) {
  const int ho = conv_out_dim(in.h, stride);
  const int wo = conv_out_dim(in.w, stride);
  out.resize(in.c, ho, wo);
  for (int c = 0; c < in.c; ++c) {
    const T* ip = in.plane(c);
    T* op = out.plane(c);
    const T* wp = w.data() + static_cast<std::size_t>(c) * 9;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T wv = wp[ky * 3 + kx];
        for (int y = 0; y < ho; ++y) {
          const int iy = y * stride + ky - 1;
          if (iy < 0 || iy >= in.h) continue;
          const T* irow = ip + static_cast<std::size_t>(iy) * in.w;
          T* orow = op + static_cast<std::size_t>(y) * wo;
          const int x_lo = std::max(0, (1 - kx + stride - 1) / stride);
          for (int x = x_lo; x < wo; ++x) {
            const int ix = x * stride + kx - 1;
            if (ix >= in.w) break;
            orow[x] += wv * irow[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void depthwise3x3_backward(const Image<T>& in, std::span<const T> w, int stride,
                           const Image<T>& dout, std::span<T> dw, Image<T>& din) {
  din.resize(in.c, in.h, in.w);
  for (int c = 0; c < in.c; ++c) {
    const T* ip = in.plane(c);
    T* dip = din.plane(c);
    const T* dop = dout.plane(c);
    const T* wp = w.data() + static_cast<std::size_t>(c) * 9;
    T* dwp = dw.data() + static_cast<std::size_t>(c) * 9;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T wv = wp[ky * 3 + kx];
        T wacc = T(0);
        for (int y = 0; y < dout.h; ++y) {
          const int iy = y * stride + ky - 1;
          if (iy < 0 || iy >= in.h) continue;
          const T* irow = ip + static_cast<std::size_t>(iy) * in.w;
          T* dirow = dip + static_cast<std::size_t>(iy) * in.w;
          const T* dorow = dop + static_cast<std::size_t>(y) * dout.w;
          const int x_lo = std::max(0, (1 - kx + stride - 1) / stride);
          for (int x = x_lo; x < dout.w; ++x) {
            const int ix = x * stride + kx - 1;
            if (ix >= in.w) break;
            wacc += dorow[x] * irow[ix];
            dirow[ix] += wv * dorow[x];
          }
        }
        dwp[ky * 3 + kx] += wacc;
      }
    }
  }
}

template <typename T>
void scale_bias(const Image<T>& in, std::span<const T> scale, std::span<const T> bias,
                Image<T>& out) {
  out.resize(in.c, in.h, in.w);
  const std::size_t n = in.plane_size();
  for (int c = 0; c < in.c; ++c) {
    const T s = scale[static_cast<std::size_t>(c)];
    const T b = bias[static_cast<std::size_t>(c)];
    const T* ip = in.plane(c);
    T* op = out.plane(c);
    for (std::size_t p = 0; p < n; ++p) op[p] = s * ip[p] + b;
  }
}

template <typename T>
void scale_bias_backward(const Image<T>& in, std::span<const T> scale, const Image<T>& dout,
                         std::span<T> dscale, std::span<T> dbias, Image<T>& din) {
  din.resize(in.c, in.h, in.w);
  const std::size_t n = in.plane_size();
  for (int c = 0; c < in.c; ++c) {
    const T s = scale[static_cast<std::size_t>(c)];
    const T* ip = in.plane(c);
    const T* dop = dout.plane(c);
    T* dip = din.plane(c);
    T sacc = T(0), bacc = T(0);
    for (std::size_t p = 0; p < n; ++p) {
      sacc += dop[p] * ip[p];
      bacc += dop[p];
      dip[p] = s * dop[p];
    }
    dscale[static_cast<std::size_t>(c)] += sacc;
    dbias[static_cast<std::size_t>(c)] += bacc;
  }
}

template <typename T>
void relu6(const Image<T>& in, Image<T>& out) {
  out.resize(in.c, in.h, in.w);
  for (std::size_t i = 0; i < in.v.size(); ++i) {
    out.v[i] = std::min(std::max(in.v[i], T(0)), T(6));
  }
}

template <typename T>
void relu6_backward(const Image<T>& in, const Image<T>& dout, Image<T>& din) {
  din.resize(in.c, in.h, in.w);
  for (std::size_t i = 0; i < in.v.size(); ++i) {
    din.v[i] = (in.v[i] > T(0) && in.v[i] < T(6)) ? dout.v[i] : T(0);
  }
}

}  // namespace detail

template <typename T>
struct BlockCache {
  Image<T> expand_conv, expand_bn, expand_act;
  Image<T> dw_conv, dw_bn, dw_act;
  Image<T> proj_conv, proj_bn;
  Image<T> out;
};

template <typename T>
struct NetCache {
  Image<T> input;
  Image<T> stem_conv, stem_bn, stem_act;
  std::vector<BlockCache<T>> blocks;
  std::vector<double> feat;
  std::vector<double> logits;
};

// Runs the network, retaining every intermediate needed by net_backward.
template <typename T>
std::vector<double> net_forward(const NetworkConfig& cfg, const NetParams<T>& p,
                                std::span<const T> input, NetCache<T>& c) {
  const std::size_t want =
      static_cast<std::size_t>(cfg.in_channels) * cfg.in_h * cfg.in_w;
  if (input.size() != want) {
    throw ContractViolation("input tensor size mismatch: want " + std::to_string(want) +
                            ", got " + std::to_string(input.size()));
  }
  c.input.resize(cfg.in_channels, cfg.in_h, cfg.in_w);
  std::copy(input.begin(), input.end(), c.input.v.begin());

  detail::conv3x3(c.input, std::span<const T>(p.stem.w), cfg.stem_channels, 2, c.stem_conv);
  detail::scale_bias(c.stem_conv, std::span<const T>(p.stem.scale),
                     std::span<const T>(p.stem.bias), c.stem_bn);
  detail::relu6(c.stem_bn, c.stem_act);

  c.blocks.resize(cfg.blocks.size());
  const Image<T>* x = &c.stem_act;
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& spec = cfg.blocks[i];
    const auto& bp = p.blocks[i];
    auto& bc = c.blocks[i];
    const int e = spec.expansion * x->c;

    detail::conv1x1(*x, std::span<const T>(bp.expand.w), e, bc.expand_conv);
    detail::scale_bias(bc.expand_conv, std::span<const T>(bp.expand.scale),
                       std::span<const T>(bp.expand.bias), bc.expand_bn);
    detail::relu6(bc.expand_bn, bc.expand_act);

    detail::depthwise3x3(bc.expand_act, std::span<const T>(bp.dw.w), spec.stride, bc.dw_conv);
    detail::scale_bias(bc.dw_conv, std::span<const T>(bp.dw.scale),
                       std::span<const T>(bp.dw.bias), bc.dw_bn);
    detail::relu6(bc.dw_bn, bc.dw_act);

    detail::conv1x1(bc.dw_act, std::span<const T>(bp.project.w), spec.out_channels,
                    bc.proj_conv);
    detail::scale_bias(bc.proj_conv, std::span<const T>(bp.project.scale),
                       std::span<const T>(bp.project.bias), bc.proj_bn);

    if (spec.residual) {
      bc.out.resize(bc.proj_bn.c, bc.proj_bn.h, bc.proj_bn.w);
      for (std::size_t j = 0; j < bc.out.v.size(); ++j) {
        bc.out.v[j] = bc.proj_bn.v[j] + x->v[j];
      }
    } else {
      bc.out = bc.proj_bn;
    }
    x = &bc.out;
  }

  // Global average pool, then the affine head. Pool and head run in double.
  const int feat_n = x->c;
  c.feat.assign(static_cast<std::size_t>(feat_n), 0.0);
  const double inv = 1.0 / static_cast<double>(x->plane_size());
  for (int ch = 0; ch < feat_n; ++ch) {
    double acc = 0.0;
    const T* pl = x->plane(ch);
    for (std::size_t j = 0; j < x->plane_size(); ++j) acc += static_cast<double>(pl[j]);
    c.feat[static_cast<std::size_t>(ch)] = acc * inv;
  }
  c.logits.assign(static_cast<std::size_t>(cfg.num_classes), 0.0);
  for (int k = 0; k < cfg.num_classes; ++k) {
    double acc = static_cast<double>(p.head_b[static_cast<std::size_t>(k)]);
    const T* wrow = p.head_w.data() + static_cast<std::size_t>(k) * feat_n;
    for (int ch = 0; ch < feat_n; ++ch) {
      acc += static_cast<double>(wrow[ch]) * c.feat[static_cast<std::size_t>(ch)];
    }
    c.logits[static_cast<std::size_t>(k)] = acc;
  }
  return c.logits;
}

// Accumulates parameter gradients for one sample into `g` (same shapes as p).
template <typename T>
void net_backward(const NetworkConfig& cfg, const NetParams<T>& p, const NetCache<T>& c,
                  std::span<const double> dlogits, NetParams<T>& g) {
  const Image<T>* x_last = cfg.blocks.empty() ? &c.stem_act : &c.blocks.back().out;
  const int feat_n = x_last->c;

  // Head.
  std::vector<double> dfeat(static_cast<std::size_t>(feat_n), 0.0);
  for (int k = 0; k < cfg.num_classes; ++k) {
    const double dl = dlogits[static_cast<std::size_t>(k)];
    g.head_b[static_cast<std::size_t>(k)] += static_cast<T>(dl);
    const T* wrow = p.head_w.data() + static_cast<std::size_t>(k) * feat_n;
    T* gwrow = g.head_w.data() + static_cast<std::size_t>(k) * feat_n;
    for (int ch = 0; ch < feat_n; ++ch) {
      gwrow[ch] += static_cast<T>(dl * c.feat[static_cast<std::size_t>(ch)]);
      dfeat[static_cast<std::size_t>(ch)] += static_cast<double>(wrow[ch]) * dl;
    }
  }

  // Global average pool.
  Image<T> dx(x_last->c, x_last->h, x_last->w);
  const double inv = 1.0 / static_cast<double>(x_last->plane_size());
  for (int ch = 0; ch < feat_n; ++ch) {
    const T dv = static_cast<T>(dfeat[static_cast<std::size_t>(ch)] * inv);
    T* pl = dx.plane(ch);
    std::fill(pl, pl + dx.plane_size(), dv);
  }

  Image<T> tmp1, tmp2;
  for (int i = static_cast<int>(cfg.blocks.size()) - 1; i >= 0; --i) {
    const auto& spec = cfg.blocks[static_cast<std::size_t>(i)];
    const auto& bp = p.blocks[static_cast<std::size_t>(i)];
    auto& gb = g.blocks[static_cast<std::size_t>(i)];
    const auto& bc = c.blocks[static_cast<std::size_t>(i)];
    const Image<T>& block_in = i == 0 ? c.stem_act : c.blocks[static_cast<std::size_t>(i) - 1].out;

    // dx currently holds d(block out). For residual blocks the skip branch
    // adds dx to d(block in) at the end.
    detail::scale_bias_backward(bc.proj_conv, std::span<const T>(bp.project.scale), dx,
                                std::span<T>(gb.project.scale), std::span<T>(gb.project.bias),
                                tmp1);
    detail::conv1x1_backward(bc.dw_act, std::span<const T>(bp.project.w), spec.out_channels,
                             tmp1, std::span<T>(gb.project.w), tmp2);
    detail::relu6_backward(bc.dw_bn, tmp2, tmp1);
    detail::scale_bias_backward(bc.dw_conv, std::span<const T>(bp.dw.scale), tmp1,
                                std::span<T>(gb.dw.scale), std::span<T>(gb.dw.bias), tmp2);
    detail::depthwise3x3_backward(bc.expand_act, std::span<const T>(bp.dw.w), spec.stride,
                                  tmp2, std::span<T>(gb.dw.w), tmp1);
    detail::relu6_backward(bc.expand_bn, tmp1, tmp2);
    detail::scale_bias_backward(bc.expand_conv, std::span<const T>(bp.expand.scale), tmp2,
                                std::span<T>(gb.expand.scale), std::span<T>(gb.expand.bias),
                                tmp1);
    Image<T> din;
    detail::conv1x1_backward(block_in, std::span<const T>(bp.expand.w),
                             spec.expansion * block_in.c, tmp1, std::span<T>(gb.expand.w), din);
    if (spec.residual) {
      for (std::size_t j = 0; j < din.v.size(); ++j) din.v[j] += dx.v[j];
    }
    dx = std::move(din);
  }

  detail::relu6_backward(c.stem_bn, dx, tmp1);
  detail::scale_bias_backward(c.stem_conv, std::span<const T>(p.stem.scale), tmp1,
                              std::span<T>(g.stem.scale), std::span<T>(g.stem.bias), tmp2);
  Image<T> dinput;
  detail::conv3x3_backward(c.input, std::span<const T>(p.stem.w), cfg.stem_channels, 2, tmp2,
                           std::span<T>(g.stem.w), dinput);
}

// Numerically stable softmax (computed in double regardless of T).
std::vector<double> softmax(std::span<const double> logits);

// Cross-entropy of the softmax; fills dlogits = p - onehot(target).
double softmax_cross_entropy(std::span<const double> logits, int target,
                             std::span<double> dlogits);

}  // namespace usv::cnn
