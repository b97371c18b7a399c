#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "usv/imu.hpp"
#include "usv/weights.hpp"

namespace usv::cnn {

struct TrainHyper {
  double lr = 0.01;
  int epochs = 100;
  int batch = 8;
  std::uint64_t seed = 1;
  double momentum = 0.9;
};

// One training example; x must match the config's input tensor size and stay
// alive for the duration of train().
struct TrainSample {
  std::span<const float> x;
  int label = 0;
};

struct TrainResult {
  Weights weights;
  double final_loss = 0.0;         // mean cross-entropy over the last epoch
  double final_accuracy = 0.0;     // training accuracy over the last epoch
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double loss, double accuracy)>;

// Mini-batch SGD with momentum over mean cross-entropy. Single-threaded and
// bit-reproducible for a fixed seed (fixed shuffle order, fixed reduction
// order).
TrainResult train(const NetworkConfig& cfg, std::span<const TrainSample> dataset,
                  const TrainHyper& hyper, const EpochCallback& on_epoch = nullptr);

// Convenience wrapper over labeled scalograms with the standard config.
TrainResult train_scalograms(std::span<const std::pair<Scalogram, ImpactLabel>> dataset,
                             const TrainHyper& hyper, const EpochCallback& on_epoch = nullptr);

// Compares analytic gradients of the softmax cross-entropy against central
// finite differences (step h) over every parameter, in 64-bit arithmetic, on
// a random input/label pair. Returns the max relative error.
double grad_check(const NetworkConfig& cfg, std::uint64_t seed, double h = 1e-4);

// Gradient L2 norm at an artificially matched target (logit of the target
// class pushed far above the rest); near zero when backprop is consistent.
double matched_target_grad_norm(const NetworkConfig& cfg, std::uint64_t seed);

// Max |analytic - central difference| over the affine head weights (a smooth
// parameter group) at step h; used to observe the O(h^2) truncation order.
double head_fd_error(const NetworkConfig& cfg, std::uint64_t seed, double h);

}  // namespace usv::cnn
