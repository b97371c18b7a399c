#include "usv/train.hpp"

#include <cmath>
#include <numeric>

namespace usv::cnn {
namespace {

// Deterministic Fisher-Yates (std::shuffle is implementation-defined).
void shuffle_indices(std::vector<std::size_t>& idx, GaussianRng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.index_below(i)]);
  }
}

template <typename T>
void zero_params(NetParams<T>& p) {
  for (auto* t : tensor_list(p)) std::fill(t->begin(), t->end(), T(0));
}

}  // namespace

TrainResult train(const NetworkConfig& cfg, std::span<const TrainSample> dataset,
                  const TrainHyper& hyper, const EpochCallback& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw ContractViolation("empty training dataset");
  const std::size_t want =
      static_cast<std::size_t>(cfg.in_channels) * cfg.in_h * cfg.in_w;
  for (const auto& s : dataset) {
    if (s.x.size() != want) throw ContractViolation("training sample size mismatch");
    if (s.label < 0 || s.label >= cfg.num_classes) {
      throw ContractViolation("training label out of range");
    }
  }
  if (hyper.epochs < 1 || hyper.batch < 1 || !(hyper.lr > 0.0)) {
    throw ContractViolation("bad training hyperparameters");
  }

  NetParams<float> params = make_params<float>(cfg);
  init_params(params, cfg, hyper.seed);
  NetParams<float> grads = make_params<float>(cfg);
  NetParams<float> velocity = make_params<float>(cfg);

  auto param_t = tensor_list(params);
  auto grad_t = tensor_list(grads);
  auto vel_t = tensor_list(velocity);

  GaussianRng shuffle_rng(derive_seed(hyper.seed, 0xd5));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  NetCache<float> cache;
  std::vector<double> dlogits(static_cast<std::size_t>(cfg.num_classes));

  TrainResult result;
  double epoch_loss = 0.0;
  double epoch_acc = 0.0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle_indices(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      zero_params(grads);

      for (std::size_t i = start; i < end; ++i) {
        const auto& sample = dataset[order[i]];
        const auto logits = net_forward(cfg, params, sample.x, cache);
        const double loss = softmax_cross_entropy(logits, sample.label, dlogits);
        loss_sum += loss;
        if (argmax_index(logits) == sample.label) ++correct;
        for (auto& d : dlogits) d *= inv_batch;
        net_backward(cfg, params, cache, dlogits, grads);
      }

      for (std::size_t t = 0; t < param_t.size(); ++t) {
        float* w = param_t[t]->data();
        float* g = grad_t[t]->data();
        float* v = vel_t[t]->data();
        const std::size_t n = param_t[t]->size();
        const auto mom = static_cast<float>(hyper.momentum);
        const auto lr = static_cast<float>(hyper.lr);
        for (std::size_t j = 0; j < n; ++j) {
          v[j] = mom * v[j] - lr * g[j];
          w[j] += v[j];
        }
      }
    }

    epoch_loss = loss_sum / static_cast<double>(order.size());
    epoch_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    result.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss, epoch_acc);
  }

  result.weights.config = cfg;
  result.weights.params = std::move(params);
  result.weights.training_seed = hyper.seed;
  result.weights.epochs = static_cast<std::uint32_t>(hyper.epochs);
  result.final_loss = epoch_loss;
  result.final_accuracy = epoch_acc;
  return result;
}

TrainResult train_scalograms(std::span<const std::pair<Scalogram, ImpactLabel>> dataset,
                             const TrainHyper& hyper, const EpochCallback& on_epoch) {
  std::vector<TrainSample> samples;
  samples.reserve(dataset.size());
  for (const auto& [scal, label] : dataset) {
    samples.push_back({std::span<const float>(scal.v), label_index(label)});
  }
  return train(NetworkConfig::standard(), samples, hyper, on_epoch);
}

namespace {

struct CheckSetup {
  NetParams<double> params;
  std::vector<double> input;
  int label = 0;
};

CheckSetup make_check_setup(const NetworkConfig& cfg, std::uint64_t seed) {
  CheckSetup s;
  s.params = make_params<double>(cfg);
  init_params(s.params, cfg, seed);
  GaussianRng rng(derive_seed(seed, 0x1e));
  s.input.resize(static_cast<std::size_t>(cfg.in_channels) * cfg.in_h * cfg.in_w);
  for (auto& x : s.input) x = rng.uniform();  // scalogram-like range [0,1)
  s.label = static_cast<int>(rng.index_below(static_cast<std::size_t>(cfg.num_classes)));
  return s;
}

double loss_at(const NetworkConfig& cfg, const NetParams<double>& p,
               std::span<const double> input, int label) {
  NetCache<double> cache;
  const auto logits = net_forward(cfg, p, input, cache);
  std::vector<double> scratch(logits.size());
  return softmax_cross_entropy(logits, label, scratch);
}

void analytic_grads(const NetworkConfig& cfg, const NetParams<double>& p,
                    std::span<const double> input, int label, NetParams<double>& grads) {
  NetCache<double> cache;
  const auto logits = net_forward(cfg, p, input, cache);
  std::vector<double> dlogits(logits.size());
  softmax_cross_entropy(logits, label, dlogits);
  zero_params(grads);
  net_backward(cfg, p, cache, dlogits, grads);
}

}  // namespace

double grad_check(const NetworkConfig& cfg, std::uint64_t seed, double h) {
  cfg.validate();
  auto setup = make_check_setup(cfg, seed);
  NetParams<double> grads = make_params<double>(cfg);
  analytic_grads(cfg, setup.params, setup.input, setup.label, grads);

  auto param_t = tensor_list(setup.params);
  auto grad_t = tensor_list(grads);

  double max_rel = 0.0;
  for (std::size_t t = 0; t < param_t.size(); ++t) {
    auto& vec = *param_t[t];
    for (std::size_t j = 0; j < vec.size(); ++j) {
      const double orig = vec[j];
      vec[j] = orig + h;
      const double lp = loss_at(cfg, setup.params, setup.input, setup.label);
      vec[j] = orig - h;
      const double lm = loss_at(cfg, setup.params, setup.input, setup.label);
      vec[j] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = (*grad_t[t])[j];
      const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

double matched_target_grad_norm(const NetworkConfig& cfg, std::uint64_t seed) {
  auto setup = make_check_setup(cfg, seed);
  // Push the target logit far above the others: softmax saturates and the
  // loss gradient collapses toward zero everywhere.
  setup.params.head_b[static_cast<std::size_t>(setup.label)] += 60.0;
  NetParams<double> grads = make_params<double>(cfg);
  analytic_grads(cfg, setup.params, setup.input, setup.label, grads);
  double sq = 0.0;
  for (auto* t : tensor_list(grads)) {
    for (const double g : *t) sq += g * g;
  }
  return std::sqrt(sq);
}

double head_fd_error(const NetworkConfig& cfg, std::uint64_t seed, double h) {
  auto setup = make_check_setup(cfg, seed);
  NetParams<double> grads = make_params<double>(cfg);
  analytic_grads(cfg, setup.params, setup.input, setup.label, grads);

  double max_abs = 0.0;
  for (std::size_t j = 0; j < setup.params.head_w.size(); ++j) {
    const double orig = setup.params.head_w[j];
    setup.params.head_w[j] = orig + h;
    const double lp = loss_at(cfg, setup.params, setup.input, setup.label);
    setup.params.head_w[j] = orig - h;
    const double lm = loss_at(cfg, setup.params, setup.input, setup.label);
    setup.params.head_w[j] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    max_abs = std::max(max_abs, std::abs(fd - grads.head_w[j]));
  }
  return max_abs;
}

}  // namespace usv::cnn
