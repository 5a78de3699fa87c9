#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dsmote/layers.hpp"
#include "dsmote/params.hpp"
#include "dsmote/rng.hpp"
#include "dsmote/tensor.hpp"

namespace dsmote {

enum class Mode { train, eval };

// Per-layer activations and intermediates saved by a train-mode forward
// pass for consumption by backward.
struct LayerCache {
  Tensor input;
  Tensor output;              // only kept where backward needs it (tanh)
  Tensor bn_xhat;
  std::vector<float> bn_rstd;
  std::vector<int32_t> pool_argmax;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  int batch = 0;
  const NetworkSpec* spec = nullptr;
};

// Batch-norm hyperparameters fixed for the project.
constexpr float kBnEps = 1e-5f;
constexpr float kBnMomentum = 0.1f;

// DCGAN-style initialization: conv/linear weights ~ N(0, 0.02^2), biases
// zero, BN gamma=1 beta=0, running stats (0, 1).
ParamStore init_params(const NetworkSpec& spec, Rng& rng);

// Runs the stack on `input` (shape [N, ...input_shape]). Train mode uses
// batch statistics for BN and updates running statistics in `params`;
// eval mode reads running statistics and mutates nothing. `cache` may be
// null when no backward pass will follow.
Tensor forward(const NetworkSpec& spec, ParamStore& params, const Tensor& input,
               Mode mode, ForwardCache* cache);

// Backpropagates `grad_output` through a cache produced by a matching
// train-mode forward. Returns the gradient w.r.t. the network input and
// overwrites the per-parameter tensors of `grads` (built with
// GradStore::zeros_like). Pure with respect to `params`.
Tensor backward(const NetworkSpec& spec, const ParamStore& params,
                const ForwardCache& cache, const Tensor& grad_output, GradStore& grads);

// Mean squared error over all elements; grad_pred = 2(pred-target)/count.
std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target);

// Softmax cross-entropy over logits [N,K]; returns mean loss and
// grad_logits = (softmax - onehot)/N.
std::pair<double, Tensor> softmax_xent_loss(const Tensor& logits,
                                            const std::vector<int32_t>& labels);

// A spec paired with its parameters; the unit the trainer and the
// oversampler pass around.
struct Net {
  NetworkSpec spec;
  ParamStore params;
};

using LossFn = std::function<std::pair<double, Tensor>(const Tensor&)>;

// Central-finite-difference verification of backward: perturbs every
// trainable parameter by +/-epsilon, compares the analytic gradient and
// reports the worst relative error with denominator max(|a|,|n|,1e-8).
// Works on a copy of the store; intended for networks <= 1e4 parameters.
double grad_check(const NetworkSpec& spec, const ParamStore& params, const Tensor& input,
                  const LossFn& loss_fn, double epsilon);

}  // namespace dsmote
