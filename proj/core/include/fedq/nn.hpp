#pragma once

#include <cstdint>

#include "fedq/model.hpp"

namespace fedq {

// Glorot-uniform weights, zero biases. Bit-identical for a fixed seed.
ParamSet init_params(const ModelSpec& spec, uint64_t seed);

struct ForwardResult {
  Tensor logits;  // {batch, classes}
  double loss;    // mean cross-entropy over the batch
};

ForwardResult forward_loss(const ModelSpec& spec, const ParamSet& params, const Batch& batch);

// Gradient of the mean-batch loss w.r.t. every parameter tensor.
GradSet backward(const ModelSpec& spec, const ParamSet& params, const Batch& batch);

// Gradient of the mean-batch loss w.r.t. the input pixels.
Tensor input_gradient(const ModelSpec& spec, const ParamSet& params, const Batch& batch);

// w' = w - mu * g. mu must be finite and non-negative.
ParamSet sgd_step(const ParamSet& params, const GradSet& grads, float mu);

GradSet zeros_like(const ParamSet& params);

// a - b over matching layouts.
GradSet param_delta(const ParamSet& a, const ParamSet& b);

// a + b over matching layouts.
ParamSet param_add(const ParamSet& a, const GradSet& delta);

}  // namespace fedq
