#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedq/tensor.hpp"

namespace fedq {

enum class LayerKind { Dense, Conv2d, MaxPool2, Relu, Tanh, Flatten };

std::string layer_kind_name(LayerKind kind);

// One layer of the fixed menu. Meaning of the integer fields:
//   Dense:  in = input features, out = output features
//   Conv2d: in = input channels, out = output channels, k = square kernel
// Conv2d is valid (no padding), stride 1; MaxPool2 is a 2x2 window, stride 2.
struct Layer {
  LayerKind kind;
  int64_t in = 0;
  int64_t out = 0;
  int64_t k = 0;

  static Layer dense(int64_t in, int64_t out) { return {LayerKind::Dense, in, out, 0}; }
  static Layer conv2d(int64_t in_ch, int64_t out_ch, int64_t k) {
    return {LayerKind::Conv2d, in_ch, out_ch, k};
  }
  static Layer maxpool2() { return {LayerKind::MaxPool2, 0, 0, 0}; }
  static Layer relu() { return {LayerKind::Relu, 0, 0, 0}; }
  static Layer tanh() { return {LayerKind::Tanh, 0, 0, 0}; }
  static Layer flatten() { return {LayerKind::Flatten, 0, 0, 0}; }

  bool parameterized() const { return kind == LayerKind::Dense || kind == LayerKind::Conv2d; }
};

struct ModelSpec {
  std::vector<Layer> layers;
  Shape input_shape;  // sample shape, without the batch dim
  int64_t class_count = 0;

  // Shape of a single sample after layer `upto` layers have been applied
  // (upto == layers.size() gives the logits shape). Throws a composition
  // error naming the offending layer pair if shapes do not compose.
  Shape shape_after(size_t upto) const;

  // Full composition check plus "at least one parameterized layer" and
  // "final output matches class_count".
  void validate() const;

  // Indices of parameterized layers, in order.
  std::vector<int64_t> parameterized_layers() const;
};

// Reference models. lenet_small expects {1,28,28} inputs; mlp_tiny flat {64}.
ModelSpec lenet_small(int64_t classes = 10);
ModelSpec mlp_tiny(int64_t classes = 10);

enum class ParamRole : uint8_t { Weight = 0, Bias = 1 };

// Ordered parameter (or gradient) collection mirroring the model layout:
// for each parameterized layer, a weight entry then a bias entry.
struct ParamSet {
  struct Entry {
    int64_t layer_index;
    ParamRole role;
    Tensor tensor;
  };
  std::vector<Entry> entries;

  int64_t total_elements() const;
  bool same_layout(const ParamSet& other) const;

  // Throws naming the first mismatching entry.
  void require_same_layout(const ParamSet& other, const std::string& context) const;
};

// A GradSet is a ParamSet tagged as gradients; identical layout rules.
using GradSet = ParamSet;

struct Batch {
  Tensor inputs;                // leading batch dim
  std::vector<int64_t> labels;  // class indices, length = batch size

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  void validate(int64_t class_count) const;
};

// Copies sample `i` of `batch` into a batch of size 1.
Batch single_sample(const Batch& batch, int64_t i);

}  // namespace fedq
