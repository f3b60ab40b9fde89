#include "fedq/model.hpp"

#include <numeric>
#include <stdexcept>

namespace fedq {

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::MaxPool2: return "maxpool2";
    case LayerKind::Relu: return "relu";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::Flatten: return "flatten";
  }
  return "?";
}

namespace {

[[noreturn]] void composition_error(size_t i, const Layer& layer, const Shape& in,
                                    const std::string& why) {
  throw std::invalid_argument("model composition error at layer " + std::to_string(i) + " (" +
                              layer_kind_name(layer.kind) + "): input " + shape_to_string(in) +
                              " " + why);
}

Shape apply_layer_shape(size_t i, const Layer& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::Dense: {
      if (in.size() != 1) composition_error(i, layer, in, "is not flat; expected [n]");
      if (in[0] != layer.in)
        composition_error(i, layer, in,
                          "does not match dense input size " + std::to_string(layer.in));
      return {layer.out};
    }
    case LayerKind::Conv2d: {
      if (in.size() != 3) composition_error(i, layer, in, "is not [c,h,w]");
      if (in[0] != layer.in)
        composition_error(i, layer, in,
                          "channel count does not match conv input channels " +
                              std::to_string(layer.in));
      if (in[1] < layer.k || in[2] < layer.k)
        composition_error(i, layer, in, "is smaller than kernel " + std::to_string(layer.k));
      return {layer.out, in[1] - layer.k + 1, in[2] - layer.k + 1};
    }
    case LayerKind::MaxPool2: {
      if (in.size() != 3) composition_error(i, layer, in, "is not [c,h,w]");
      if (in[1] < 2 || in[2] < 2) composition_error(i, layer, in, "is smaller than the 2x2 window");
      return {in[0], in[1] / 2, in[2] / 2};
    }
    case LayerKind::Relu:
    case LayerKind::Tanh:
      return in;
    case LayerKind::Flatten:
      return {shape_product(in)};
  }
  throw std::logic_error("unreachable layer kind");
}

}  // namespace

Shape ModelSpec::shape_after(size_t upto) const {
  if (upto > layers.size()) throw std::invalid_argument("shape_after: layer index out of range");
  Shape cur = input_shape;
  for (size_t i = 0; i < upto; ++i) cur = apply_layer_shape(i, layers[i], cur);
  return cur;
}

void ModelSpec::validate() const {
  if (input_shape.empty()) throw std::invalid_argument("model input shape is empty");
  if (class_count < 2) throw std::invalid_argument("class_count must be at least 2");
  Shape out = shape_after(layers.size());
  bool has_params = false;
  for (const Layer& l : layers) has_params = has_params || l.parameterized();
  if (!has_params) throw std::invalid_argument("model has no parameterized layer");
  if (out.size() != 1 || out[0] != class_count) {
    throw std::invalid_argument("model output " + shape_to_string(out) +
                                " does not match class count " + std::to_string(class_count));
  }
}

std::vector<int64_t> ModelSpec::parameterized_layers() const {
  std::vector<int64_t> idx;
  for (size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].parameterized()) idx.push_back(static_cast<int64_t>(i));
  }
  return idx;
}

ModelSpec lenet_small(int64_t classes) {
  ModelSpec spec;
  spec.input_shape = {1, 28, 28};
  spec.class_count = classes;
  spec.layers = {
      Layer::conv2d(1, 6, 5),  Layer::relu(), Layer::maxpool2(),
      Layer::conv2d(6, 16, 5), Layer::relu(), Layer::maxpool2(),
      Layer::flatten(),
      Layer::dense(16 * 4 * 4, 120), Layer::relu(),
      Layer::dense(120, 84),         Layer::relu(),
      Layer::dense(84, classes),
  };
  return spec;
}

ModelSpec mlp_tiny(int64_t classes) {
  ModelSpec spec;
  spec.input_shape = {64};
  spec.class_count = classes;
  spec.layers = {Layer::dense(64, 32), Layer::relu(), Layer::dense(32, classes)};
  return spec;
}

int64_t ParamSet::total_elements() const {
  int64_t n = 0;
  for (const Entry& e : entries) n += e.tensor.size();
  return n;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry& a = entries[i];
    const Entry& b = other.entries[i];
    if (a.layer_index != b.layer_index || a.role != b.role || a.tensor.shape != b.tensor.shape)
      return false;
  }
  return true;
}

void ParamSet::require_same_layout(const ParamSet& other, const std::string& context) const {
  if (entries.size() != other.entries.size()) {
    throw std::invalid_argument(context + ": layout mismatch, entry counts " +
                                std::to_string(entries.size()) + " vs " +
                                std::to_string(other.entries.size()));
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry& a = entries[i];
    const Entry& b = other.entries[i];
    if (a.layer_index != b.layer_index || a.role != b.role || a.tensor.shape != b.tensor.shape) {
      throw std::invalid_argument(context + ": layout mismatch at entry " + std::to_string(i) +
                                  " (layer " + std::to_string(a.layer_index) + " vs " +
                                  std::to_string(b.layer_index) + ", shape " +
                                  shape_to_string(a.tensor.shape) + " vs " +
                                  shape_to_string(b.tensor.shape) + ")");
    }
  }
}

void Batch::validate(int64_t class_count) const {
  if (inputs.shape.empty() || inputs.shape[0] != size()) {
    throw std::invalid_argument("batch inputs leading dim " +
                                (inputs.shape.empty() ? std::string("<none>")
                                                      : std::to_string(inputs.shape[0])) +
                                " does not match label count " + std::to_string(size()));
  }
  for (int64_t y : labels) {
    if (y < 0 || y >= class_count) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(class_count) + ")");
    }
  }
}

Batch single_sample(const Batch& batch, int64_t i) {
  if (i < 0 || i >= batch.size()) throw std::invalid_argument("single_sample: index out of range");
  int64_t stride = batch.inputs.size() / batch.size();
  Shape s = batch.inputs.shape;
  s[0] = 1;
  std::vector<float> vals(batch.inputs.data.begin() + i * stride,
                          batch.inputs.data.begin() + (i + 1) * stride);
  return Batch{Tensor(std::move(s), std::move(vals)), {batch.labels[static_cast<size_t>(i)]}};
}

}  // namespace fedq
