#include "fedq/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedq {

int64_t shape_product(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw std::invalid_argument("shape dims must be positive, got " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape s, std::vector<float> values) : shape(std::move(s)), data(std::move(values)) {
  if (shape_product(shape) != static_cast<int64_t>(data.size())) {
    throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_to_string(shape));
  }
}

Tensor Tensor::zeros(Shape s) {
  int64_t n = shape_product(s);
  Tensor t;
  t.shape = std::move(s);
  t.data.assign(static_cast<size_t>(n), 0.0f);
  return t;
}

Tensor Tensor::full(Shape s, float value) {
  Tensor t = zeros(std::move(s));
  for (float& v : t.data) v = value;
  return t;
}

float Tensor::min_value() const {
  float m = std::numeric_limits<float>::infinity();
  for (float v : data) m = std::min(m, v);
  return data.empty() ? 0.0f : m;
}

float Tensor::max_value() const {
  float m = -std::numeric_limits<float>::infinity();
  for (float v : data) m = std::max(m, v);
  return data.empty() ? 0.0f : m;
}

bool Tensor::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::check(const std::string& context) const {
  if (shape_product(shape) != static_cast<int64_t>(data.size())) {
    throw std::invalid_argument(context + ": tensor data length does not match shape " +
                                shape_to_string(shape));
  }
  if (!all_finite()) {
    throw std::invalid_argument(context + ": tensor contains non-finite values");
  }
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace fedq
