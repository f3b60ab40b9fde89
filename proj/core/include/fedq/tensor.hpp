#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedq {

using Shape = std::vector<int64_t>;

int64_t shape_product(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Row-major float32 carrier for all model values, gradients and images.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<float> values);

  static Tensor zeros(Shape s);
  static Tensor full(Shape s, float value);

  int64_t size() const { return static_cast<int64_t>(data.size()); }

  float min_value() const;
  float max_value() const;
  bool all_finite() const;

  // Throws std::invalid_argument naming `context` if any value is NaN/Inf
  // or the data length disagrees with the shape.
  void check(const std::string& context) const;
};

bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace fedq
