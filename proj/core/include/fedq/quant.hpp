#pragma once

#include <cstdint>
#include <vector>

#include "fedq/model.hpp"
#include "fedq/tensor.hpp"

namespace fedq {

// Formula family used to map floats to integers. Mismatched modes between
// encoder and decoder corrupt the recovered values; the ids are stable and
// used on the wire.
enum class QuantMode : uint8_t { Scaled = 0, MinCombined = 1 };

const char* quant_mode_name(QuantMode mode);

int64_t quant_min_target(int bits);  // -2^(bits-1)
int64_t quant_max_target(int bits);  // 2^(bits-1) - 1

struct QuantizedTensor {
  int bits = 8;  // 8 or 16
  QuantMode mode = QuantMode::Scaled;
  // The ADJUSTED range produced by quantization (Scaled: min_T/s, max_T/s;
  // MinCombined: the caller's input range).
  float min_range = 0.0f;
  float max_range = 0.0f;
  Shape shape;
  std::vector<int32_t> payload;  // values within [min_T, max_T]

  int64_t elements() const { return static_cast<int64_t>(payload.size()); }

  // Throws on out-of-bound payload values, bad bits, or broken ranges.
  void validate() const;
};

// Per-tensor quantization. `in_min`/`in_max` declare the value range; inputs
// outside it are clamped. Callers normally pass the tensor's own min/max.
QuantizedTensor quantize(const Tensor& x, int bits, QuantMode mode, float in_min, float in_max);

// Convenience overload using the tensor's own (min, max) as the range.
QuantizedTensor quantize(const Tensor& x, int bits, QuantMode mode);

Tensor dequantize(const QuantizedTensor& q);

// Applies `mode`'s dequantization formula with caller-supplied ranges instead
// of the tensor's stored metadata. This models an attacker who knows the
// original float range but guesses the procedure; it is also the basis of the
// mode-mismatch ablation.
Tensor dequantize_as(const QuantizedTensor& q, QuantMode mode, float min_range, float max_range);

// Per-layer (bit-width, mode) assignment, one entry per ParamSet tensor.
struct QuantPolicy {
  struct Entry {
    int64_t layer_index;
    ParamRole role;
    int bits;
    QuantMode mode;
  };
  std::vector<Entry> entries;

  // Alternates (int8, Scaled) / (int16, MinCombined) by parameterized-layer
  // ordinal; both tensors of a layer share the assignment.
  static QuantPolicy default_mixed(const ParamSet& layout);
  static QuantPolicy uniform(const ParamSet& layout, int bits, QuantMode mode);

  // Layer-ordinal overrides: pairs of (bits, mode), one per parameterized
  // layer in order.
  static QuantPolicy from_layer_rules(const ParamSet& layout,
                                      const std::vector<std::pair<int, QuantMode>>& rules);

  // Throws naming the first tensor without a policy entry.
  void require_covers(const ParamSet& layout) const;

  // Number of distinct layers covered (the L of the search-space formula).
  int64_t layer_count() const;
};

struct QuantizedGradSet {
  struct Entry {
    int64_t layer_index;
    ParamRole role;
    QuantizedTensor q;
  };
  std::vector<Entry> entries;

  int64_t total_elements() const;
};

QuantizedGradSet quantize_set(const GradSet& grads, const QuantPolicy& policy);
GradSet dequantize_set(const QuantizedGradSet& qset);

}  // namespace fedq
