#include "fedq/quant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedq {

namespace {

constexpr double kMaxFloat = std::numeric_limits<float>::max();

void check_bits(int bits) {
  if (bits != 8 && bits != 16) {
    throw std::invalid_argument("quantization bits must be 8 or 16, got " + std::to_string(bits));
  }
}

// Round-half-to-even without relying on the fenv rounding mode.
double round_half_even(double v) {
  double r = std::floor(v);
  double frac = v - r;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(r, 2.0) != 0.0)) r += 1.0;
  return r;
}

float to_float_saturating(double v) {
  if (v > kMaxFloat) return static_cast<float>(kMaxFloat);
  if (v < -kMaxFloat) return static_cast<float>(-kMaxFloat);
  return static_cast<float>(v);
}

int32_t clamp_payload(double v, int64_t lo, int64_t hi) {
  if (v < static_cast<double>(lo)) return static_cast<int32_t>(lo);
  if (v > static_cast<double>(hi)) return static_cast<int32_t>(hi);
  return static_cast<int32_t>(v);
}

}  // namespace

const char* quant_mode_name(QuantMode mode) {
  return mode == QuantMode::Scaled ? "scaled" : "min_combined";
}

int64_t quant_min_target(int bits) {
  check_bits(bits);
  return -(int64_t{1} << (bits - 1));
}

int64_t quant_max_target(int bits) {
  check_bits(bits);
  return (int64_t{1} << (bits - 1)) - 1;
}

void QuantizedTensor::validate() const {
  check_bits(bits);
  if (mode != QuantMode::Scaled && mode != QuantMode::MinCombined) {
    throw std::invalid_argument("unknown quantization mode id " +
                                std::to_string(static_cast<int>(mode)));
  }
  if (!std::isfinite(min_range) || !std::isfinite(max_range) || min_range > max_range) {
    throw std::invalid_argument("quantized tensor range is broken: [" +
                                std::to_string(min_range) + ", " + std::to_string(max_range) +
                                "]");
  }
  if (shape_product(shape) != elements()) {
    throw std::invalid_argument("quantized tensor payload length " +
                                std::to_string(payload.size()) + " does not match shape " +
                                shape_to_string(shape));
  }
  const int64_t lo = quant_min_target(bits), hi = quant_max_target(bits);
  for (size_t i = 0; i < payload.size(); ++i) {
    if (payload[i] < lo || payload[i] > hi) {
      throw std::invalid_argument("payload value " + std::to_string(payload[i]) + " at index " +
                                  std::to_string(i) + " outside [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] for " + std::to_string(bits) + " bits");
    }
  }
}

QuantizedTensor quantize(const Tensor& x, int bits, QuantMode mode, float in_min, float in_max) {
  check_bits(bits);
  x.check("quantize input");
  if (!std::isfinite(in_min) || !std::isfinite(in_max)) {
    throw std::invalid_argument("quantize: range endpoints must be finite");
  }
  if (in_min > in_max) {
    throw std::invalid_argument("quantize: in_min " + std::to_string(in_min) + " > in_max " +
                                std::to_string(in_max));
  }

  const int64_t min_t = quant_min_target(bits);
  const int64_t max_t = quant_max_target(bits);

  QuantizedTensor q;
  q.bits = bits;
  q.mode = mode;
  q.shape = x.shape;
  q.payload.resize(x.data.size());

  if (mode == QuantMode::Scaled) {
    double s;
    if (in_min == 0.0f && in_max == 0.0f) {
      s = 1.0;  // all-zero range; MAX_FLOAT sentinel would blow up the outputs
    } else {
      double msf = (static_cast<double>(min_t) * in_min > 0.0)
                       ? static_cast<double>(min_t) / in_min
                       : kMaxFloat;
      double Msf = (static_cast<double>(max_t) * in_max > 0.0)
                       ? static_cast<double>(max_t) / in_max
                       : kMaxFloat;
      s = std::min(msf, Msf);
    }
    const double min_range = static_cast<double>(min_t) / s;
    const double max_range = static_cast<double>(max_t) / s;
    q.min_range = to_float_saturating(min_range);
    q.max_range = to_float_saturating(max_range);
    for (size_t i = 0; i < x.data.size(); ++i) {
      double v = std::min(max_range, std::max(min_range, static_cast<double>(x.data[i])));
      q.payload[i] = clamp_payload(round_half_even(v * s), min_t, max_t);
    }
  } else {
    q.min_range = in_min;
    q.max_range = in_max;
    if (in_min == in_max) {
      // Degenerate point range: a zero tensor quantizes to zero payload,
      // any other constant to min_T; both dequantize back exactly.
      int32_t fill = (in_min == 0.0f) ? 0 : static_cast<int32_t>(min_t);
      for (auto& p : q.payload) p = fill;
    } else {
      const double span = static_cast<double>(in_max) - static_cast<double>(in_min);
      const double steps = static_cast<double>(max_t - min_t);
      for (size_t i = 0; i < x.data.size(); ++i) {
        double v = std::min<double>(in_max, std::max<double>(in_min, x.data[i]));
        double u = (v - in_min) / span * steps;
        q.payload[i] =
            clamp_payload(round_half_even(u) + static_cast<double>(min_t), min_t, max_t);
      }
    }
  }
  return q;
}

QuantizedTensor quantize(const Tensor& x, int bits, QuantMode mode) {
  return quantize(x, bits, mode, x.min_value(), x.max_value());
}

Tensor dequantize(const QuantizedTensor& q) {
  q.validate();
  return dequantize_as(q, q.mode, q.min_range, q.max_range);
}

Tensor dequantize_as(const QuantizedTensor& q, QuantMode mode, float min_range, float max_range) {
  q.validate();
  const int64_t min_t = quant_min_target(q.bits);
  const int64_t max_t = quant_max_target(q.bits);
  Tensor out = Tensor::zeros(q.shape);

  if (mode == QuantMode::Scaled) {
    // Signed targets only, so the unsigned min(T)==0 branch never applies.
    const double s_inv = std::max(static_cast<double>(min_range) / static_cast<double>(min_t),
                                  static_cast<double>(max_range) / static_cast<double>(max_t));
    for (size_t i = 0; i < q.payload.size(); ++i) {
      out.data[i] = to_float_saturating(static_cast<double>(q.payload[i]) * s_inv);
    }
  } else {
    const double span = static_cast<double>(max_range) - static_cast<double>(min_range);
    const double steps = static_cast<double>(max_t - min_t);
    for (size_t i = 0; i < q.payload.size(); ++i) {
      double u = static_cast<double>(q.payload[i] - min_t) * span / steps;
      out.data[i] = to_float_saturating(u + static_cast<double>(min_range));
    }
  }
  return out;
}

QuantPolicy QuantPolicy::default_mixed(const ParamSet& layout) {
  QuantPolicy policy;
  int64_t last_layer = -1;
  int64_t ordinal = -1;
  for (const auto& e : layout.entries) {
    if (e.layer_index != last_layer) {
      last_layer = e.layer_index;
      ++ordinal;
    }
    bool even = ordinal % 2 == 0;
    policy.entries.push_back({e.layer_index, e.role, even ? 8 : 16,
                              even ? QuantMode::Scaled : QuantMode::MinCombined});
  }
  return policy;
}

QuantPolicy QuantPolicy::uniform(const ParamSet& layout, int bits, QuantMode mode) {
  QuantPolicy policy;
  for (const auto& e : layout.entries) policy.entries.push_back({e.layer_index, e.role, bits, mode});
  return policy;
}

QuantPolicy QuantPolicy::from_layer_rules(const ParamSet& layout,
                                          const std::vector<std::pair<int, QuantMode>>& rules) {
  QuantPolicy policy;
  int64_t last_layer = -1;
  size_t ordinal = 0;
  for (const auto& e : layout.entries) {
    if (e.layer_index != last_layer) {
      if (last_layer != -1) ++ordinal;
      last_layer = e.layer_index;
    }
    if (ordinal >= rules.size()) {
      throw std::invalid_argument("policy rules cover " + std::to_string(rules.size()) +
                                  " layers but layout has more");
    }
    policy.entries.push_back(
        {e.layer_index, e.role, rules[ordinal].first, rules[ordinal].second});
  }
  return policy;
}

void QuantPolicy::require_covers(const ParamSet& layout) const {
  if (entries.size() != layout.entries.size()) {
    throw std::invalid_argument("policy has " + std::to_string(entries.size()) +
                                " entries for a layout of " +
                                std::to_string(layout.entries.size()));
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].layer_index != layout.entries[i].layer_index ||
        entries[i].role != layout.entries[i].role) {
      throw std::invalid_argument(
          "policy gap at entry " + std::to_string(i) + ": tensor (layer " +
          std::to_string(layout.entries[i].layer_index) + ", " +
          (layout.entries[i].role == ParamRole::Weight ? "weight" : "bias") + ") is uncovered");
    }
    check_bits(entries[i].bits);
  }
}

int64_t QuantPolicy::layer_count() const {
  int64_t count = 0;
  int64_t last = -1;
  for (const auto& e : entries) {
    if (e.layer_index != last) {
      ++count;
      last = e.layer_index;
    }
  }
  return count;
}

int64_t QuantizedGradSet::total_elements() const {
  int64_t n = 0;
  for (const auto& e : entries) n += e.q.elements();
  return n;
}

QuantizedGradSet quantize_set(const GradSet& grads, const QuantPolicy& policy) {
  policy.require_covers(grads);
  QuantizedGradSet out;
  out.entries.reserve(grads.entries.size());
  for (size_t i = 0; i < grads.entries.size(); ++i) {
    const auto& g = grads.entries[i];
    const auto& rule = policy.entries[i];
    out.entries.push_back({g.layer_index, g.role, quantize(g.tensor, rule.bits, rule.mode)});
  }
  return out;
}

GradSet dequantize_set(const QuantizedGradSet& qset) {
  GradSet out;
  out.entries.reserve(qset.entries.size());
  for (const auto& e : qset.entries) {
    out.entries.push_back({e.layer_index, e.role, dequantize(e.q)});
  }
  return out;
}

}  // namespace fedq
