#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedq/quant.hpp"

namespace fedq {

// Binary transport format for quantized gradient sets (little-endian):
//   magic "QGS1" (4 bytes), version u16 = 1, tensor_count u32
//   per tensor: layer_index u16, role u8 (0=weight, 1=bias), bits u8,
//               mode u8, rank u8, dims u32 x rank, min_range f32,
//               max_range f32, payload (elements x bits/8 bytes, signed
//               two's-complement)
std::vector<uint8_t> encode(const QuantizedGradSet& qset);

// Throws std::runtime_error naming the offset and field on bad magic, bad
// version, truncation, or out-of-range ids.
QuantizedGradSet decode(std::span<const uint8_t> bytes);

// Payload-only byte counts (headers excluded).
int64_t payload_bytes(const QuantizedGradSet& qset);
int64_t payload_bytes(const GradSet& grads);  // 4 bytes per float32 element

// Full encoded message length, headers included.
int64_t message_bytes(const QuantizedGradSet& qset);

}  // namespace fedq
