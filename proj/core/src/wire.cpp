#include "fedq/wire.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace fedq {

namespace {

constexpr uint8_t kMagic[4] = {'Q', 'G', 'S', '1'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<uint8_t>& out, float f) {
  uint32_t v = std::bit_cast<uint32_t>(f);
  put_u32(out, v);
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw std::runtime_error("decode error at offset " + std::to_string(pos_) + ", field '" +
                             field + "': " + why);
  }

  void need(size_t n, const std::string& field) const {
    if (pos_ + n > bytes_.size()) {
      fail(field, "truncated: need " + std::to_string(n) + " bytes, have " +
                      std::to_string(bytes_.size() - pos_));
    }
  }

  uint8_t u8(const std::string& field) {
    need(1, field);
    return bytes_[pos_++];
  }

  uint16_t u16(const std::string& field) {
    need(2, field);
    uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  uint32_t u32(const std::string& field) {
    need(4, field);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32(const std::string& field) { return std::bit_cast<float>(u32(field)); }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

int64_t tensor_header_bytes(const QuantizedTensor& q) {
  return 2 + 1 + 1 + 1 + 1 + 4 * static_cast<int64_t>(q.shape.size()) + 4 + 4;
}

}  // namespace

std::vector<uint8_t> encode(const QuantizedGradSet& qset) {
  std::vector<uint8_t> out;
  out.reserve(static_cast<size_t>(message_bytes(qset)));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<uint32_t>(qset.entries.size()));
  for (const auto& e : qset.entries) {
    e.q.validate();
    if (e.layer_index < 0 || e.layer_index > UINT16_MAX) {
      throw std::invalid_argument("encode: layer index " + std::to_string(e.layer_index) +
                                  " does not fit in u16");
    }
    if (e.q.shape.size() > UINT8_MAX) throw std::invalid_argument("encode: rank does not fit u8");
    put_u16(out, static_cast<uint16_t>(e.layer_index));
    out.push_back(static_cast<uint8_t>(e.role));
    out.push_back(static_cast<uint8_t>(e.q.bits));
    out.push_back(static_cast<uint8_t>(e.q.mode));
    out.push_back(static_cast<uint8_t>(e.q.shape.size()));
    for (int64_t d : e.q.shape) {
      if (d < 0 || d > UINT32_MAX) throw std::invalid_argument("encode: dim does not fit u32");
      put_u32(out, static_cast<uint32_t>(d));
    }
    put_f32(out, e.q.min_range);
    put_f32(out, e.q.max_range);
    for (int32_t p : e.q.payload) {
      out.push_back(static_cast<uint8_t>(p & 0xff));
      if (e.q.bits == 16) out.push_back(static_cast<uint8_t>((p >> 8) & 0xff));
    }
  }
  return out;
}

QuantizedGradSet decode(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  for (int i = 0; i < 4; ++i) {
    if (r.u8("magic") != kMagic[i]) {
      throw std::runtime_error("decode error at offset " + std::to_string(i) +
                               ", field 'magic': expected 'QGS1'");
    }
  }

  uint16_t version = r.u16("version");
  if (version != kVersion) {
    throw std::runtime_error("decode error at offset 4, field 'version': unsupported version " +
                             std::to_string(version));
  }
  uint32_t count = r.u32("tensor_count");

  QuantizedGradSet qset;
  qset.entries.reserve(count);
  for (uint32_t t = 0; t < count; ++t) {
    const std::string tn = "tensor_" + std::to_string(t);
    QuantizedGradSet::Entry e;
    e.layer_index = r.u16(tn + ".layer_index");
    uint8_t role = r.u8(tn + ".role");
    if (role > 1) r.fail(tn + ".role", "out of range id " + std::to_string(role));
    e.role = static_cast<ParamRole>(role);
    uint8_t bits = r.u8(tn + ".bits");
    if (bits != 8 && bits != 16) r.fail(tn + ".bits", "unsupported width " + std::to_string(bits));
    e.q.bits = bits;
    uint8_t mode = r.u8(tn + ".mode");
    if (mode > 1) r.fail(tn + ".mode", "out of range mode id " + std::to_string(mode));
    e.q.mode = static_cast<QuantMode>(mode);
    uint8_t rank = r.u8(tn + ".rank");
    int64_t elements = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      uint32_t dim = r.u32(tn + ".dims[" + std::to_string(d) + "]");
      if (dim == 0) r.fail(tn + ".dims[" + std::to_string(d) + "]", "zero dimension");
      e.q.shape.push_back(dim);
      elements *= dim;
    }
    e.q.min_range = r.f32(tn + ".min_range");
    e.q.max_range = r.f32(tn + ".max_range");
    if (!(e.q.min_range <= e.q.max_range)) {
      r.fail(tn + ".min_range", "min_range exceeds max_range");
    }
    const int64_t payload_len = elements * (bits / 8);
    r.need(static_cast<size_t>(payload_len), tn + ".payload");
    e.q.payload.resize(static_cast<size_t>(elements));
    for (int64_t i = 0; i < elements; ++i) {
      if (bits == 8) {
        e.q.payload[static_cast<size_t>(i)] = static_cast<int8_t>(r.u8(tn + ".payload"));
      } else {
        e.q.payload[static_cast<size_t>(i)] = static_cast<int16_t>(r.u16(tn + ".payload"));
      }
    }
    qset.entries.push_back(std::move(e));
  }
  if (!r.done()) {
    throw std::runtime_error("decode error at offset " + std::to_string(r.offset()) +
                             ", field 'end': " +
                             std::to_string(bytes.size() - r.offset()) + " trailing bytes");
  }
  return qset;
}

int64_t payload_bytes(const QuantizedGradSet& qset) {
  int64_t n = 0;
  for (const auto& e : qset.entries) n += e.q.elements() * (e.q.bits / 8);
  return n;
}

int64_t payload_bytes(const GradSet& grads) {
  int64_t n = 0;
  for (const auto& e : grads.entries) n += e.tensor.size() * 4;
  return n;
}

int64_t message_bytes(const QuantizedGradSet& qset) {
  int64_t n = 4 + 2 + 4;
  for (const auto& e : qset.entries) n += tensor_header_bytes(e.q) + e.q.elements() * (e.q.bits / 8);
  return n;
}

}  // namespace fedq
