#include "fedq/bigint.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedq {

BigUint::BigUint(uint64_t v) {
  limbs_ = {static_cast<uint32_t>(v), static_cast<uint32_t>(v >> 32)};
  while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

BigUint& BigUint::mul_u32(uint32_t m) {
  uint64_t carry = 0;
  for (uint32_t& limb : limbs_) {
    uint64_t prod = static_cast<uint64_t>(limb) * m + carry;
    limb = static_cast<uint32_t>(prod);
    carry = prod >> 32;
  }
  while (carry) {
    limbs_.push_back(static_cast<uint32_t>(carry));
    carry >>= 32;
  }
  while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
  return *this;
}

std::string BigUint::to_string() const {
  // Repeated division by 10^9 over the limbs.
  std::vector<uint32_t> work = limbs_;
  std::string out;
  while (!(work.size() == 1 && work[0] == 0)) {
    uint64_t rem = 0;
    for (size_t i = work.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | work[i];
      work[i] = static_cast<uint32_t>(cur / 1000000000ULL);
      rem = cur % 1000000000ULL;
    }
    while (work.size() > 1 && work.back() == 0) work.pop_back();
    std::string chunk = std::to_string(rem);
    bool last = work.size() == 1 && work[0] == 0;
    if (!last) chunk = std::string(9 - chunk.size(), '0') + chunk;
    std::reverse(chunk.begin(), chunk.end());
    out += chunk;
  }
  if (out.empty()) out = "0";
  std::reverse(out.begin(), out.end());
  return out;
}

BigUint attack_search_space(uint64_t modes, uint64_t layers) {
  if (modes < 1 || layers < 1) {
    throw std::invalid_argument("attack_search_space: modes and layers must be >= 1");
  }
  if (modes > UINT32_MAX) {
    throw std::invalid_argument("attack_search_space: mode count too large");
  }
  BigUint result(1);
  for (uint64_t i = 0; i < layers; ++i) result.mul_u32(static_cast<uint32_t>(modes));
  return result;
}

}  // namespace fedq
